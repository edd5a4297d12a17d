//! Fuzzy witness complexes, their first two Betti numbers over GF(2),
//! count-based epsilon barcodes and edge-lifespan diagrams across
//! reconstruction dimensions.

use std::collections::HashMap;
use std::io::Write;
use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::PointCloud;
use crate::series::reconstruct_values;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkStrategy {
    EquallySpaced,
    /// Greedy farthest-point selection seeded at index 0.
    MaxMin,
    Random(u64),
}

/// Landmark positions within a witness cloud, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandmarkSet {
    pub indices: Vec<usize>,
    pub strategy: LandmarkStrategy,
}

impl LandmarkSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn points(&self, cloud: &PointCloud) -> PointCloud {
        cloud.select(&self.indices)
    }
}

pub fn select_landmarks(cloud: &PointCloud, ell: usize, strategy: LandmarkStrategy) -> Result<LandmarkSet> {
    let n = cloud.len();
    if ell == 0 {
        return Err(Error::invalid("landmark count must be at least 1"));
    }
    if ell > n {
        return Err(Error::invalid(format!("landmark count {ell} exceeds {n} points")));
    }
    let mut indices = match strategy {
        LandmarkStrategy::EquallySpaced => {
            let stride = n / ell;
            (0..ell).map(|i| i * stride).collect()
        }
        LandmarkStrategy::MaxMin => max_min(cloud, ell),
        LandmarkStrategy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample(&mut rng, n, ell).into_vec()
        }
    };
    indices.sort_unstable();
    Ok(LandmarkSet { indices, strategy })
}

fn max_min(cloud: &PointCloud, ell: usize) -> Vec<usize> {
    let mut chosen = vec![0];
    let mut gap: Vec<f64> = cloud.iter().map(|p| euclidean(p, cloud.point(0))).collect();
    while chosen.len() < ell {
        let mut next = 0;
        for (i, &g) in gap.iter().enumerate() {
            if g > gap[next] {
                next = i;
            }
        }
        chosen.push(next);
        let anchor = cloud.point(next);
        for (g, p) in gap.iter_mut().zip(cloud.iter()) {
            *g = g.min(euclidean(p, anchor));
        }
    }
    chosen
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn witness_distances(witnesses: &PointCloud, landmarks: &PointCloud) -> Result<Vec<Vec<f64>>> {
    if witnesses.dim() != landmarks.dim() {
        return Err(Error::DimensionMismatch { expected: witnesses.dim(), actual: landmarks.dim() });
    }
    if landmarks.is_empty() {
        return Err(Error::invalid("at least one landmark is required"));
    }
    Ok(witnesses
        .iter()
        .map(|w| landmarks.iter().map(|l| euclidean(w, l)).collect())
        .collect())
}

/// For each landmark, the witnesses within `eps` of their own nearest-landmark
/// distance from it.
pub fn fuzzy_witness_sets(witnesses: &PointCloud, landmarks: &PointCloud, eps: f64) -> Result<Vec<Vec<usize>>> {
    check_eps(eps)?;
    let dists = witness_distances(witnesses, landmarks)?;
    let mut sets = vec![Vec::new(); landmarks.len()];
    for (w, d) in dists.iter().enumerate() {
        let nearest = d.iter().cloned().fold(f64::INFINITY, f64::min);
        for (l, &dl) in d.iter().enumerate() {
            if dl - nearest <= eps {
                sets[l].push(w);
            }
        }
    }
    Ok(sets)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be a finite nonnegative number, got {eps}")));
    }
    Ok(())
}

/// Birth scale of every landmark pair: the smallest epsilon at which some
/// witness lies in both fuzzy witness sets. Snapshots at any epsilon are
/// thresholds of this table.
#[derive(Debug, Clone)]
pub struct WitnessFiltration {
    ell: usize,
    births: Vec<f64>,
}

impl WitnessFiltration {
    pub fn new(witnesses: &PointCloud, landmarks: &PointCloud) -> Result<Self> {
        let ell = landmarks.len();
        let dists = witness_distances(witnesses, landmarks)?;
        let pairs = ell * ell.saturating_sub(1) / 2;
        let births = dists
            .par_iter()
            .fold(
                || vec![f64::INFINITY; pairs],
                |mut acc, d| {
                    let nearest = d.iter().cloned().fold(f64::INFINITY, f64::min);
                    let mut k = 0;
                    for a in 0..ell {
                        let da = d[a];
                        for b in a + 1..ell {
                            let v = da.max(d[b]) - nearest;
                            if v < acc[k] {
                                acc[k] = v;
                            }
                            k += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![f64::INFINITY; pairs],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x = x.min(y);
                    }
                    a
                },
            );
        Ok(WitnessFiltration { ell, births })
    }

    pub fn landmark_count(&self) -> usize {
        self.ell
    }

    /// Birth scale of edge {a, b}; infinite when no witness exists.
    pub fn birth(&self, a: usize, b: usize) -> f64 {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        self.births[pair_index(self.ell, a, b)]
    }

    pub fn edges_at(&self, eps: f64) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        let mut k = 0;
        for a in 0..self.ell {
            for b in a + 1..self.ell {
                if self.births[k] <= eps {
                    edges.push((a, b));
                }
                k += 1;
            }
        }
        edges
    }

    pub fn snapshot(&self, eps: f64) -> Result<WitnessComplexSnapshot> {
        check_eps(eps)?;
        Ok(WitnessComplexSnapshot::from_edges(eps, self.ell, self.edges_at(eps)))
    }
}

fn pair_index(ell: usize, a: usize, b: usize) -> usize {
    a * (2 * ell - a - 1) / 2 + (b - a - 1)
}

/// Clique complex on the landmark vertices, truncated at triangles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessComplexSnapshot {
    pub epsilon: f64,
    pub vertices: usize,
    /// Sorted pairs with `a < b`.
    pub edges: Vec<(usize, usize)>,
    /// Sorted triples with `a < b < c`.
    pub triangles: Vec<[usize; 3]>,
}

impl WitnessComplexSnapshot {
    /// Builds the flag complex of an edge list on `vertices` vertices.
    pub fn from_edges(epsilon: f64, vertices: usize, mut edges: Vec<(usize, usize)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.retain(|e| e.0 != e.1);
        edges.sort_unstable();
        edges.dedup();
        let mut upper = vec![Vec::new(); vertices];
        for &(a, b) in &edges {
            upper[a].push(b);
        }
        let mut triangles = Vec::new();
        for &(a, b) in &edges {
            let (na, nb) = (&upper[a], &upper[b]);
            let (mut i, mut j) = (0, 0);
            while i < na.len() && j < nb.len() {
                match na[i].cmp(&nb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if na[i] > b {
                            triangles.push([a, b, na[i]]);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        triangles.sort_unstable();
        WitnessComplexSnapshot { epsilon, vertices, edges, triangles }
    }

    pub fn simplex_count(&self) -> usize {
        self.vertices + self.edges.len() + self.triangles.len()
    }

    /// Every triangle has all three of its edges present.
    pub fn is_clique_closed(&self) -> bool {
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        self.triangles.iter().all(|&[a, b, c]| {
            [(a, b), (a, c), (b, c)].iter().all(|e| sorted.binary_search(e).is_ok())
        })
    }
}

pub fn build_complex(witnesses: &PointCloud, landmarks: &PointCloud, eps: f64) -> Result<WitnessComplexSnapshot> {
    WitnessFiltration::new(witnesses, landmarks)?.snapshot(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Betti {
    pub b0: usize,
    pub b1: usize,
    /// Rank of the triangle boundary map over GF(2).
    pub boundary_rank: usize,
}

pub fn betti_numbers(complex: &WitnessComplexSnapshot) -> Betti {
    let v = complex.vertices;
    let mut parent: Vec<usize> = (0..v).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut b0 = v;
    for &(a, b) in &complex.edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            b0 -= 1;
        }
    }
    let cycle_rank = complex.edges.len() + b0 - v;
    let boundary_rank = if cycle_rank == 0 { 0 } else { boundary_rank(complex, cycle_rank) };
    Betti { b0, b1: cycle_rank - boundary_rank, boundary_rank }
}

/// GF(2) rank of the triangle boundary matrix by sparse column reduction,
/// stopping once the rank reaches `cap`.
fn boundary_rank(complex: &WitnessComplexSnapshot, cap: usize) -> usize {
    let index: HashMap<(usize, usize), u32> = complex
        .edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i as u32))
        .collect();
    let mut pivots: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut rank = 0;
    for &[a, b, c] in &complex.triangles {
        let mut col = vec![index[&(a, b)], index[&(a, c)], index[&(b, c)]];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(p) => col = symmetric_difference(&col, p),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivots.insert(low, col);
            rank += 1;
            if rank == cap {
                break;
            }
        }
    }
    rank
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Feature intervals over a sweep parameter; `death == None` is open-ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Barcode {
    pub dimension: usize,
    pub intervals: Vec<(f64, Option<f64>)>,
}

impl Barcode {
    /// Greedy count-based intervals: new features are born when the count
    /// rises, and the youngest open intervals die when it falls.
    pub fn from_counts(dimension: usize, params: &[f64], counts: &[usize]) -> Self {
        let mut intervals: Vec<(f64, Option<f64>)> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        for (&s, &c) in params.iter().zip(counts) {
            while open.len() < c {
                open.push(intervals.len());
                intervals.push((s, None));
            }
            while open.len() > c {
                let i = open.pop().unwrap();
                intervals[i].1 = Some(s);
            }
        }
        Barcode { dimension, intervals }
    }

    pub fn count_at(&self, s: f64) -> usize {
        self.intervals
            .iter()
            .filter(|(b, d)| *b <= s && d.is_none_or(|d| s < d))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BettiPoint {
    pub epsilon: f64,
    pub b0: usize,
    pub b1: usize,
    pub edges: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonBarcodes {
    pub curve: Vec<BettiPoint>,
    pub dim0: Barcode,
    pub dim1: Barcode,
}

pub fn epsilon_barcode(filtration: &WitnessFiltration, eps_grid: &[f64]) -> Result<EpsilonBarcodes> {
    if eps_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("epsilon grid must be strictly ascending"));
    }
    for &e in eps_grid {
        check_eps(e)?;
    }
    let curve: Vec<BettiPoint> = eps_grid
        .par_iter()
        .map(|&eps| {
            let snap = WitnessComplexSnapshot::from_edges(eps, filtration.ell, filtration.edges_at(eps));
            let b = betti_numbers(&snap);
            BettiPoint { epsilon: eps, b0: b.b0, b1: b.b1, edges: snap.edges.len(), triangles: snap.triangles.len() }
        })
        .collect();
    let b0: Vec<usize> = curve.iter().map(|p| p.b0).collect();
    let b1: Vec<usize> = curve.iter().map(|p| p.b1).collect();
    Ok(EpsilonBarcodes {
        dim0: Barcode::from_counts(0, eps_grid, &b0),
        dim1: Barcode::from_counts(1, eps_grid, &b1),
        curve,
    })
}

/// `xi` times the bounding-box diagonal of `cloud`.
pub fn scaled_epsilon(xi: f64, cloud: &PointCloud) -> Result<f64> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("xi must be a finite nonnegative number, got {xi}")));
    }
    let diameter = cloud.bounding_box_diameter().ok_or(Error::EmptySeries)?;
    Ok(xi * diameter)
}

/// Bounding-box diagonal used for m-dimensional reconstructions of `values`:
/// `sqrt(m) * (max - min)`.
pub fn reconstruction_diameter(values: &[f64], m: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((m as f64).sqrt() * (hi - lo))
}

/// Longest run of consecutive reconstruction dimensions in which each
/// landmark pair stays connected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifespanDiagram {
    pub m_values: Vec<usize>,
    /// Series indices of the landmarks, shared by every dimension.
    pub landmark_times: Vec<usize>,
    delta: Vec<usize>,
    /// Per landmark pair (row-major upper triangle), the dimensions in which the edge exists.
    presence: Vec<Vec<usize>>,
}

impl LifespanDiagram {
    pub fn landmark_count(&self) -> usize {
        self.landmark_times.len()
    }

    pub fn delta_m(&self, i: usize, j: usize) -> usize {
        if i == j {
            return 0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.delta[pair_index(self.landmark_count(), a, b)]
    }

    /// Dimensions in which edge {i, j} is present.
    pub fn present_at(&self, i: usize, j: usize) -> &[usize] {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        &self.presence[pair_index(self.landmark_count(), a, b)]
    }

    /// `(i, j, delta_m)` for every pair with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let ell = self.landmark_count();
        (0..ell).flat_map(move |i| (i + 1..ell).map(move |j| (i, j, self.delta_m(i, j))))
    }
}

pub fn edge_lifespan_diagram(
    values: &[f64],
    m_range: RangeInclusive<usize>,
    tau: usize,
    xi: f64,
    ell: usize,
) -> Result<LifespanDiagram> {
    let m_values: Vec<usize> = m_range.collect();
    let (&m_lo, &m_hi) = match (m_values.first(), m_values.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptyGrid),
    };
    if m_lo == 0 || tau == 0 {
        return Err(Error::invalid("m and tau must be at least 1"));
    }
    if ell < 2 {
        return Err(Error::invalid("at least two landmarks are required"));
    }
    let shortest = reconstruct_values(values, m_hi, tau)?;
    if ell > shortest.len() {
        return Err(Error::invalid(format!(
            "landmark count {ell} exceeds the {} points of the m = {m_hi} reconstruction",
            shortest.len()
        )));
    }
    let first = (m_hi - 1) * tau;
    let stride = shortest.len() / ell;
    let landmark_times: Vec<usize> = (0..ell).map(|i| first + i * stride).collect();

    let per_m: Vec<Vec<bool>> = m_values
        .par_iter()
        .map(|&m| -> Result<Vec<bool>> {
            let rec = reconstruct_values(values, m, tau)?;
            let offset = (m - 1) * tau;
            let idx: Vec<usize> = landmark_times.iter().map(|t| t - offset).collect();
            let landmarks = rec.points().select(&idx);
            let eps = xi * reconstruction_diameter(values, m)?;
            let filt = WitnessFiltration::new(rec.points(), &landmarks)?;
            Ok(filt.births.iter().map(|&b| b <= eps).collect())
        })
        .collect::<Result<_>>()?;

    let pairs = ell * (ell - 1) / 2;
    let mut delta = vec![0; pairs];
    let mut presence = vec![Vec::new(); pairs];
    for k in 0..pairs {
        let mut run = 0;
        for (mi, &m) in m_values.iter().enumerate() {
            if per_m[mi][k] {
                run += 1;
                presence[k].push(m);
                delta[k] = delta[k].max(run);
            } else {
                run = 0;
            }
        }
    }
    Ok(LifespanDiagram { m_values, landmark_times, delta, presence })
}

pub fn write_barcode_csv<W: Write>(mut w: W, barcodes: &[&Barcode]) -> Result<()> {
    writeln!(w, "dim,birth,death")?;
    for bc in barcodes {
        for (b, d) in &bc.intervals {
            match d {
                Some(d) => writeln!(w, "{},{b},{d}", bc.dimension)?,
                None => writeln!(w, "{},{b},inf", bc.dimension)?,
            }
        }
    }
    Ok(())
}

pub fn write_lifespan_csv<W: Write>(mut w: W, diagram: &LifespanDiagram) -> Result<()> {
    writeln!(w, "i,j,delta_m")?;
    for (i, j, d) in diagram.entries() {
        writeln!(w, "{i},{j},{d}")?;
    }
    Ok(())
}

pub fn write_betti_csv<W: Write>(mut w: W, curve: &[BettiPoint]) -> Result<()> {
    writeln!(w, "epsilon,b0,b1,edges,triangles")?;
    for p in curve {
        writeln!(w, "{},{},{},{},{}", p.epsilon, p.b0, p.b1, p.edges, p.triangles)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(rows: &[&[f64]]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::from_flat(dim, (0..n * dim).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    // Dense GF(2) rank, independent of the sparse reduction.
    fn dense_rank(mut rows: Vec<Vec<bool>>) -> usize {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) {
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[c] {
                        for (x, y) in row.iter_mut().zip(&pivot) {
                            *x ^= *y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn oracle_betti(v: usize, edges: &[(usize, usize)], tris: &[[usize; 3]]) -> (usize, usize) {
        let d1: Vec<Vec<bool>> = edges
            .iter()
            .map(|&(a, b)| (0..v).map(|x| x == a || x == b).collect())
            .collect();
        let d2: Vec<Vec<bool>> = tris
            .iter()
            .map(|&[a, b, c]| edges.iter().map(|&e| e == (a, b) || e == (a, c) || e == (b, c)).collect())
            .collect();
        let r1 = if edges.is_empty() { 0 } else { dense_rank(d1) };
        let r2 = if tris.is_empty() { 0 } else { dense_rank(d2) };
        (v - r1, edges.len() - r1 - r2)
    }

    #[test]
    fn equally_spaced_and_identity() {
        let c = PointCloud::from_scalars(&(0..10).map(|v| v as f64).collect::<Vec<_>>());
        let l = select_landmarks(&c, 5, LandmarkStrategy::EquallySpaced).unwrap();
        assert_eq!(l.indices, vec![0, 2, 4, 6, 8]);
        for s in [LandmarkStrategy::EquallySpaced, LandmarkStrategy::MaxMin, LandmarkStrategy::Random(3)] {
            assert_eq!(select_landmarks(&c, 10, s).unwrap().indices, (0..10).collect::<Vec<_>>());
        }
        assert!(select_landmarks(&c, 11, LandmarkStrategy::MaxMin).is_err());
        assert!(select_landmarks(&c, 0, LandmarkStrategy::MaxMin).is_err());
    }

    #[test]
    fn max_min_collinear() {
        let c = PointCloud::from_scalars(&(0..10).map(|v| v as f64).collect::<Vec<_>>());
        let l = select_landmarks(&c, 3, LandmarkStrategy::MaxMin).unwrap();
        assert_eq!(l.indices, vec![0, 4, 9]);
    }

    #[test]
    fn random_landmarks_deterministic() {
        let c = random_cloud(100, 2, 1);
        let a = select_landmarks(&c, 10, LandmarkStrategy::Random(5)).unwrap();
        let b = select_landmarks(&c, 10, LandmarkStrategy::Random(5)).unwrap();
        assert_eq!(a, b);
        let mut d = a.indices.clone();
        d.dedup();
        assert_eq!(d.len(), 10);
    }

    #[test]
    fn witness_sets_strict_and_saturated() {
        let w = random_cloud(50, 2, 2);
        let l = random_cloud(5, 2, 3);
        let sets = fuzzy_witness_sets(&w, &l, 0.0).unwrap();
        assert_eq!(sets.iter().map(Vec::len).sum::<usize>(), 50);
        let sets = fuzzy_witness_sets(&w, &l, 2.0).unwrap();
        assert!(sets.iter().all(|s| s.len() == 50));
        assert!(fuzzy_witness_sets(&w, &l, -1.0).is_err());
    }

    #[test]
    fn two_witness_sketch() {
        // w_a is nearest l1 at 1.0 and 1.5 from l2; w_b sits next to l3.
        let l = cloud(&[&[0.0, 0.0], &[2.5, 0.0], &[10.0, 0.0]]);
        let w = cloud(&[&[1.0, 0.0], &[10.1, 0.0]]);
        assert!(build_complex(&w, &l, 0.4).unwrap().edges.is_empty());
        let snap = build_complex(&w, &l, 0.5).unwrap();
        assert_eq!(snap.edges, vec![(0, 1)]);
        let f = WitnessFiltration::new(&w, &l).unwrap();
        assert_eq!(f.birth(0, 1), 0.5);
        assert_eq!(f.birth(1, 0), 0.5);
    }

    #[test]
    fn complex_basics() {
        let l = cloud(&[&[0.0, 0.0]]);
        let snap = build_complex(&random_cloud(10, 2, 1), &l, 1.0).unwrap();
        assert_eq!((snap.vertices, snap.edges.len(), snap.triangles.len()), (1, 0, 0));

        let tri = WitnessComplexSnapshot::from_edges(0.0, 3, vec![(0, 1), (2, 1), (0, 2)]);
        assert_eq!(tri.triangles, vec![[0, 1, 2]]);
        assert!(tri.is_clique_closed());
        assert_eq!(betti_numbers(&tri), Betti { b0: 1, b1: 0, boundary_rank: 1 });

        let square = WitnessComplexSnapshot::from_edges(0.0, 4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert!(square.triangles.is_empty());
        assert_eq!((betti_numbers(&square).b0, betti_numbers(&square).b1), (1, 1));

        let isolated = WitnessComplexSnapshot::from_edges(0.0, 7, vec![]);
        assert_eq!((betti_numbers(&isolated).b0, betti_numbers(&isolated).b1), (7, 0));
    }

    #[test]
    fn two_holes() {
        // Two squares sharing vertex 0: a figure eight.
        let e = vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (4, 5), (5, 6), (0, 6)];
        let b = betti_numbers(&WitnessComplexSnapshot::from_edges(0.0, 7, e));
        assert_eq!((b.b0, b.b1), (1, 2));
    }

    #[test]
    fn full_complex_is_acyclic() {
        let edges: Vec<(usize, usize)> = (0..30).flat_map(|a| (a + 1..30).map(move |b| (a, b))).collect();
        let b = betti_numbers(&WitnessComplexSnapshot::from_edges(0.0, 30, edges));
        assert_eq!((b.b0, b.b1), (1, 0));
    }

    #[test]
    fn circle_barcode() {
        let n = 400;
        let w = PointCloud::from_rows(
            &(0..n)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let l = select_landmarks(&w, 20, LandmarkStrategy::EquallySpaced).unwrap();
        let f = WitnessFiltration::new(&w, &l.points(&w)).unwrap();
        let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.05).collect();
        let bc = epsilon_barcode(&f, &grid).unwrap();
        assert!(bc.curve.iter().any(|p| p.b0 == 1 && p.b1 == 1));
        let last = bc.curve.last().unwrap();
        assert_eq!((last.b0, last.b1), (1, 0));
        for p in &bc.curve {
            assert_eq!(bc.dim0.count_at(p.epsilon), p.b0);
            assert_eq!(bc.dim1.count_at(p.epsilon), p.b1);
        }
    }

    #[test]
    fn single_value_grid_is_open_ended() {
        let w = random_cloud(40, 2, 4);
        let l = select_landmarks(&w, 8, LandmarkStrategy::MaxMin).unwrap();
        let f = WitnessFiltration::new(&w, &l.points(&w)).unwrap();
        let bc = epsilon_barcode(&f, &[0.01]).unwrap();
        assert!(bc.dim0.intervals.iter().all(|(b, d)| *b == 0.01 && d.is_none()));
        assert_eq!(bc.dim0.intervals.len(), bc.curve[0].b0);
        assert!(epsilon_barcode(&f, &[]).is_err());
        assert!(epsilon_barcode(&f, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn barcode_csv() {
        let bc = Barcode::from_counts(1, &[0.1, 0.2, 0.3], &[0, 2, 1]);
        assert_eq!(bc.intervals, vec![(0.2, None), (0.2, Some(0.3))]);
        let mut out = Vec::new();
        write_barcode_csv(&mut out, &[&bc]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "dim,birth,death\n1,0.2,inf\n1,0.2,0.3\n");
    }

    #[test]
    fn scaled_epsilon_rules() {
        let c = cloud(&[&[0.0, 0.0], &[3.0, 4.0]]);
        assert_eq!(scaled_epsilon(0.1, &c).unwrap(), 0.5);
        assert_eq!(scaled_epsilon(0.0, &c).unwrap(), 0.0);
        assert!(scaled_epsilon(-0.1, &c).is_err());
        let x = [1.0, -2.0, 4.0, 0.5];
        assert_eq!(reconstruction_diameter(&x, 4).unwrap(), 12.0);
        let rec = reconstruct_values(&x, 1, 1).unwrap();
        assert_eq!(scaled_epsilon(1.0, rec.points()).unwrap(), reconstruction_diameter(&x, 1).unwrap());
    }

    #[test]
    fn lifespan_saturation_and_single_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..300).map(|_| rng.random::<f64>()).collect();
        let d = edge_lifespan_diagram(&x, 1..=4, 2, 10.0, 12).unwrap();
        assert!(d.entries().all(|(_, _, v)| v == 4));
        let d = edge_lifespan_diagram(&x, 1..=4, 2, 0.01, 12).unwrap();
        for (i, j, v) in d.entries() {
            let present = d.present_at(i, j);
            if present == [1] {
                assert_eq!(v, 1);
            }
            assert!(v <= present.len());
        }
        let mut out = Vec::new();
        write_lifespan_csv(&mut out, &d).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1 + 66);
        assert!(edge_lifespan_diagram(&x, 1..=4, 2, 0.1, 1000).is_err());
    }

    #[test]
    fn longest_run_counts_consecutive_dimensions() {
        // Manually check the run logic on a diagram whose presence pattern is known.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let d = edge_lifespan_diagram(&x, 1..=6, 1, 0.05, 10).unwrap();
        for (i, j, v) in d.entries() {
            let p = d.present_at(i, j);
            let mut best = 0;
            let mut run = 0;
            let mut prev = None;
            for &m in p {
                run = if prev == Some(m - 1) { run + 1 } else { 1 };
                best = best.max(run);
                prev = Some(m);
            }
            assert_eq!(v, best);
        }
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1usize..=12).prop_flat_map(|v| {
            let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
            let n = pairs.len();
            (Just(v), prop::collection::vec(any::<bool>(), n))
                .prop_map(move |(v, keep)| (v, pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn homology_matches_dense_oracle((v, edges) in random_graph()) {
            let snap = WitnessComplexSnapshot::from_edges(0.0, v, edges);
            prop_assert!(snap.is_clique_closed());
            let b = betti_numbers(&snap);
            prop_assert_eq!((b.b0, b.b1), oracle_betti(v, &snap.edges, &snap.triangles));
            let t = snap.triangles.len();
            prop_assert_eq!(
                v as i64 - snap.edges.len() as i64 + t as i64,
                b.b0 as i64 - b.b1 as i64 + (t - b.boundary_rank) as i64
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn edges_monotone_in_epsilon(seed in 0u64..1000, e1 in 0.0f64..0.3, de in 0.0f64..0.3) {
            let w = random_cloud(60, 2, seed);
            let l = select_landmarks(&w, 10, LandmarkStrategy::MaxMin).unwrap();
            let f = WitnessFiltration::new(&w, &l.points(&w)).unwrap();
            let a = f.snapshot(e1).unwrap();
            let b = f.snapshot(e1 + de).unwrap();
            prop_assert!(a.edges.iter().all(|e| b.edges.contains(e)));
            prop_assert!(betti_numbers(&b).b0 <= betti_numbers(&a).b0);
        }

        #[test]
        fn filtration_agrees_with_witness_sets(seed in 0u64..1000, eps in 0.0f64..0.4) {
            let w = random_cloud(40, 2, seed);
            let l = select_landmarks(&w, 7, LandmarkStrategy::Random(seed)).unwrap();
            let lp = l.points(&w);
            let sets = fuzzy_witness_sets(&w, &lp, eps).unwrap();
            let snap = build_complex(&w, &lp, eps).unwrap();
            for a in 0..7 {
                for b in a + 1..7 {
                    let shared = sets[a].iter().any(|x| sets[b].contains(x));
                    prop_assert_eq!(shared, snap.edges.contains(&(a, b)));
                }
            }
        }
    }
}
