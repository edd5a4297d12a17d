//! Exact nearest-neighbor queries over a [`PointCloud`].
//!
//! A k-d tree with per-node bounding boxes. Searches accept an index filter so
//! callers can exclude the query point itself, a temporal (Theiler) window, or
//! points without a forward image. Ties in distance always resolve to the
//! smallest point index, so every query is deterministic.

use crate::points::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// Max norm.
    Chebyshev,
}

impl Metric {
    /// True distance between two points.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(self.reduced(a, b))
    }

    // Squared distance for Euclidean, plain distance for Chebyshev. Both are
    // monotone in the true distance, which is all the search needs.
    #[inline]
    fn reduced(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            Metric::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }

    #[inline]
    fn to_reduced(self, d: f64) -> f64 {
        match self {
            Metric::Euclidean => d * d,
            Metric::Chebyshev => d,
        }
    }

    #[inline]
    fn finish(self, r: f64) -> f64 {
        match self {
            Metric::Euclidean => r.sqrt(),
            Metric::Chebyshev => r,
        }
    }

    #[inline]
    fn accumulate(self, acc: f64, gap: f64) -> f64 {
        match self {
            Metric::Euclidean => acc + gap * gap,
            Metric::Chebyshev => acc.max(gap),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

const LEAF_SIZE: usize = 12;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

#[derive(Debug)]
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
    // Per node: dim minima followed by dim maxima.
    boxes: Vec<f64>,
}

impl<'a> KdTree<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        let n = cloud.len();
        let mut tree = Self {
            cloud,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            boxes: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let dim = self.cloud.dim();
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left: NONE,
            right: NONE,
        });
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            for (c, &v) in self.cloud.point(i).iter().enumerate() {
                lo[c] = lo[c].min(v);
                hi[c] = hi[c].max(v);
            }
        }
        let (axis, spread) = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (c, s)| if s > best.1 { (c, s) } else { best });
        self.boxes.extend_from_slice(&lo);
        self.boxes.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        let cloud = self.cloud;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            cloud.point(a)[axis].total_cmp(&cloud.point(b)[axis])
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        let node = &mut self.nodes[id as usize];
        node.left = left;
        node.right = right;
        id
    }

    #[inline]
    fn node_box(&self, id: u32) -> (&[f64], &[f64]) {
        let dim = self.cloud.dim();
        let base = id as usize * 2 * dim;
        (&self.boxes[base..base + dim], &self.boxes[base + dim..base + 2 * dim])
    }

    fn min_reduced(&self, id: u32, q: &[f64], metric: Metric) -> f64 {
        let (lo, hi) = self.node_box(id);
        let mut acc = 0.0;
        for c in 0..q.len() {
            let gap = if q[c] < lo[c] {
                lo[c] - q[c]
            } else if q[c] > hi[c] {
                q[c] - hi[c]
            } else {
                0.0
            };
            acc = metric.accumulate(acc, gap);
        }
        acc
    }

    fn max_reduced(&self, id: u32, q: &[f64], metric: Metric) -> f64 {
        let (lo, hi) = self.node_box(id);
        let mut acc = 0.0;
        for c in 0..q.len() {
            let gap = (q[c] - lo[c]).abs().max((hi[c] - q[c]).abs());
            acc = metric.accumulate(acc, gap);
        }
        acc
    }

    /// Nearest admissible point to `query`.
    pub fn nearest<F: Fn(usize) -> bool>(&self, query: &[f64], metric: Metric, admit: F) -> Option<Neighbor> {
        self.k_nearest(query, 1, metric, admit).into_iter().next()
    }

    /// The `k` nearest admissible points, sorted by (distance, index).
    pub fn k_nearest<F: Fn(usize) -> bool>(
        &self,
        query: &[f64],
        k: usize,
        metric: Metric,
        admit: F,
    ) -> Vec<Neighbor> {
        debug_assert_eq!(query.len(), self.cloud.dim());
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.search(0, query, k, metric, &admit, &mut best);
        }
        best.into_iter()
            .map(|(r, index)| Neighbor {
                index,
                distance: metric.finish(r),
            })
            .collect()
    }

    fn search<F: Fn(usize) -> bool>(
        &self,
        id: u32,
        q: &[f64],
        k: usize,
        metric: Metric,
        admit: &F,
        best: &mut Vec<(f64, usize)>,
    ) {
        let node = self.nodes[id as usize];
        if node.left == NONE {
            for &i in &self.order[node.start as usize..node.end as usize] {
                if !admit(i) {
                    continue;
                }
                let r = metric.reduced(q, self.cloud.point(i));
                let cand = (r, i);
                if best.len() < k || lexi_less(cand, best[best.len() - 1]) {
                    let pos = best.partition_point(|&b| lexi_less(b, cand));
                    best.insert(pos, cand);
                    best.truncate(k);
                }
            }
            return;
        }
        let dl = self.min_reduced(node.left, q, metric);
        let dr = self.min_reduced(node.right, q, metric);
        let (first, d1, second, d2) = if dl <= dr {
            (node.left, dl, node.right, dr)
        } else {
            (node.right, dr, node.left, dl)
        };
        // Equal distances are not pruned: a tie may carry a smaller index.
        if best.len() < k || d1 <= best[best.len() - 1].0 {
            self.search(first, q, k, metric, admit, best);
        }
        if best.len() < k || d2 <= best[best.len() - 1].0 {
            self.search(second, q, k, metric, admit, best);
        }
    }

    /// Number of points at distance `<= radius` from `query` (the query point
    /// itself is counted if it belongs to the cloud).
    pub fn count_within(&self, query: &[f64], radius: f64, metric: Metric) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let r = metric.to_reduced(radius);
        let mut count = 0;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            if self.min_reduced(id, query, metric) > r {
                continue;
            }
            let node = self.nodes[id as usize];
            if self.max_reduced(id, query, metric) <= r {
                count += (node.end - node.start) as usize;
                continue;
            }
            if node.left == NONE {
                count += self.order[node.start as usize..node.end as usize]
                    .iter()
                    .filter(|&&i| metric.reduced(query, self.cloud.point(i)) <= r)
                    .count();
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        count
    }
}

#[inline]
fn lexi_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Coarse grid so distance ties actually happen.
        let data = (0..n * dim).map(|_| rng.random_range(0..20) as f64).collect();
        PointCloud::from_flat(dim, data).unwrap()
    }

    fn brute_knn(c: &PointCloud, q: &[f64], k: usize, metric: Metric, skip: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = (0..c.len())
            .filter(|&i| i != skip)
            .map(|i| (metric.distance(q, c.point(i)), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(d, i)| (i, d)).collect()
    }

    #[test]
    fn knn_matches_brute_force_with_ties() {
        for (dim, metric) in [(1, Metric::Chebyshev), (3, Metric::Chebyshev), (2, Metric::Euclidean), (4, Metric::Euclidean)] {
            let c = random_cloud(400, dim, dim as u64);
            let tree = KdTree::new(&c);
            for qi in (0..c.len()).step_by(7) {
                let q = c.point(qi);
                let got: Vec<(usize, f64)> = tree
                    .k_nearest(q, 5, metric, |i| i != qi)
                    .into_iter()
                    .map(|n| (n.index, n.distance))
                    .collect();
                assert_eq!(got, brute_knn(&c, q, 5, metric, qi));
            }
        }
    }

    #[test]
    fn range_count_matches_brute_force() {
        let c = random_cloud(500, 3, 11);
        let tree = KdTree::new(&c);
        for qi in (0..c.len()).step_by(13) {
            let q = c.point(qi);
            for r in [0.0, 1.0, 2.5, 7.0] {
                let expect = (0..c.len())
                    .filter(|&i| Metric::Chebyshev.distance(q, c.point(i)) <= r)
                    .count();
                assert_eq!(tree.count_within(q, r, Metric::Chebyshev), expect);
            }
        }
    }

    #[test]
    fn filter_excludes_everything() {
        let c = random_cloud(50, 2, 3);
        let tree = KdTree::new(&c);
        assert!(tree.nearest(c.point(0), Metric::Euclidean, |_| false).is_none());
    }

    #[test]
    fn duplicate_points_do_not_recurse_forever() {
        let c = PointCloud::from_flat(2, vec![1.0; 2 * 100]).unwrap();
        let tree = KdTree::new(&c);
        let nn = tree.k_nearest(&[1.0, 1.0], 3, Metric::Chebyshev, |i| i != 0);
        assert_eq!(nn.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(tree.count_within(&[1.0, 1.0], 0.0, Metric::Chebyshev), 100);
    }

    #[test]
    fn random_floats_knn() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let data: Vec<f64> = (0..3000).map(|_| rng.random::<f64>()).collect();
        let c = PointCloud::from_flat(3, data).unwrap();
        let tree = KdTree::new(&c);
        for qi in (0..c.len()).step_by(37) {
            let got: Vec<usize> = tree
                .k_nearest(c.point(qi), 4, Metric::Chebyshev, |i| i != qi)
                .iter()
                .map(|n| n.index)
                .collect();
            let expect: Vec<usize> = brute_knn(&c, c.point(qi), 4, Metric::Chebyshev, qi)
                .into_iter()
                .map(|x| x.0)
                .collect();
            assert_eq!(got, expect);
        }
    }
}
