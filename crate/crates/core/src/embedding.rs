//! Delay-reconstruction parameter selection: first minimum of the lagged
//! mutual information, first zero of the autocorrelation, false nearest
//! neighbors, and the A_tau-optimal grid search.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::ais::{atau_surface, DEFAULT_MAX_SAMPLES};
use crate::estimators::autocorr::autocorrelation;
use crate::estimators::binning::td_mutual_information_curve;
use crate::grid::SweepGrid;
use crate::neighbors::{KdTree, Metric};
use crate::points::PointCloud;
use crate::series::{min_length, variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMethod {
    FirstMinMi,
    FirstZeroAutocorr,
    Fnn,
    AtauOptimal,
}

impl ParamMethod {
    pub fn name(self) -> &'static str {
        match self {
            ParamMethod::FirstMinMi => "first_min_mi",
            ParamMethod::FirstZeroAutocorr => "first_zero_autocorr",
            ParamMethod::Fnn => "fnn",
            ParamMethod::AtauOptimal => "atau_optimal",
        }
    }
}

/// A selected (m, tau) pair. Delay-only heuristics leave `m` empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamChoice {
    pub method: ParamMethod,
    pub m: Option<usize>,
    pub tau: usize,
    pub score: f64,
}

/// Smallest tau whose binned lagged mutual information is a strict local
/// minimum. A flat stretch counts as a minimum when the values on both
/// sides of it are strictly larger; the first tau of the stretch is reported.
pub fn tau_first_min_mi(values: &[f64], tau_max: usize, bins: usize) -> Result<ParamChoice> {
    if tau_max < 3 {
        return Err(Error::invalid(format!("tau_max must be at least 3, got {tau_max}")));
    }
    let curve: Vec<f64> = td_mutual_information_curve(values, tau_max, bins)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    let tau = first_interior_minimum(&curve).ok_or(Error::NoMinimum { tau_max })?;
    Ok(ParamChoice { method: ParamMethod::FirstMinMi, m: None, tau: tau + 1, score: curve[tau] })
}

/// Index of the first strict interior minimum of `curve`, with plateaus
/// scanned to their end.
pub(crate) fn first_interior_minimum(curve: &[f64]) -> Option<usize> {
    let mut i = 1;
    while i + 1 < curve.len() {
        if curve[i - 1] > curve[i] {
            let mut end = i;
            while end + 1 < curve.len() && curve[end + 1] == curve[i] {
                end += 1;
            }
            if end + 1 < curve.len() && curve[end + 1] > curve[i] {
                return Some(i);
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }
    None
}

/// First zero of the autocorrelation. When the sign flips between tau-1 and
/// tau, the lag with the smaller |R| is reported.
pub fn tau_first_zero_autocorr(values: &[f64], tau_max: usize) -> Result<ParamChoice> {
    if tau_max == 0 || tau_max >= values.len() {
        return Err(Error::invalid(format!(
            "tau_max must lie in [1, {}), got {tau_max}",
            values.len()
        )));
    }
    let mut prev = autocorrelation(values, 0)?;
    for tau in 1..=tau_max {
        let r = autocorrelation(values, tau)?;
        if r == 0.0 || (r < 0.0) != (prev < 0.0) {
            let (tau, r) = if tau > 1 && prev.abs() < r.abs() { (tau - 1, prev) } else { (tau, r) };
            return Ok(ParamChoice { method: ParamMethod::FirstZeroAutocorr, m: None, tau, score: r });
        }
        prev = r;
    }
    Err(Error::NoZeroCrossing { tau_max })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnnConfig {
    /// Threshold on the growth ratio of the added coordinate.
    pub r_tol: f64,
    /// Threshold on the (m+1)-dimensional distance relative to the series
    /// standard deviation.
    pub a_tol: f64,
    /// Largest false-neighbor fraction accepted by [`estimate_m_fnn`].
    pub fraction_threshold: f64,
    pub m_max: usize,
}

impl Default for FnnConfig {
    fn default() -> Self {
        FnnConfig { r_tol: 10.0, a_tol: 2.0, fraction_threshold: 0.10, m_max: 10 }
    }
}

impl FnnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_tol > 0.0) || !(self.a_tol > 0.0) {
            return Err(Error::invalid("r_tol and a_tol must be positive"));
        }
        if !(self.fraction_threshold > 0.0 && self.fraction_threshold < 1.0) {
            return Err(Error::invalid(format!(
                "fraction_threshold must lie in (0, 1), got {}",
                self.fraction_threshold
            )));
        }
        if self.m_max == 0 {
            return Err(Error::invalid("m_max must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnnStats {
    pub m: usize,
    pub tau: usize,
    /// Anchors (series indices) of the points flagged as false neighbors.
    pub flagged: Vec<usize>,
    pub evaluated: usize,
    /// Points whose nearest neighbor sits at distance zero.
    pub skipped: usize,
}

impl FnnStats {
    pub fn fraction(&self) -> f64 {
        self.flagged.len() as f64 / self.evaluated as f64
    }
}

/// False-nearest-neighbor statistics for the step from m to m+1 dimensions.
pub fn fnn_statistics(values: &[f64], m: usize, tau: usize, config: &FnnConfig) -> Result<FnnStats> {
    config.validate()?;
    if m == 0 || tau == 0 {
        return Err(Error::invalid("m and tau must be at least 1"));
    }
    let required = min_length(m + 1, tau) + 1;
    if values.len() < required {
        return Err(Error::SeriesTooShort { required, actual: values.len() });
    }
    let var = variance(values);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let r_a = var.sqrt();
    let first = m * tau;
    let anchors: Vec<usize> = (first..values.len()).collect();
    let mut data = Vec::with_capacity(anchors.len() * m);
    for &j in &anchors {
        data.extend((0..m).map(|c| values[j - c * tau]));
    }
    let cloud = PointCloud::from_flat(m, data)?;
    let tree = KdTree::new(&cloud);

    let mut flagged = Vec::new();
    let mut evaluated = 0;
    let mut skipped = 0;
    for (i, &ji) in anchors.iter().enumerate() {
        let Some(nb) = tree.nearest(cloud.point(i), Metric::Euclidean, |q| q != i) else {
            continue;
        };
        if nb.distance == 0.0 {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        let jn = anchors[nb.index];
        let extra = (values[ji - first] - values[jn - first]).abs();
        let dist_next = nb.distance.hypot(extra);
        if extra / nb.distance > config.r_tol || dist_next / r_a > config.a_tol {
            flagged.push(ji);
        }
    }
    if evaluated == 0 {
        return Err(Error::Degenerate("every nearest neighbor is at distance zero".into()));
    }
    Ok(FnnStats { m, tau, flagged, evaluated, skipped })
}

pub fn fnn_fraction(values: &[f64], m: usize, tau: usize, config: &FnnConfig) -> Result<f64> {
    fnn_statistics(values, m, tau, config).map(|s| s.fraction())
}

/// Smallest m whose false-neighbor fraction is at or below the configured
/// threshold. On failure the whole fraction curve is returned in the error.
pub fn estimate_m_fnn(values: &[f64], tau: usize, config: &FnnConfig) -> Result<ParamChoice> {
    config.validate()?;
    let mut fractions = Vec::with_capacity(config.m_max);
    for m in 1..=config.m_max {
        let f = fnn_fraction(values, m, tau, config)?;
        if f <= config.fraction_threshold {
            return Ok(ParamChoice { method: ParamMethod::Fnn, m: Some(m), tau, score: f });
        }
        fractions.push(f);
    }
    Err(Error::NoEmbeddingFound { m_max: config.m_max, fractions })
}

/// Maximizer of A_tau over the grid; ties go to the smallest m, then tau.
pub fn atau_optimal_params(
    values: &[f64],
    m_range: RangeInclusive<usize>,
    tau_range: RangeInclusive<usize>,
    h: usize,
    k: usize,
) -> Result<(ParamChoice, SweepGrid)> {
    let grid = atau_surface(values, m_range, tau_range, h, k, DEFAULT_MAX_SAMPLES);
    let choice = choice_from_grid(&grid)?;
    Ok((choice, grid))
}

pub fn choice_from_grid(grid: &SweepGrid) -> Result<ParamChoice> {
    let best = grid.argmax().ok_or(Error::EmptyGrid)?;
    Ok(ParamChoice { method: ParamMethod::AtauOptimal, m: Some(best.m), tau: best.tau, score: best.value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = 0.0;
        (0..n)
            .map(|_| {
                x = phi * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect()
    }

    // Plain histogram MI with its own binning, independent of the estimator module.
    fn oracle_lag_mi(x: &[f64], tau: usize, bins: usize) -> f64 {
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let b = |v: f64| (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1);
        let n = x.len() - tau;
        let mut joint = vec![0usize; bins * bins];
        let mut pa = vec![0usize; bins];
        let mut pb = vec![0usize; bins];
        for j in tau..x.len() {
            let (a, c) = (b(x[j]), b(x[j - tau]));
            joint[a * bins + c] += 1;
            pa[a] += 1;
            pb[c] += 1;
        }
        let h = |counts: &[usize]| {
            counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n as f64;
                    -p * p.log2()
                })
                .sum::<f64>()
        };
        h(&pa) + h(&pb) - h(&joint)
    }

    #[test]
    fn sine_quarter_period_mi_minimum() {
        let x: Vec<f64> = (0..20_000).map(|j| (2.0 * std::f64::consts::PI * j as f64 / 12.0012).sin()).collect();
        let choice = tau_first_min_mi(&x, 8, 16).unwrap();
        let oracle: Vec<f64> = (1..=8).map(|t| oracle_lag_mi(&x, t, 16)).collect();
        let expected = (1..7).find(|&i| oracle[i - 1] > oracle[i] && oracle[i] < oracle[i + 1]).unwrap() + 1;
        assert_eq!(expected, 3);
        assert_eq!(choice.tau, 3);
        assert_eq!(choice.m, None);
        assert!((choice.score - oracle[2]).abs() < 1e-9);
    }

    #[test]
    fn ar1_has_no_mi_minimum() {
        let x = ar1(20_000, 0.95, 1);
        assert!(matches!(tau_first_min_mi(&x, 5, 16), Err(Error::NoMinimum { tau_max: 5 })));
        assert!(tau_first_min_mi(&x, 2, 16).is_err());
    }

    #[test]
    fn interior_minimum_rules() {
        assert_eq!(first_interior_minimum(&[3.0, 2.0, 1.0, 2.0]), Some(2));
        assert_eq!(first_interior_minimum(&[3.0, 1.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(first_interior_minimum(&[3.0, 1.0, 1.0, 0.5, 2.0]), Some(3));
        assert_eq!(first_interior_minimum(&[3.0, 1.0, 1.0]), None);
        assert_eq!(first_interior_minimum(&[1.0, 2.0, 3.0]), None);
        assert_eq!(first_interior_minimum(&[3.0, 2.0, 1.0]), None);
    }

    #[test]
    fn sine_autocorr_zero_at_quarter_period() {
        let x: Vec<f64> = (0..12_000).map(|j| (2.0 * std::f64::consts::PI * j as f64 / 12.0).sin()).collect();
        assert_eq!(tau_first_zero_autocorr(&x, 10).unwrap().tau, 3);
    }

    #[test]
    fn autocorr_errors() {
        assert!(matches!(tau_first_zero_autocorr(&[2.0; 100], 10), Err(Error::ZeroVariance)));
        let x = ar1(200_000, 0.8, 3);
        assert!(matches!(tau_first_zero_autocorr(&x, 10), Err(Error::NoZeroCrossing { tau_max: 10 })));
    }

    #[test]
    fn line_has_no_false_neighbors() {
        let x: Vec<f64> = (0..2_000).map(|j| j as f64 * 0.5).collect();
        for m in 1..=5 {
            assert_eq!(fnn_fraction(&x, m, 3, &FnnConfig::default()).unwrap(), 0.0);
        }
        let c = estimate_m_fnn(&x, 1, &FnnConfig::default()).unwrap();
        assert_eq!(c.m, Some(1));
        assert_eq!(c.method, ParamMethod::Fnn);
    }

    #[test]
    fn noise_is_mostly_false_at_m1() {
        let x = uniform(5_000, 7);
        assert!(fnn_fraction(&x, 1, 1, &FnnConfig::default()).unwrap() > 0.2);
    }

    #[test]
    fn no_embedding_found_carries_curve() {
        let x = uniform(500, 9);
        let cfg = FnnConfig { fraction_threshold: 0.01, m_max: 4, ..FnnConfig::default() };
        match estimate_m_fnn(&x, 1, &cfg) {
            Err(Error::NoEmbeddingFound { m_max, fractions }) => {
                assert_eq!(m_max, 4);
                assert_eq!(fractions.len(), 4);
                assert!(fractions.iter().all(|f| (0.0..=1.0).contains(f)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_points_are_skipped() {
        let mut x = uniform(300, 4);
        x.extend_from_slice(&x.clone());
        let s = fnn_statistics(&x, 2, 1, &FnnConfig::default()).unwrap();
        assert!(s.skipped > 250);
        assert_eq!(s.evaluated + s.skipped, x.len() - 2);
    }

    #[test]
    fn fnn_config_validation() {
        let x = uniform(100, 1);
        for cfg in [
            FnnConfig { r_tol: 0.0, ..FnnConfig::default() },
            FnnConfig { a_tol: -1.0, ..FnnConfig::default() },
            FnnConfig { fraction_threshold: 1.0, ..FnnConfig::default() },
            FnnConfig { fraction_threshold: 0.0, ..FnnConfig::default() },
        ] {
            assert!(fnn_fraction(&x, 1, 1, &cfg).unwrap_err().is_validation());
        }
        assert!(fnn_fraction(&x[..3], 2, 1, &FnnConfig::default()).unwrap_err().is_validation());
    }

    #[test]
    fn atau_choice_matches_grid_maximum() {
        let x = ar1(3_000, 0.9, 5);
        let (choice, grid) = atau_optimal_params(&x, 1..=3, 1..=3, 1, 4).unwrap();
        let max = grid.cells().filter_map(|(_, _, v)| v).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(choice.score, max);
        assert_eq!(grid.get(choice.m.unwrap(), choice.tau), Some(max));
        assert_eq!(choice.method, ParamMethod::AtauOptimal);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let x = uniform(10, 2);
        assert!(matches!(atau_optimal_params(&x, 5..=6, 5..=6, 1, 4), Err(Error::EmptyGrid)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fnn_scale_invariant(seed in 0u64..1000, scale in 0.001f64..1000.0, m in 1usize..4) {
            let x = ar1(600, 0.7, seed);
            let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let cfg = FnnConfig::default();
            let a = fnn_statistics(&x, m, 2, &cfg).unwrap();
            let b = fnn_statistics(&y, m, 2, &cfg).unwrap();
            prop_assert_eq!(a.flagged, b.flagged);
        }

        #[test]
        fn fnn_m_nonincreasing_in_threshold(seed in 0u64..1000, t1 in 0.02f64..0.5, dt in 0.0f64..0.45) {
            let x = ar1(600, 0.9, seed);
            let lo = FnnConfig { fraction_threshold: t1, m_max: 6, ..FnnConfig::default() };
            let hi = FnnConfig { fraction_threshold: (t1 + dt).min(0.99), ..lo };
            if let (Ok(a), Ok(b)) = (estimate_m_fnn(&x, 1, &lo), estimate_m_fnn(&x, 1, &hi)) {
                prop_assert!(b.m <= a.m);
            }
            if estimate_m_fnn(&x, 1, &lo).is_ok() {
                prop_assert!(estimate_m_fnn(&x, 1, &hi).is_ok());
            }
        }
    }
}
