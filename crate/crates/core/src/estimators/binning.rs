//! Histogram (equal-width binning) estimates of entropy and mutual information.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Default bin counts: 1D entropies, per-axis for 2D joints, per-axis for 3D joints.
pub const DEFAULT_BINS_1D: usize = 64;
pub const DEFAULT_BINS_2D: usize = 16;
pub const DEFAULT_BINS_3D: usize = 8;

/// Equal-width bins over `[lo, hi]`; values outside clamp to the edge bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningScheme {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl BinningScheme {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins < 2 {
            return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!("bin range [{lo}, {hi}] is empty")));
        }
        Ok(Self { bins, lo, hi })
    }

    /// Bins spanning the observed range of `values`. A constant input gets a
    /// unit-width range around its value so everything lands in one bin.
    pub fn fit(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            Self::new(bins, lo - 0.5, hi + 0.5)
        } else {
            Self::new(bins, lo, hi)
        }
    }

    #[inline]
    pub fn index(&self, x: f64) -> usize {
        let t = (x - self.lo) / (self.hi - self.lo) * self.bins as f64;
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.bins - 1)
        }
    }
}

/// Plug-in entropy in bits of a histogram. Counts are summed in sorted order so
/// the result does not depend on how the histogram was keyed.
pub(crate) fn entropy_of_counts(mut counts: Vec<usize>) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts.sort_unstable();
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

pub fn shannon_entropy_binned(values: &[f64], scheme: &BinningScheme) -> f64 {
    let mut counts = vec![0usize; scheme.bins];
    for &v in values {
        counts[scheme.index(v)] += 1;
    }
    entropy_of_counts(counts)
}

/// Joint entropy of equally long columns, each binned with its own fitted scheme.
pub fn joint_entropy_binned(columns: &[&[f64]], bins: usize) -> Result<f64> {
    let n = columns.first().map(|c| c.len()).ok_or(Error::EmptySeries)?;
    for c in columns {
        if c.len() != n {
            return Err(Error::LengthMismatch { left: n, right: c.len() });
        }
    }
    let schemes = columns
        .iter()
        .map(|c| BinningScheme::fit(c, bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(joint_entropy_with(columns, &schemes))
}

pub(crate) fn joint_entropy_with(columns: &[&[f64]], schemes: &[BinningScheme]) -> f64 {
    let n = columns[0].len();
    let mut hist: HashMap<u64, usize> = HashMap::new();
    for j in 0..n {
        let mut key = 0u64;
        for (c, s) in columns.iter().zip(schemes) {
            key = key * s.bins as u64 + s.index(c[j]) as u64;
        }
        *hist.entry(key).or_default() += 1;
    }
    entropy_of_counts(hist.into_values().collect())
}

/// `H[X] + H[Y] - H[X,Y]` on a `bins x bins` grid fitted to each variable.
pub fn binned_mutual_information(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let sx = BinningScheme::fit(x, bins)?;
    let sy = BinningScheme::fit(y, bins)?;
    Ok(mi_with(x, y, &sx, &sy))
}

fn mi_with(x: &[f64], y: &[f64], sx: &BinningScheme, sy: &BinningScheme) -> f64 {
    let hx = shannon_entropy_binned(x, sx);
    let hy = shannon_entropy_binned(y, sy);
    // Key order is irrelevant to the sorted-count entropy, which keeps I[X,Y] == I[Y,X].
    let hxy = joint_entropy_with(&[x, y], &[*sx, *sy]);
    hx + hy - hxy
}

/// Binned mutual information between `x_j` and `x_{j-tau}` for tau = 1..=tau_max,
/// using one scheme fitted to the whole series for both coordinates.
pub fn td_mutual_information_curve(values: &[f64], tau_max: usize, bins: usize) -> Result<Vec<(usize, f64)>> {
    if tau_max == 0 || tau_max >= values.len() {
        return Err(Error::invalid(format!(
            "tau_max must lie in [1, {}), got {tau_max}",
            values.len()
        )));
    }
    let scheme = BinningScheme::fit(values, bins)?;
    Ok((1..=tau_max)
        .map(|tau| {
            let lead = &values[tau..];
            let lag = &values[..values.len() - tau];
            (tau, mi_with(lead, lag, &scheme, &scheme))
        })
        .collect())
}
