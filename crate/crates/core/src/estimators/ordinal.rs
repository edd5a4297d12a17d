//! Ordinal patterns, permutation entropy and its variance-weighted variant.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// The ordering of a window of `ell` samples: `order[r]` is the (0-based)
/// position of the r-th smallest value. Equal values keep temporal order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrdinalPattern {
    order: Vec<u8>,
}

impl OrdinalPattern {
    pub fn from_window(window: &[f64]) -> Self {
        let mut order: Vec<u8> = (0..window.len() as u8).collect();
        // Stable sort: ties resolve to the earlier sample.
        order.sort_by(|&a, &b| window[a as usize].total_cmp(&window[b as usize]));
        Self { order }
    }

    pub fn ell(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[u8] {
        &self.order
    }

    /// Rank of each sample in the window (inverse of [`Self::order`]).
    pub fn ranks(&self) -> Vec<u8> {
        let mut r = vec![0u8; self.order.len()];
        for (rank, &pos) in self.order.iter().enumerate() {
            r[pos as usize] = rank as u8;
        }
        r
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    fn code(&self) -> u64 {
        self.order.iter().fold(0u64, |acc, &p| acc * self.order.len() as u64 + p as u64)
    }
}

impl fmt::Display for OrdinalPattern {
    /// One-based positions in ascending value order, e.g. `231`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.order {
            write!(f, "{}", p + 1)?;
        }
        Ok(())
    }
}

pub const MAX_WORD_LENGTH: usize = 8;

fn check(len: usize, ell: usize) -> Result<()> {
    if !(2..=MAX_WORD_LENGTH).contains(&ell) {
        return Err(Error::invalid(format!(
            "word length must lie in [2, {MAX_WORD_LENGTH}], got {ell}"
        )));
    }
    if len < ell {
        return Err(Error::SeriesTooShort {
            required: ell,
            actual: len,
        });
    }
    Ok(())
}

pub fn ordinal_patterns(values: &[f64], ell: usize) -> Result<Vec<OrdinalPattern>> {
    check(values.len(), ell)?;
    Ok(values.windows(ell).map(OrdinalPattern::from_window).collect())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn entropy_of_weights(mut w: Vec<f64>, ell: usize, normalized: bool) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    w.sort_by(f64::total_cmp);
    let h: f64 = w
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let p = x / total;
            -p * p.log2()
        })
        .sum();
    let h = h.max(0.0);
    if normalized {
        h / factorial(ell).log2()
    } else {
        h
    }
}

/// Shannon entropy (bits) of the ordinal-pattern distribution; optionally
/// divided by `log2(ell!)`.
pub fn permutation_entropy(values: &[f64], ell: usize, normalized: bool) -> Result<f64> {
    check(values.len(), ell)?;
    let mut counts: HashMap<u64, f64> = HashMap::new();
    for w in values.windows(ell) {
        *counts.entry(OrdinalPattern::from_window(w).code()).or_default() += 1.0;
    }
    Ok(entropy_of_weights(counts.into_values().collect(), ell, normalized))
}

/// Window weight: mean squared deviation from the window mean.
fn window_weight(w: &[f64]) -> f64 {
    let mu = w.iter().sum::<f64>() / w.len() as f64;
    w.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / w.len() as f64
}

/// Permutation entropy with each window weighted by its variance. A series
/// whose windows all have zero weight returns 0.
pub fn weighted_permutation_entropy(values: &[f64], ell: usize, normalized: bool) -> Result<f64> {
    check(values.len(), ell)?;
    let mut weights: HashMap<u64, f64> = HashMap::new();
    for w in values.windows(ell) {
        *weights.entry(OrdinalPattern::from_window(w).code()).or_default() += window_weight(w);
    }
    Ok(entropy_of_weights(weights.into_values().collect(), ell, normalized))
}

/// Largest word length with at least 100 samples per possible pattern,
/// clamped to `[2, 8]`.
pub fn choose_word_length(n: usize) -> usize {
    (2..=MAX_WORD_LENGTH)
        .filter(|&ell| n as f64 >= 100.0 * factorial(ell))
        .max()
        .unwrap_or(2)
}
