//! Three-variable information measures from binned joint histograms.

use crate::error::{Error, Result};

use super::binning::{joint_entropy_with, BinningScheme};

/// Interaction (co-)information, binding information (dual total correlation)
/// and total correlation, all in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleInfo {
    pub interaction: f64,
    pub binding: f64,
    pub total_correlation: f64,
}

pub fn triple_information(x: &[f64], y: &[f64], z: &[f64], bins: usize) -> Result<TripleInfo> {
    for other in [y.len(), z.len()] {
        if other != x.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: other,
            });
        }
    }
    let s = [
        BinningScheme::fit(x, bins)?,
        BinningScheme::fit(y, bins)?,
        BinningScheme::fit(z, bins)?,
    ];
    let h = |cols: &[&[f64]], idx: &[usize]| {
        let schemes: Vec<BinningScheme> = idx.iter().map(|&i| s[i]).collect();
        joint_entropy_with(cols, &schemes)
    };
    let singles = h(&[x], &[0]) + h(&[y], &[1]) + h(&[z], &[2]);
    let pairs = h(&[x, y], &[0, 1]) + h(&[x, z], &[0, 2]) + h(&[y, z], &[1, 2]);
    let all = h(&[x, y, z], &[0, 1, 2]);

    Ok(TripleInfo {
        // Positive for redundancy (x = y = z), negative for synergy (xor).
        interaction: singles - pairs + all,
        binding: (pairs - 2.0 * all).max(0.0),
        total_correlation: (singles - all).max(0.0),
    })
}
