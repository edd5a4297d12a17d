//! h-step mean absolute scaled error.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaseScore {
    pub value: f64,
    pub h: usize,
    /// `k` times the mean in-sample h-step random-walk error of the training data.
    pub scaling_denominator: f64,
}

impl MaseScore {
    /// Orders two scores. Scores taken at different horizons are not comparable.
    pub fn compare(&self, other: &MaseScore) -> Result<Ordering> {
        if self.h != other.h {
            return Err(Error::invalid(format!(
                "cannot compare h-MASE at h = {} with h = {}",
                self.h, other.h
            )));
        }
        self.value
            .partial_cmp(&other.value)
            .ok_or_else(|| Error::invalid("score is NaN"))
    }
}

/// Mean over i of `sqrt(mean_{1<=s<=h} (x_i - x_{i+s})^2)` for i = 0..n-h.
pub fn in_sample_random_walk_error(train: &[f64], h: usize) -> Result<f64> {
    let n = train.len();
    if h == 0 {
        return Err(Error::invalid("h must be at least 1"));
    }
    if n <= h {
        return Err(Error::SeriesTooShort { required: h + 1, actual: n });
    }
    let total: f64 = (0..n - h)
        .map(|i| {
            let sq: f64 = (1..=h).map(|s| (train[i] - train[i + s]).powi(2)).sum();
            (sq / h as f64).sqrt()
        })
        .sum();
    Ok(total / (n - h) as f64)
}

/// Sum of absolute forecast errors scaled by `k` times the in-sample h-step
/// random-walk error of `train`.
pub fn h_mase(predictions: &[f64], truth: &[f64], train: &[f64], h: usize) -> Result<MaseScore> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: truth.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptySeries);
    }
    let scale = in_sample_random_walk_error(train, h)?;
    if scale == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let numerator: f64 = predictions.iter().zip(truth).map(|(p, c)| (p - c).abs()).sum();
    let scaling_denominator = truth.len() as f64 * scale;
    Ok(MaseScore { value: numerator / scaling_denominator, h, scaling_denominator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions_score_zero() {
        let train = [0.0, 1.0, 3.0, 2.0];
        let s = h_mase(&[4.0, 5.0], &[4.0, 5.0], &train, 2).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.h, 2);
    }

    #[test]
    fn alternating_train_half_score() {
        let train: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let truth: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let s = h_mase(&[0.5; 100], &truth, &train, 1).unwrap();
        assert_eq!(s.scaling_denominator, 100.0);
        assert_eq!(s.value, 0.5);
    }

    #[test]
    fn two_step_denominator_by_hand() {
        // i=0: sqrt((1 + 9)/2), i=1: sqrt((4 + 1)/2)
        let train = [0.0, 1.0, 3.0, 2.0];
        let expected = ((10.0f64 / 2.0).sqrt() + (5.0f64 / 2.0).sqrt()) / 2.0;
        assert!((in_sample_random_walk_error(&train, 2).unwrap() - expected).abs() < 1e-15);
        let s = h_mase(&[1.0], &[0.0], &train, 2).unwrap();
        assert!((s.value - 1.0 / expected).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(h_mase(&[1.0], &[1.0, 2.0], &[0.0, 1.0], 1), Err(Error::LengthMismatch { .. })));
        assert!(matches!(h_mase(&[], &[], &[0.0, 1.0], 1), Err(Error::EmptySeries)));
        assert!(matches!(h_mase(&[1.0], &[1.0], &[2.0; 10], 1), Err(Error::ZeroVariance)));
        assert!(matches!(h_mase(&[1.0], &[1.0], &[0.0, 1.0], 2), Err(Error::SeriesTooShort { .. })));
        assert!(h_mase(&[1.0], &[1.0], &[0.0, 1.0], 0).is_err());
    }

    #[test]
    fn cross_horizon_comparison_refused() {
        let a = MaseScore { value: 0.5, h: 1, scaling_denominator: 1.0 };
        let b = MaseScore { value: 0.7, h: 1, scaling_denominator: 1.0 };
        let c = MaseScore { value: 0.1, h: 2, scaling_denominator: 1.0 };
        assert_eq!(a.compare(&b).unwrap(), Ordering::Less);
        assert!(a.compare(&c).is_err());
    }

    fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (2usize..12).prop_flat_map(|k| {
            (
                prop::collection::vec(-10.0f64..10.0, 20..60),
                prop::collection::vec(-10.0f64..10.0, k),
                prop::collection::vec(-10.0f64..10.0, k),
            )
        })
    }

    proptest! {
        #[test]
        fn scale_invariant((train, pred, truth) in series(), c in 0.01f64..100.0, h in 1usize..5) {
            let a = h_mase(&pred, &truth, &train, h).unwrap();
            let scale = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
            let b = h_mase(&scale(&pred), &scale(&truth), &scale(&train), h).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-10 * a.value.max(1.0));
        }

        #[test]
        fn worsening_never_improves((train, pred, truth) in series(), idx in 0usize..12, step in 0.0f64..5.0) {
            let j = idx % pred.len();
            let before = h_mase(&pred, &truth, &train, 1).unwrap();
            let mut worse = pred.clone();
            let dir = if pred[j] >= truth[j] { 1.0 } else { -1.0 };
            worse[j] += dir * step;
            let after = h_mase(&worse, &truth, &train, 1).unwrap();
            prop_assert!(after.value >= before.value);
        }
    }
}
