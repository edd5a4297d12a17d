use crate::error::{Error, Result};
use crate::series::{mean, variance};

/// Autocorrelation at lag `tau` normalized by the full-series variance:
/// `R(tau) = sum_j (x_j - mu)(x_{j-tau} - mu) / ((N - tau) sigma^2)`.
pub fn autocorrelation(values: &[f64], tau: usize) -> Result<f64> {
    let n = values.len();
    if tau >= n {
        return Err(Error::invalid(format!("lag {tau} must be below series length {n}")));
    }
    let var = variance(values);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mu = mean(values);
    let s: f64 = (tau..n)
        .map(|j| (values[j] - mu) * (values[j - tau] - mu))
        .sum();
    Ok(s / ((n - tau) as f64 * var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn lag_zero_is_one() {
        let v = [1.0, 3.0, 2.0, 5.0];
        assert!((autocorrelation(&v, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alternating_is_anticorrelated() {
        let v: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((autocorrelation(&v, 1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ar1_matches_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut x = 0.0;
        let v: Vec<f64> = (0..100_000)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x = 0.8 * x + e;
                x
            })
            .collect();
        let r = autocorrelation(&v, 3).unwrap();
        assert!((r - 0.512).abs() < 0.02, "r = {r}");
    }

    #[test]
    fn constant_is_error() {
        assert!(matches!(autocorrelation(&[2.0; 10], 1), Err(Error::ZeroVariance)));
    }
}
