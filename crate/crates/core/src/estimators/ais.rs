//! Time-delayed active information storage: KSG mutual information between
//! a delay vector and the observation `h` steps ahead.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::grid::SweepGrid;
use crate::points::PointCloud;
use crate::series::{reconstruct_values, variance};

use super::binning::{shannon_entropy_binned, BinningScheme, DEFAULT_BINS_1D};
use super::ksg::ksg_mutual_information;

/// Cap on joint samples per sweep cell; longer inputs are strided uniformly.
pub const DEFAULT_MAX_SAMPLES: usize = 20_000;

/// Delay vectors `[x_j, x_{j-tau}, ...]` paired with `x_{j+h}` for every `j`
/// where both exist.
pub fn delay_future_pairs(values: &[f64], m: usize, tau: usize, h: usize) -> Result<(PointCloud, Vec<f64>)> {
    if h == 0 {
        return Err(Error::invalid("prediction horizon h must be at least 1"));
    }
    if m == 0 || tau == 0 {
        return Err(Error::invalid("m and tau must be at least 1"));
    }
    let span = (m - 1) * tau;
    let required = span + h + 1;
    if values.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: values.len(),
        });
    }
    let rec = reconstruct_values(&values[..values.len() - h], m, tau)?;
    let future = values[span + h..].to_vec();
    debug_assert_eq!(rec.len(), future.len());
    Ok((rec.into_points(), future))
}

/// General (state) form: KSG MI between arbitrary state points and a scalar future.
pub fn state_active_information_storage(states: &PointCloud, future: &[f64], k: usize) -> Result<f64> {
    ksg_mutual_information(states, &PointCloud::from_scalars(future), k)
}

pub fn active_information_storage(values: &[f64], m: usize, tau: usize, h: usize, k: usize) -> Result<f64> {
    let (states, future) = delay_future_pairs(values, m, tau, h)?;
    state_active_information_storage(&states, &future, k)
}

/// As [`active_information_storage`] but keeping at most `max_samples` pairs
/// taken at a uniform stride. Returns the value and the stride used.
pub fn active_information_storage_capped(
    values: &[f64],
    m: usize,
    tau: usize,
    h: usize,
    k: usize,
    max_samples: usize,
) -> Result<(f64, usize)> {
    let (states, future) = delay_future_pairs(values, m, tau, h)?;
    let stride = future.len().div_ceil(max_samples.max(1)).max(1);
    if stride == 1 {
        return Ok((state_active_information_storage(&states, &future, k)?, 1));
    }
    let keep: Vec<usize> = (0..future.len()).step_by(stride).collect();
    let sub_future: Vec<f64> = keep.iter().map(|&i| future[i]).collect();
    let v = state_active_information_storage(&states.select(&keep), &sub_future, k)?;
    Ok((v, stride))
}

/// A_tau over a rectangular (m, tau) grid. Invalid cells are left missing
/// and recorded in the grid's failure list.
pub fn atau_surface(
    values: &[f64],
    m_range: RangeInclusive<usize>,
    tau_range: RangeInclusive<usize>,
    h: usize,
    k: usize,
    max_samples: usize,
) -> SweepGrid {
    let strides = std::sync::Mutex::new(Vec::new());
    let mut grid = SweepGrid::evaluate(m_range, tau_range, |m, tau| {
        let (v, stride) = active_information_storage_capped(values, m, tau, h, k, max_samples)?;
        strides.lock().unwrap().push(stride);
        Ok(v)
    });
    let max_stride = strides.into_inner().unwrap().into_iter().max().unwrap_or(1);
    grid.metadata.push(("quantity".into(), "atau_bits".into()));
    grid.metadata.push(("h".into(), h.to_string()));
    grid.metadata.push(("k".into(), k.to_string()));
    grid.metadata.push(("max_samples".into(), max_samples.to_string()));
    grid.metadata.push(("max_subsample_stride".into(), max_stride.to_string()));
    grid
}

/// `R(h) = A_tau(h) / H[X_{j+h}]` for h = 1..=h_max, with the denominator a
/// 64-bin entropy of the future samples actually paired.
pub fn horizon_info_ratio(values: &[f64], m: usize, tau: usize, h_max: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    if h_max == 0 {
        return Err(Error::invalid("h_max must be at least 1"));
    }
    if variance(values) == 0.0 {
        return Err(Error::Degenerate(
            "constant series has zero entropy; the ratio is undefined".into(),
        ));
    }
    (1..=h_max)
        .map(|h| {
            let (states, future) = delay_future_pairs(values, m, tau, h)?;
            let a = state_active_information_storage(&states, &future, k)?;
            let hf = shannon_entropy_binned(&future, &BinningScheme::fit(&future, DEFAULT_BINS_1D)?);
            if hf == 0.0 {
                return Err(Error::Degenerate(format!("future entropy is zero at h = {h}")));
            }
            Ok((h, a / hf))
        })
        .collect()
}
