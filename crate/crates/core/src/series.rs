//! Scalar series, delay-coordinate reconstruction and train/test splits.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::points::PointCloud;

/// A uniformly sampled, finite, non-empty observation sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    values: Vec<f64>,
    sample_interval: f64,
}

impl ScalarSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_interval(values, 1.0)
    }

    pub fn with_interval(values: Vec<f64>, sample_interval: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(Error::invalid("sample interval must be positive"));
        }
        Ok(Self {
            values,
            sample_interval,
        })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with slices.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Population variance about the series mean.
    pub fn variance(&self) -> f64 {
        variance(&self.values)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let mu = mean(v);
    v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64
}

/// Delay vectors `[x_j, x_{j-tau}, ..., x_{j-(m-1)tau}]` for every `j` from
/// `(m-1)*tau` to the end of the source series.
#[derive(Debug, Clone)]
pub struct DelayReconstruction {
    m: usize,
    tau: usize,
    points: PointCloud,
    source_length: usize,
}

impl DelayReconstruction {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.point(i)
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn into_points(self) -> PointCloud {
        self.points
    }

    /// Index into the source series of the leading coordinate of point `i`.
    pub fn anchor(&self, i: usize) -> usize {
        i + (self.m - 1) * self.tau
    }
}

/// Minimum series length that supports a reconstruction with `(m, tau)`.
pub fn min_length(m: usize, tau: usize) -> usize {
    (m - 1) * tau + 1
}

pub fn delay_reconstruct(series: &ScalarSeries, m: usize, tau: usize) -> Result<DelayReconstruction> {
    reconstruct_values(series.values(), m, tau)
}

/// [`delay_reconstruct`] on a raw slice.
pub fn reconstruct_values(values: &[f64], m: usize, tau: usize) -> Result<DelayReconstruction> {
    if m == 0 {
        return Err(Error::invalid("embedding dimension m must be at least 1"));
    }
    if tau == 0 {
        return Err(Error::invalid("delay tau must be at least 1"));
    }
    let required = min_length(m, tau);
    if values.len() < required {
        return Err(Error::SeriesTooShort {
            required,
            actual: values.len(),
        });
    }
    let span = (m - 1) * tau;
    let count = values.len() - span;
    let mut data = Vec::with_capacity(count * m);
    for j in span..values.len() {
        for c in 0..m {
            data.push(values[j - c * tau]);
        }
    }
    Ok(DelayReconstruction {
        m,
        tau,
        points: PointCloud::from_flat(m, data)?,
        source_length: values.len(),
    })
}

#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train: ScalarSeries,
    pub test: ScalarSeries,
    pub fraction: f64,
}

/// Contiguous prefix/suffix split with `floor(fraction * N)` training samples.
pub fn split(series: &ScalarSeries, fraction: f64) -> Result<TrainTestSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = series.len();
    let n_train = split_point(n, fraction);
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!(
            "split of {n} samples at {fraction} leaves an empty part"
        )));
    }
    let dt = series.sample_interval();
    Ok(TrainTestSplit {
        train: ScalarSeries::with_interval(series.values()[..n_train].to_vec(), dt)?,
        test: ScalarSeries::with_interval(series.values()[n_train..].to_vec(), dt)?,
        fraction,
    })
}

pub(crate) fn split_point(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).floor() as usize
}

/// Parses the plain-text series format: one value per line, `#` comments.
pub fn read_series<R: BufRead>(reader: R) -> Result<ScalarSeries> {
    let mut values = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("cannot parse {trimmed:?} as a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: "non-finite value".into(),
            });
        }
        values.push(v);
    }
    ScalarSeries::new(values)
}

pub fn load_series(path: impl AsRef<Path>) -> Result<ScalarSeries> {
    let file = std::fs::File::open(path)?;
    read_series(std::io::BufReader::new(file))
}

/// Writes `# `-prefixed header lines followed by one value per line with 17
/// significant digits.
pub fn write_series<W: Write>(mut w: W, series: &ScalarSeries, header: &[String]) -> Result<()> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    for v in series.values() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}
