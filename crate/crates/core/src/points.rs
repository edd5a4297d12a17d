//! Dense point clouds stored row-major in a single buffer.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    /// Wraps a row-major buffer. `data.len()` must be a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: data.len() % dim,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(1);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(dim, data)
    }

    /// One-dimensional cloud with one point per value.
    pub fn from_scalars(values: &[f64]) -> Self {
        Self {
            dim: 1,
            data: values.to_vec(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Keeps the points at the given indices, in order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            data,
        }
    }

    /// Horizontal concatenation: point i of the result is `self[i] ++ other[i]`.
    pub fn join(&self, other: &PointCloud) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let dim = self.dim + other.dim;
        let mut data = Vec::with_capacity(self.len() * dim);
        for (a, b) in self.iter().zip(other.iter()) {
            data.extend_from_slice(a);
            data.extend_from_slice(b);
        }
        Ok(Self { dim, data })
    }

    /// Per-coordinate (min, max) over all points.
    pub fn bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.is_empty() {
            return None;
        }
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.iter() {
            for (bc, &v) in b.iter_mut().zip(p) {
                bc.0 = bc.0.min(v);
                bc.1 = bc.1.max(v);
            }
        }
        Some(b)
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bounding_box_diameter(&self) -> Option<f64> {
        self.bounds()
            .map(|b| b.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt())
    }

    /// Reads comma-separated coordinate rows; `#` lines are comments and the
    /// dimension is taken from the first data row.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut data = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut count = 0;
            for field in trimmed.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("cannot parse {:?} as a number", field.trim()),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "non-finite coordinate".into(),
                    });
                }
                data.push(v);
                count += 1;
            }
            match dim {
                None => dim = Some(count),
                Some(d) if d != count => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {d} coordinates, found {count}"),
                    })
                }
                _ => {}
            }
        }
        let dim = dim.ok_or(Error::EmptySeries)?;
        Self::from_flat(dim, data)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
