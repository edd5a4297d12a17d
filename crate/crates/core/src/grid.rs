//! Rectangular (m, tau) grids of sweep results.

use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub m_values: Vec<usize>,
    pub tau_values: Vec<usize>,
    cells: Vec<Option<f64>>,
    /// Per-cell failures as `(m, tau, message)`.
    pub failures: Vec<(usize, usize, String)>,
    /// Free-form `key=value` notes (subsampling stride and the like).
    pub metadata: Vec<(String, String)>,
}

/// A single grid cell picked out by [`SweepGrid::argmax`] or [`SweepGrid::argmin`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub m: usize,
    pub tau: usize,
    pub value: f64,
}

impl SweepGrid {
    pub fn empty(m_range: RangeInclusive<usize>, tau_range: RangeInclusive<usize>) -> Self {
        let m_values: Vec<usize> = m_range.collect();
        let tau_values: Vec<usize> = tau_range.collect();
        let n = m_values.len() * tau_values.len();
        Self {
            m_values,
            tau_values,
            cells: vec![None; n],
            failures: Vec::new(),
            metadata: Vec::new(),
        }
    }

    /// Evaluates `f` on every cell. Cells are independent and run on the
    /// current rayon pool; the stored order is always m-major.
    pub fn evaluate<F>(m_range: RangeInclusive<usize>, tau_range: RangeInclusive<usize>, f: F) -> Self
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let mut grid = Self::empty(m_range, tau_range);
        let coords: Vec<(usize, usize)> = grid.coords().collect();
        let results: Vec<Result<f64>> = coords.par_iter().map(|&(m, tau)| f(m, tau)).collect();
        for ((m, tau), r) in coords.into_iter().zip(results) {
            match r {
                Ok(v) if v.is_finite() => grid.set(m, tau, v),
                Ok(v) => grid.failures.push((m, tau, format!("non-finite value {v}"))),
                Err(e) => grid.failures.push((m, tau, e.to_string())),
            }
        }
        grid
    }

    /// Cell coordinates in canonical order (m, then tau).
    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.m_values
            .iter()
            .flat_map(move |&m| self.tau_values.iter().map(move |&t| (m, t)))
    }

    fn offset(&self, m: usize, tau: usize) -> Option<usize> {
        let i = self.m_values.iter().position(|&v| v == m)?;
        let j = self.tau_values.iter().position(|&v| v == tau)?;
        Some(i * self.tau_values.len() + j)
    }

    pub fn get(&self, m: usize, tau: usize) -> Option<f64> {
        self.offset(m, tau).and_then(|o| self.cells[o])
    }

    pub fn set(&mut self, m: usize, tau: usize, value: f64) {
        if let Some(o) = self.offset(m, tau) {
            self.cells[o] = Some(value);
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, Option<f64>)> + '_ {
        self.coords().zip(&self.cells).map(|((m, t), v)| (m, t, *v))
    }

    /// Largest cell; ties go to the smallest m, then the smallest tau.
    pub fn argmax(&self) -> Option<Cell> {
        self.extreme(|a, b| a > b)
    }

    /// Smallest cell; ties go to the smallest m, then the smallest tau.
    pub fn argmin(&self) -> Option<Cell> {
        self.extreme(|a, b| a < b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> Option<Cell> {
        let mut best: Option<Cell> = None;
        for (m, tau, v) in self.cells() {
            if let Some(value) = v {
                if best.is_none_or(|b| better(value, b.value)) {
                    best = Some(Cell { m, tau, value });
                }
            }
        }
        best
    }

    /// CSV with header `m,tau,value`; missing cells have an empty value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "m,tau,value")?;
        for (m, tau, v) in self.cells() {
            match v {
                Some(v) => writeln!(w, "{m},{tau},{v:.16e}")?,
                None => writeln!(w, "{m},{tau},")?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut metadata = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(meta) = t.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    metadata.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if !header_seen {
                if t != "m,tau,value" {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected header m,tau,value, found {t:?}"),
                    });
                }
                header_seen = true;
                continue;
            }
            let parse_err = |what: &str| Error::Parse {
                line: lineno + 1,
                message: format!("bad {what}"),
            };
            let mut f = t.split(',');
            let m: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("m"))?;
            let tau: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("tau"))?;
            let v = match f.next().map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<f64>().map_err(|_| parse_err("value"))?),
            };
            rows.push((m, tau, v));
        }
        let mut m_values: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let mut tau_values: Vec<usize> = rows.iter().map(|r| r.1).collect();
        m_values.sort_unstable();
        m_values.dedup();
        tau_values.sort_unstable();
        tau_values.dedup();
        let mut grid = Self {
            cells: vec![None; m_values.len() * tau_values.len()],
            m_values,
            tau_values,
            failures: Vec::new(),
            metadata,
        };
        for (m, tau, v) in rows {
            if let Some(v) = v {
                grid.set(m, tau, v);
            }
        }
        Ok(grid)
    }
}
