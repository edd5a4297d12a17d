//! C ABI over the `dynrecon` library.
//!
//! Objects cross the boundary as opaque handles created by `dr_*_new` or a
//! computing function and released by the matching `dr_*_free`. Every fallible
//! call returns a [`DrStatus`]; on failure, [`dr_last_error_message`] describes
//! the problem for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dynrecon::estimators::ais::{atau_surface, DEFAULT_MAX_SAMPLES};
use dynrecon::estimators::ordinal::weighted_permutation_entropy;
use dynrecon::forecast::{rolling_evaluate, ForecastRun, Method};
use dynrecon::grid::SweepGrid;
use dynrecon::systems::{generate_map_trace, random_map_initial, Map, MapSpec};
use dynrecon::{Error, ScalarSeries};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Computation = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrMapKind {
    Henon = 0,
    Logistic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrForecastMethod {
    RandomWalk = 0,
    Naive = 1,
    Lma = 2,
    Ar = 3,
}

/// Scalar time series.
pub struct DrSeries(ScalarSeries);

/// Grid of sweep values over (m, tau).
pub struct DrGrid(SweepGrid);

/// Result of a rolling forecast evaluation.
pub struct DrForecastRun(ForecastRun);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DrStatus {
    match err {
        Error::Io(_) => DrStatus::Io,
        e if e.is_validation() => DrStatus::InvalidArgument,
        _ => DrStatus::Computation,
    }
}

fn guard<F: FnOnce() -> Result<(), DrStatus>>(f: F) -> DrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DrStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            DrStatus::Panic
        }
    }
}

fn lib<T>(r: dynrecon::Result<T>) -> Result<T, DrStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), DrStatus> {
    if p.is_null() {
        set_error(format!("null pointer: {name}"));
        Err(DrStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn slice<'a>(data: *const f64, len: usize) -> Result<&'a [f64], DrStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(data, "data")?;
    Ok(std::slice::from_raw_parts(data, len))
}

/// Message for the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn dr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` samples into a new series.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_series_new(data: *const f64, len: usize, out: *mut *mut DrSeries) -> DrStatus {
    guard(|| {
        non_null(out, "out")?;
        let values = slice(data, len)?.to_vec();
        let s = lib(ScalarSeries::new(values))?;
        *out = Box::into_raw(Box::new(DrSeries(s)));
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dr_series_free(series: *mut DrSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_series_len(series: *const DrSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// Borrowed view of the samples; valid while `series` lives.
///
/// # Safety
/// `series` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_series_data(series: *const DrSeries) -> *const f64 {
    series.as_ref().map_or(ptr::null(), |s| s.0.values().as_ptr())
}

/// Iterates a map for `n` samples after discarding `transient`, starting from
/// a seeded random initial condition. `r` is used by the logistic map only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_generate_map(
    kind: DrMapKind,
    r: f64,
    n: usize,
    transient: usize,
    seed: u64,
    out: *mut *mut DrSeries,
) -> DrStatus {
    guard(|| {
        non_null(out, "out")?;
        let map = match kind {
            DrMapKind::Henon => Map::henon(),
            DrMapKind::Logistic => Map::logistic(r),
        };
        let x0 = random_map_initial(&map, seed);
        let s = lib(generate_map_trace(&MapSpec { map, x0, n, transient }))?;
        *out = Box::into_raw(Box::new(DrSeries(s)));
        Ok(())
    })
}

/// Sweeps the time-delayed active information storage over the inclusive
/// ranges `[m_min, m_max] x [tau_min, tau_max]`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dr_atau_sweep(
    series: *const DrSeries,
    m_min: usize,
    m_max: usize,
    tau_min: usize,
    tau_max: usize,
    h: usize,
    k: usize,
    out: *mut *mut DrGrid,
) -> DrStatus {
    guard(|| {
        non_null(series, "series")?;
        non_null(out, "out")?;
        if m_min == 0 || tau_min == 0 || m_min > m_max || tau_min > tau_max || h == 0 || k == 0 {
            set_error("invalid sweep ranges".into());
            return Err(DrStatus::InvalidArgument);
        }
        let grid = atau_surface((*series).0.values(), m_min..=m_max, tau_min..=tau_max, h, k, DEFAULT_MAX_SAMPLES);
        *out = Box::into_raw(Box::new(DrGrid(grid)));
        Ok(())
    })
}

/// # Safety
/// `grid` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dr_grid_free(grid: *mut DrGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Value at (m, tau). Cells outside the grid or whose evaluation failed give
/// `DR_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `grid` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_grid_get(grid: *const DrGrid, m: usize, tau: usize, value: *mut f64) -> DrStatus {
    guard(|| {
        non_null(grid, "grid")?;
        non_null(value, "value")?;
        match (*grid).0.get(m, tau) {
            Some(v) => {
                *value = v;
                Ok(())
            }
            None => {
                set_error(format!("no value at m={m}, tau={tau}"));
                Err(DrStatus::InvalidArgument)
            }
        }
    })
}

/// Largest cell; ties go to the smallest m, then the smallest tau.
///
/// # Safety
/// `grid` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_grid_argmax(grid: *const DrGrid, m: *mut usize, tau: *mut usize, value: *mut f64) -> DrStatus {
    guard(|| {
        non_null(grid, "grid")?;
        non_null(m, "m")?;
        non_null(tau, "tau")?;
        non_null(value, "value")?;
        let cell = lib((*grid).0.argmax().ok_or(Error::EmptyGrid))?;
        *m = cell.m;
        *tau = cell.tau;
        *value = cell.value;
        Ok(())
    })
}

/// Rolling-origin forecast over the test part of `series` split at
/// `fraction`, in blocks of `h`. `m`, `tau` and `theiler` apply to
/// `DR_FORECAST_METHOD_LMA`; `m` is the order for `DR_FORECAST_METHOD_AR`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dr_forecast(
    series: *const DrSeries,
    method: DrForecastMethod,
    m: usize,
    tau: usize,
    theiler: usize,
    h: usize,
    fraction: f64,
    out: *mut *mut DrForecastRun,
) -> DrStatus {
    guard(|| {
        non_null(series, "series")?;
        non_null(out, "out")?;
        let method = match method {
            DrForecastMethod::RandomWalk => Method::RandomWalk,
            DrForecastMethod::Naive => Method::Naive,
            DrForecastMethod::Lma => Method::Lma { m, tau, theiler },
            DrForecastMethod::Ar => Method::Ar { order: m, refit_every: 1 },
        };
        let run = lib(rolling_evaluate((*series).0.values(), fraction, &method, h))?;
        *out = Box::into_raw(Box::new(DrForecastRun(run)));
        Ok(())
    })
}

/// # Safety
/// `run` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dr_forecast_free(run: *mut DrForecastRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// h-step mean absolute scaled error of the run, or NaN for a NULL handle.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dr_forecast_mase(run: *const DrForecastRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.0.score.value)
}

/// Borrowed predictions, aligned with the test part; valid while `run` lives.
///
/// # Safety
/// `run` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_forecast_predictions(run: *const DrForecastRun, len: *mut usize) -> *const f64 {
    match (run.as_ref(), len.as_mut()) {
        (Some(r), Some(l)) => {
            *l = r.0.predictions.len();
            r.0.predictions.as_ptr()
        }
        (_, l) => {
            if let Some(l) = l {
                *l = 0;
            }
            ptr::null()
        }
    }
}

/// Weighted permutation entropy with word length `ell`.
///
/// # Safety
/// `data` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dr_weighted_permutation_entropy(
    data: *const f64,
    len: usize,
    ell: usize,
    normalized: bool,
    out: *mut f64,
) -> DrStatus {
    guard(|| {
        non_null(out, "out")?;
        let values = slice(data, len)?;
        *out = lib(weighted_permutation_entropy(values, ell, normalized))?;
        Ok(())
    })
}
