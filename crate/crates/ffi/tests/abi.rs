use std::ffi::CStr;
use std::ptr;

use dynrecon_ffi::*;

fn last_error() -> String {
    let p = dr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn series_round_trip() {
    let data = [1.0, 2.0, 3.5];
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(dr_series_new(data.as_ptr(), data.len(), &mut s), DrStatus::Ok);
        assert_eq!(dr_series_len(s), 3);
        assert_eq!(std::slice::from_raw_parts(dr_series_data(s), 3), &data);
        dr_series_free(s);
    }
    assert!(dr_last_error_message().is_null());
}

#[test]
fn invalid_input_sets_status_and_message() {
    let data = [1.0, f64::NAN];
    let mut s = ptr::null_mut();
    let status = unsafe { dr_series_new(data.as_ptr(), 2, &mut s) };
    assert_eq!(status, DrStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("non-finite"));

    let status = unsafe { dr_series_new(data.as_ptr(), 2, ptr::null_mut()) };
    assert_eq!(status, DrStatus::NullPointer);
    assert!(last_error().contains("out"));
}

#[test]
fn henon_sweep_picks_two_one() {
    let mut s = ptr::null_mut();
    let mut g = ptr::null_mut();
    let (mut m, mut tau, mut v) = (0usize, 0usize, 0.0f64);
    unsafe {
        assert_eq!(dr_generate_map(DrMapKind::Henon, 0.0, 3000, 500, 1, &mut s), DrStatus::Ok);
        assert_eq!(dr_atau_sweep(s, 1, 3, 1, 3, 1, 4, &mut g), DrStatus::Ok);
        assert_eq!(dr_grid_argmax(g, &mut m, &mut tau, &mut v), DrStatus::Ok);
        let mut at = 0.0;
        assert_eq!(dr_grid_get(g, 2, 1, &mut at), DrStatus::Ok);
        assert_eq!(at, v);
        assert_eq!(dr_grid_get(g, 9, 1, &mut at), DrStatus::InvalidArgument);
        assert_eq!(dr_atau_sweep(s, 3, 1, 1, 1, 1, 4, &mut g), DrStatus::InvalidArgument);
        dr_grid_free(g);
        dr_series_free(s);
    }
    assert_eq!((m, tau), (2, 1));
    assert!(v > 0.0);
}

#[test]
fn forecast_handles() {
    let data: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut s = ptr::null_mut();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(dr_series_new(data.as_ptr(), data.len(), &mut s), DrStatus::Ok);
        assert_eq!(dr_forecast(s, DrForecastMethod::Lma, 2, 1, 0, 1, 0.8, &mut run), DrStatus::Ok);
        let mut len = 0;
        let p = dr_forecast_predictions(run, &mut len);
        assert_eq!(len, 40);
        assert!(!p.is_null());
        assert!(dr_forecast_mase(run) < 0.5);
        dr_forecast_free(run);

        let status = dr_forecast(s, DrForecastMethod::Lma, 0, 1, 0, 1, 0.8, &mut run);
        assert_eq!(status, DrStatus::InvalidArgument);
        dr_series_free(s);
    }
}

#[test]
fn wpe_and_computation_errors() {
    let ramp: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let mut w = f64::NAN;
    unsafe {
        assert_eq!(dr_weighted_permutation_entropy(ramp.as_ptr(), ramp.len(), 3, true, &mut w), DrStatus::Ok);
    }
    assert_eq!(w, 0.0);

    let flat = vec![1.0; 50];
    let mut s = ptr::null_mut();
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(dr_series_new(flat.as_ptr(), flat.len(), &mut s), DrStatus::Ok);
        assert_eq!(dr_forecast(s, DrForecastMethod::RandomWalk, 1, 1, 0, 1, 0.8, &mut run), DrStatus::Computation);
        dr_series_free(s);
    }
    assert!(run.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn header_declares_the_api() {
    let header = include_str!("../include/dynrecon.h");
    for name in ["dr_series_new", "dr_atau_sweep", "dr_forecast_free", "dr_last_error_message", "DR_STATUS_OK", "DrSeries"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
