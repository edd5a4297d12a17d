#ifndef DYNRECON_H
#define DYNRECON_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_POINTER = 1,
  DR_STATUS_INVALID_ARGUMENT = 2,
  DR_STATUS_COMPUTATION = 3,
  DR_STATUS_IO = 4,
  DR_STATUS_PANIC = 5,
} DrStatus;

typedef enum DrMapKind {
  DR_MAP_KIND_HENON = 0,
  DR_MAP_KIND_LOGISTIC = 1,
} DrMapKind;

typedef enum DrForecastMethod {
  DR_FORECAST_METHOD_RANDOM_WALK = 0,
  DR_FORECAST_METHOD_NAIVE = 1,
  DR_FORECAST_METHOD_LMA = 2,
  DR_FORECAST_METHOD_AR = 3,
} DrForecastMethod;

// Result of a rolling forecast evaluation.
typedef struct DrForecastRun DrForecastRun;

// Grid of sweep values over (m, tau).
typedef struct DrGrid DrGrid;

// Scalar time series.
typedef struct DrSeries DrSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer stays
// valid until the next call into this library from the same thread.
const char *dr_last_error_message(void);

// Copies `len` samples into a new series.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be writable.
enum DrStatus dr_series_new(const double *data, size_t len, struct DrSeries **out);

// # Safety
// `series` must be NULL or a handle from this library not yet freed.
void dr_series_free(struct DrSeries *series);

// # Safety
// `series` must be a live handle.
size_t dr_series_len(const struct DrSeries *series);

// Borrowed view of the samples; valid while `series` lives.
//
// # Safety
// `series` must be a live handle.
const double *dr_series_data(const struct DrSeries *series);

// Iterates a map for `n` samples after discarding `transient`, starting from
// a seeded random initial condition. `r` is used by the logistic map only.
//
// # Safety
// `out` must be writable.
enum DrStatus dr_generate_map(enum DrMapKind kind,
                              double r,
                              size_t n,
                              size_t transient,
                              uint64_t seed,
                              struct DrSeries **out);

// Sweeps the time-delayed active information storage over the inclusive
// ranges `[m_min, m_max] x [tau_min, tau_max]`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum DrStatus dr_atau_sweep(const struct DrSeries *series,
                            size_t m_min,
                            size_t m_max,
                            size_t tau_min,
                            size_t tau_max,
                            size_t h,
                            size_t k,
                            struct DrGrid **out);

// # Safety
// `grid` must be NULL or a handle from this library not yet freed.
void dr_grid_free(struct DrGrid *grid);

// Value at (m, tau). Cells outside the grid or whose evaluation failed give
// `DR_STATUS_INVALID_ARGUMENT`.
//
// # Safety
// `grid` must be a live handle; `value` must be writable.
enum DrStatus dr_grid_get(const struct DrGrid *grid, size_t m, size_t tau, double *value);

// Largest cell; ties go to the smallest m, then the smallest tau.
//
// # Safety
// `grid` must be a live handle; the output pointers must be writable.
enum DrStatus dr_grid_argmax(const struct DrGrid *grid, size_t *m, size_t *tau, double *value);

// Rolling-origin forecast over the test part of `series` split at
// `fraction`, in blocks of `h`. `m`, `tau` and `theiler` apply to
// `DR_FORECAST_METHOD_LMA`; `m` is the order for `DR_FORECAST_METHOD_AR`.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum DrStatus dr_forecast(const struct DrSeries *series,
                          enum DrForecastMethod method,
                          size_t m,
                          size_t tau,
                          size_t theiler,
                          size_t h,
                          double fraction,
                          struct DrForecastRun **out);

// # Safety
// `run` must be NULL or a handle from this library not yet freed.
void dr_forecast_free(struct DrForecastRun *run);

// h-step mean absolute scaled error of the run, or NaN for a NULL handle.
//
// # Safety
// `run` must be a live handle.
double dr_forecast_mase(const struct DrForecastRun *run);

// Borrowed predictions, aligned with the test part; valid while `run` lives.
//
// # Safety
// `run` must be a live handle; `len` must be writable.
const double *dr_forecast_predictions(const struct DrForecastRun *run, size_t *len);

// Weighted permutation entropy with word length `ell`.
//
// # Safety
// `data` must point to `len` readable doubles; `out` must be writable.
enum DrStatus dr_weighted_permutation_entropy(const double *data,
                                              size_t len,
                                              size_t ell,
                                              bool normalized,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNRECON_H */
