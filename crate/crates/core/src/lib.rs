//! Reconstruction, forecasting and topology toolkit for scalar time series.
//!
//! The crate is organized bottom-up:
//!
//! * [`systems`] generates benchmark traces from flows (RK4) and maps.
//! * [`series`] holds the scalar series container, delay reconstruction and
//!   train/test splitting, plus the plain-text series format.
//! * [`estimators`] covers binned entropies, the KSG mutual-information
//!   estimator, time-delayed active information storage, autocorrelation and
//!   (weighted) permutation entropy.
//! * [`embedding`] selects delay-reconstruction parameters.
//! * [`forecast`] and [`metrics`] implement the rolling forecast protocols
//!   and the h-step mean absolute scaled error.
//! * [`topology`] builds fuzzy witness complexes and their Betti numbers.
//! * [`cli`] ties everything into the `dynrecon` command-line tool.

pub mod cli;
pub mod embedding;
pub mod error;
pub mod estimators;
pub mod forecast;
pub mod grid;
pub mod metrics;
pub mod neighbors;
pub mod points;
pub mod series;
pub mod systems;
pub mod topology;

pub use error::{Error, Result};
pub use points::PointCloud;
pub use series::{delay_reconstruct, split, DelayReconstruction, ScalarSeries, TrainTestSplit};
