//! Seeded experiment harness: sweeps over dimensions and sample sizes that
//! reproduce the behaviour of sample covariance matrices, flat CSV output
//! and power-law fits.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod output;
pub mod registry;

pub use config::{ExperimentConfig, Grid};
pub use error::{ExperimentError, Result};
pub use fit::{fit_exponent, fit_log2, Fit};
pub use output::{format_float, to_csv_string, write_csv, ResultRow, CSV_HEADER};
pub use registry::{Experiment, ExperimentOutput, Registry};
