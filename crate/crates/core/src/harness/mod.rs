//! Experiment orchestration: configuration, the E1-E4 comparisons, eps sweeps, fits and
//! persistence.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentId, Horizon, Mismatch, ModelKind, ACCEPTED_KEYS};
pub use experiments::{run_comparison, run_dispersion, run_identity, Comparison, DispersionRow};
pub use fit::{fit_envelope, fit_order, FitResult};
pub use io::{read_error_series, write_error_series, Manifest};
pub use sweep::{run_sweep, SweepPoint, SweepResult};
