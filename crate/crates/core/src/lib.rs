//! Solvers and validation tools for the Kuznetsov, Westervelt, KZK and NPE models
//! of nonlinear acoustics.

pub mod ansatz_maps;
pub mod error;
pub mod full_models;
pub mod harness;
pub mod numerics;
pub mod params;
pub mod paraxial_models;
pub mod remainders;
pub mod series;

pub use error::{Error, Result};
pub use numerics::{AxisKind, AxisRole, AxisSpec, Field, GridSpec, MarchAxis, Trajectory};
pub use params::ModelParams;
pub use series::ErrorSeries;
