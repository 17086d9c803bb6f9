//! Grids, fields and the discrete calculus shared by every solver.

pub mod banded;
pub mod calculus;
pub mod fd;
pub mod field;
pub mod grid;
pub mod norm;
pub mod snapshot;
pub mod spectral;

pub use calculus::{derivative, grad_dot, gradient, laplacian};
pub use fd::{fd_derivative, time_derivative_series};
pub use field::{Field, MarchAxis, Trajectory};
pub use grid::{make_grid, AxisKind, AxisRole, AxisSpec, Grid, GridSpec};
pub use norm::{hs_norm, l2_norm, l2_norm_all, l2_norm_modes, rms};
pub use spectral::{antiderivative_mean_zero, dealias, spectral_derivative};
