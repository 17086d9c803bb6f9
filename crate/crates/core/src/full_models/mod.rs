//! The exact models: Kuznetsov and Westervelt operators, steppers, and the discrepancy energy.

pub mod energy;
pub mod ibvp;
pub mod ivp;
pub mod operators;
pub mod periodic;
pub mod stepper;

pub use energy::{discrepancy_energy, discrepancy_energy_within};
pub use ibvp::{solve_ibvp, solve_kuznetsov_ibvp, BoundaryData, IbvpOptions, SpongeConfig};
pub use ivp::{solve_ivp, solve_kuznetsov_ivp, solve_westervelt_ivp};
pub use operators::{apply_kuznetsov_operator, apply_westervelt_operator};
pub use periodic::{extract_periodic_regime, PeriodicRegime, PeriodicRegimeOptions};
pub use stepper::{StepperOptions, WaveModel};
