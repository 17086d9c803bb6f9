use std::path::PathBuf;

/// Errors raised by grids, solvers, builders and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} is {found}, operation requires a {expected} axis")]
    UnsupportedAxis {
        axis: usize,
        expected: &'static str,
        found: &'static str,
    },

    #[error("not enough samples: need at least {needed}, got {got} ({what})")]
    InsufficientSamples {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mean-zero violation along axis {axis}: |mean| = {mean:e} exceeds {limit:e}")]
    MeanViolation { axis: usize, mean: f64, limit: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quasilinear factor {factor:.4} left [0.25, 4] at t = {time:.6}")]
    Degeneracy { factor: f64, time: f64 },

    #[error("incompatible initial/boundary data: {0}")]
    Compatibility(String),

    #[error("nonlinear regime: norm grew from {initial:e} to {current:e} at march position {position:.6}")]
    BlowUp {
        initial: f64,
        current: f64,
        position: f64,
    },

    #[error("initial data too large: H^2 norm {norm:e} exceeds the smallness gate {gate:e}")]
    SmallnessGate { norm: f64, gate: f64 },

    #[error(
        "periodic regime not reached after {periods} periods (last change {change:e}, tol {tol:e})"
    )]
    RegimeNotReached {
        periods: usize,
        change: f64,
        tol: f64,
    },

    #[error("march range exceeded: requested {requested:.6}, marched up to {available:.6}")]
    OutOfRange { requested: f64, available: f64 },

    #[error("fixed-point inversion failed: {0}")]
    InversionFailure(String),

    #[error("identity violation: {0}")]
    IdentityViolation(String),

    #[error("invalid fit input: {0}")]
    FitInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{stage} failed at eps = {eps}: {source}")]
    Stage {
        stage: String,
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps a solver failure with the experiment stage and the eps it ran at.
    pub fn at_stage(self, stage: impl Into<String>, eps: f64) -> Error {
        Error::Stage {
            stage: stage.into(),
            eps,
            source: Box::new(self),
        }
    }

    /// True for failures raised by a solver while integrating (as opposed to bad input).
    pub fn is_solver_abort(&self) -> bool {
        match self {
            Error::Degeneracy { .. }
            | Error::NonFinite(_)
            | Error::BlowUp { .. }
            | Error::RegimeNotReached { .. }
            | Error::InversionFailure(_)
            | Error::IdentityViolation(_) => true,
            Error::Stage { source, .. } => source.is_solver_abort(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
