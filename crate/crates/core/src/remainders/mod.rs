//! Remainder terms of the Kuznetsov-to-KZK, -NPE and -Westervelt reductions, and refinement
//! checks of the identities they complete.

mod identity;
mod residual;
mod terms;

pub use identity::{identity_check, IdentityKind, IdentityLevel, IdentityReport, Manufactured};
pub use residual::{ansatz_residual, residual_scaling, ResidualProbe};
pub use terms::{
    eval_r_kuz_kzk, eval_r_kuz_npe, eval_r_kuz_wes, eval_r_wes_kuz, WesKuzRemainder,
    MIN_REMAINDER_FRAMES,
};
