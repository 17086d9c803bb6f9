//! The KZK equation marched in depth and the NPE equation marched in slow time.
//!
//! KZK fields live on `T_tau x transverse` with axis 0 the retarded time; NPE fields on
//! `T_z x transverse` with axis 0 the moving-frame coordinate. Every transverse axis must
//! be periodic.

mod kzk;
mod march;
mod npe;

pub use kzk::{apply_kzk_operator, kzk_march, kzk_march_with, KzkState};
pub use march::{MarchOptions, MarchRun};
pub use npe::{apply_npe_operator, npe_march, npe_march_with, NpeState};

use crate::error::{Error, Result};
use crate::numerics::field::{MarchAxis, Trajectory};

/// Minimum frame count for the march-direction derivative in the residual operators.
pub const MIN_MARCH_FRAMES: usize = 7;

fn require_frames(traj: &Trajectory, axis: MarchAxis) -> Result<()> {
    if traj.march_axis() != axis {
        return Err(Error::InvalidParameter(format!(
            "expected a trajectory ordered by {}, got {}",
            axis.label(),
            traj.march_axis().label()
        )));
    }
    if traj.len() < MIN_MARCH_FRAMES {
        return Err(Error::InsufficientSamples {
            what: "march frames",
            needed: MIN_MARCH_FRAMES,
            got: traj.len(),
        });
    }
    for ax in 0..traj.grid().ndim() {
        traj.grid().require_periodic(ax)?;
    }
    Ok(())
}
