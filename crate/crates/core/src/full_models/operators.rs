//! Residual operators of the exact models evaluated on stored trajectories.

use crate::error::{Error, Result};
use crate::numerics::calculus::{all_axes, grad_dot, laplacian};
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{MarchAxis, Trajectory};
use crate::params::ModelParams;

/// Minimum frame count for the nested time derivatives below.
pub const MIN_FRAMES: usize = 7;

pub(crate) fn require_time_frames(traj: &Trajectory) -> Result<()> {
    if traj.march_axis() != MarchAxis::Time {
        return Err(Error::InvalidParameter(format!(
            "expected a time trajectory, got one ordered by {}",
            traj.march_axis().label()
        )));
    }
    if traj.len() < MIN_FRAMES {
        return Err(Error::InsufficientSamples {
            what: "trajectory frames",
            needed: MIN_FRAMES,
            got: traj.len(),
        });
    }
    Ok(())
}

/// `u_tt - c^2 Lap u - eps d_t(|grad u|^2 + (gamma-1)/(2c^2) u_t^2 + (nu/rho0) Lap u)` per frame.
pub fn apply_kuznetsov_operator(traj: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require_time_frames(traj)?;
    let axes = all_axes(traj.frame(0));
    let c2 = params.c * params.c;
    let ut = time_derivative_series(traj, 1)?;
    let utt = time_derivative_series(traj, 2)?;
    let lap = traj.map_frames(|f| laplacian(f, &axes))?;
    let flux = traj.zip_frames(&ut, |u, v| {
        let mut q = grad_dot(u, u, &axes)?;
        q.axpy(1.0, &v.map(|x| (params.gamma - 1.0) / (2.0 * c2) * x * x))?;
        Ok(q)
    })?;
    let flux = flux.zip_frames(&lap, |q, l| {
        let mut q = q.clone();
        q.axpy(params.visc(), l)?;
        Ok(q)
    })?;
    let flux_t = time_derivative_series(&flux, 1)?;
    let frames = (0..traj.len())
        .map(|i| {
            let mut r = utt.frame(i).clone();
            r.axpy(-c2, lap.frame(i))?;
            r.axpy(-params.eps, flux_t.frame(i))?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    traj.with_frames(frames)
}

/// `p_tt - c^2 Lap p - eps d_t((nu/rho0) Lap p + (gamma+1)/(2c^2) p_t^2)` per frame.
pub fn apply_westervelt_operator(traj: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require_time_frames(traj)?;
    let axes = all_axes(traj.frame(0));
    let c2 = params.c * params.c;
    let pt = time_derivative_series(traj, 1)?;
    let ptt = time_derivative_series(traj, 2)?;
    let lap = traj.map_frames(|f| laplacian(f, &axes))?;
    let flux = pt.zip_frames(&lap, |v, l| {
        let mut q = v.map(|x| (params.gamma + 1.0) / (2.0 * c2) * x * x);
        q.axpy(params.visc(), l)?;
        Ok(q)
    })?;
    let flux_t = time_derivative_series(&flux, 1)?;
    let frames = (0..traj.len())
        .map(|i| {
            let mut r = ptt.frame(i).clone();
            r.axpy(-c2, lap.frame(i))?;
            r.axpy(-params.eps, flux_t.frame(i))?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    traj.with_frames(frames)
}
