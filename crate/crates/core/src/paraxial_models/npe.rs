use crate::error::Result;
use crate::numerics::calculus::laplacian;
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::spectral::spectral_derivative;
use crate::params::ModelParams;

use super::march::{self, check_mean_zero, Coefficients, MarchOptions, MarchRun};
use super::require_frames;

/// An NPE slice `xi(z, y)` at slow time `tau`.
#[derive(Clone, Debug)]
pub struct NpeState {
    xi: Field,
    tau: f64,
}

impl NpeState {
    pub fn new(xi: Field, tau: f64) -> Result<Self> {
        check_mean_zero(&xi)?;
        Ok(NpeState { xi, tau })
    }

    pub fn xi(&self) -> &Field {
        &self.xi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn from_trajectory(traj: &Trajectory, i: usize) -> Result<Self> {
        NpeState::new(traj.frame(i).clone(), traj.position(i))
    }
}

pub(crate) fn coefficients(p: &ModelParams) -> Coefficients {
    Coefficients {
        advection: -(p.gamma + 1.0) * p.c / (4.0 * p.rho0),
        diffusion: p.nu / (2.0 * p.rho0),
        diffraction: -p.c / 2.0,
    }
}

/// Marches `xi_tau = -(gamma+1)c/(4 rho0) d_z(xi^2) + nu/(2 rho0) xi_zz - (c/2) d_z^{-1} Lap_y xi`
/// from `tau = 0` to `range` in steps of `dtau`.
pub fn npe_march(params: &ModelParams, xi0: &Field, dtau: f64, range: f64) -> Result<Trajectory> {
    Ok(npe_march_with(params, xi0, dtau, range, &MarchOptions::default())?.trajectory)
}

pub fn npe_march_with(
    params: &ModelParams,
    xi0: &Field,
    dtau: f64,
    range: f64,
    opts: &MarchOptions,
) -> Result<MarchRun> {
    params.validate()?;
    march::march(
        xi0,
        coefficients(params),
        dtau,
        range,
        params.rho0,
        MarchAxis::SlowTime,
        opts,
    )
}

/// `xi_{tau z} + (gamma+1)c/(4 rho0) (xi^2)_{zz} - nu/(2 rho0) xi_zzz + (c/2) Lap_y xi`
/// per frame of a slow-time trajectory.
pub fn apply_npe_operator(traj: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require_frames(traj, MarchAxis::SlowTime)?;
    let c = params.c;
    let transverse: Vec<usize> = (1..traj.grid().ndim()).collect();
    let xt = time_derivative_series(traj, 1)?;
    let frames = traj
        .frames()
        .iter()
        .zip(xt.frames())
        .map(|(x, x_tau)| {
            let mut r = spectral_derivative(x_tau, 0, 1)?;
            let sq = x.mul(x)?;
            r.axpy(
                (params.gamma + 1.0) * c / (4.0 * params.rho0),
                &spectral_derivative(&sq, 0, 2)?,
            )?;
            r.axpy(
                -params.nu / (2.0 * params.rho0),
                &spectral_derivative(x, 0, 3)?,
            )?;
            if !transverse.is_empty() {
                r.axpy(c / 2.0, &laplacian(x, &transverse)?)?;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    traj.with_frames(frames)
}
