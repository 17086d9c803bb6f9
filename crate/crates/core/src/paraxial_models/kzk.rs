use crate::error::Result;
use crate::numerics::calculus::laplacian;
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::spectral::spectral_derivative;
use crate::params::ModelParams;

use super::march::{self, check_mean_zero, Coefficients, MarchOptions, MarchRun};
use super::require_frames;

/// A KZK slice `I(tau, y)` at depth `z`.
#[derive(Clone, Debug)]
pub struct KzkState {
    intensity: Field,
    z: f64,
}

impl KzkState {
    pub fn new(intensity: Field, z: f64) -> Result<Self> {
        check_mean_zero(&intensity)?;
        Ok(KzkState { intensity, z })
    }

    pub fn intensity(&self) -> &Field {
        &self.intensity
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// The state recorded at frame `i` of a depth march.
    pub fn from_trajectory(traj: &Trajectory, i: usize) -> Result<Self> {
        KzkState::new(traj.frame(i).clone(), traj.position(i))
    }
}

pub(crate) fn coefficients(p: &ModelParams) -> Coefficients {
    Coefficients {
        advection: (p.gamma + 1.0) / (4.0 * p.rho0 * p.c),
        diffusion: p.nu / (2.0 * p.c.powi(3) * p.rho0),
        diffraction: p.c / 2.0,
    }
}

/// Marches `c I_z = (gamma+1)/(4 rho0) d_tau(I^2) + nu/(2 c^2 rho0) I_tautau + (c^2/2) d_tau^{-1} Lap_y I`
/// from `z = 0` to `range` in steps of `dz`.
pub fn kzk_march(params: &ModelParams, i0: &Field, dz: f64, range: f64) -> Result<Trajectory> {
    Ok(kzk_march_with(params, i0, dz, range, &MarchOptions::default())?.trajectory)
}

pub fn kzk_march_with(
    params: &ModelParams,
    i0: &Field,
    dz: f64,
    range: f64,
    opts: &MarchOptions,
) -> Result<MarchRun> {
    params.validate()?;
    march::march(
        i0,
        coefficients(params),
        dz,
        range,
        params.rho0,
        MarchAxis::Depth,
        opts,
    )
}

/// `c I_{tau z} - (gamma+1)/(4 rho0) (I^2)_{tau tau} - nu/(2 c^2 rho0) I_{tau tau tau} - (c^2/2) Lap_y I`
/// per frame of a depth trajectory.
pub fn apply_kzk_operator(traj: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require_frames(traj, MarchAxis::Depth)?;
    let c = params.c;
    let transverse: Vec<usize> = (1..traj.grid().ndim()).collect();
    let iz = time_derivative_series(traj, 1)?;
    let frames = traj
        .frames()
        .iter()
        .zip(iz.frames())
        .map(|(i, i_z)| {
            let mut r = spectral_derivative(i_z, 0, 1)?.scaled(c);
            let sq = i.mul(i)?;
            r.axpy(
                -(params.gamma + 1.0) / (4.0 * params.rho0),
                &spectral_derivative(&sq, 0, 2)?,
            )?;
            r.axpy(
                -params.nu / (2.0 * c * c * params.rho0),
                &spectral_derivative(i, 0, 3)?,
            )?;
            if !transverse.is_empty() {
                r.axpy(-c * c / 2.0, &laplacian(i, &transverse)?)?;
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    traj.with_frames(frames)
}
