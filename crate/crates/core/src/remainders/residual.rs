//! Kuznetsov residual of fields composed from reduced-model solutions, for measuring how
//! the residual scales with `eps`.

use std::f64::consts::PI;

use crate::ansatz_maps::{westervelt_initial_data, westervelt_inverse};
use crate::error::Result;
use crate::full_models::{apply_kuznetsov_operator, solve_ivp, StepperOptions, WaveModel};
use crate::numerics::field::Field;
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::norm::rms;
use crate::numerics::spectral::antiderivative_mean_zero;
use crate::params::ModelParams;
use crate::paraxial_models::{kzk_march, npe_march};

use super::identity::{kzk_pullback, npe_pullback, IdentityKind, PULLBACK_FRAMES};

/// Resolution and data amplitude of a residual probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualProbe {
    /// Points along the periodic slow coordinate (KZK, NPE) or along `x1` (Westervelt).
    pub points: usize,
    pub transverse_points: usize,
    /// Data amplitude; `None` picks a per-kind default scaled to the medium, inside the
    /// paraxial smallness gate and the range where the Westervelt inversion contracts.
    pub amplitude: Option<f64>,
}

impl Default for ResidualProbe {
    fn default() -> Self {
        ResidualProbe {
            points: 128,
            transverse_points: 16,
            amplitude: None,
        }
    }
}

fn slow_grid(period: f64, probe: &ResidualProbe, role: AxisRole) -> Result<GridSpec> {
    GridSpec::new(vec![
        AxisSpec::periodic(period, probe.points, role),
        AxisSpec::periodic(2.0 * PI, probe.transverse_points, AxisRole::Transverse),
    ])
}

/// RMS over the physical grid of `Kuz(u)` for the field `u` the ansatz of `kind` builds
/// from a reduced-model solution at `params.eps`.
///
/// KZK and NPE solutions are marched on the lattice that makes the ansatz land exactly on
/// grid nodes. For the Westervelt kinds `u` is the Kuznetsov-side field recovered from a
/// Westervelt solution.
pub fn ansatz_residual(
    kind: IdentityKind,
    params: &ModelParams,
    probe: &ResidualProbe,
) -> Result<f64> {
    params.validate()?;
    let (c, rho0, eps) = (params.c, params.rho0, params.eps);
    match kind {
        IdentityKind::Kzk => {
            let a = probe.amplitude.unwrap_or(1e-3);
            let sg = slow_grid(1.0, probe, AxisRole::TimeLike)?;
            let i0 = Field::from_fn(&sg, |x| {
                a * (2.0 * PI * x[0]).sin() * (1.0 + 0.5 * x[1].cos())
            });
            let dz = eps * c * sg.axis(0).spacing();
            let rows = probe.points / 4;
            let i = kzk_march(params, &i0, dz, rows as f64 * dz)?;
            let k = c * c / rho0;
            let phi = i.map_frames(|f| Ok(antiderivative_mean_zero(f, 0)?.scaled(k)))?;
            Ok(rms(&kzk_pullback(&phi, params)?.lhs))
        }
        IdentityKind::Npe => {
            let a = probe.amplitude.unwrap_or(5e-3 * rho0);
            let sg = slow_grid(2.0 * PI, probe, AxisRole::Propagation)?;
            let xi0 = Field::from_fn(&sg, |x| a * x[0].sin() * (1.0 + 0.5 * x[1].cos()));
            let dtau = eps * sg.axis(0).spacing() / c;
            let steps = PULLBACK_FRAMES - 1;
            let xi = npe_march(params, &xi0, dtau, steps as f64 * dtau)?;
            let k = -c / rho0;
            let psi = xi.map_frames(|f| Ok(antiderivative_mean_zero(f, 0)?.scaled(k)))?;
            Ok(rms(&npe_pullback(&psi, params)?.lhs))
        }
        IdentityKind::Wes | IdentityKind::WesKuz => {
            let a = probe.amplitude.unwrap_or(0.2 * c * c * rho0);
            let grid = GridSpec::new(vec![
                AxisSpec::periodic(2.0 * PI, probe.points, AxisRole::Propagation),
                AxisSpec::periodic(2.0 * PI, probe.transverse_points, AxisRole::Transverse),
            ])?;
            let u0 = Field::from_fn(&grid, |x| a * x[0].sin() * (1.0 + 0.5 * x[1].cos()));
            let u1 = Field::zeros(&grid);
            let (p0, p1) = westervelt_initial_data(&u0, &u1, params)?;
            let dt = 1e-3;
            let pi = solve_ivp(
                WaveModel::Westervelt,
                params,
                &p0,
                &p1,
                dt,
                0.2,
                StepperOptions::default(),
            )?;
            let ubar = westervelt_inverse(&pi, params, 1e-14)?;
            let kuz = apply_kuznetsov_operator(&ubar, params)?;
            Ok(rms(kuz.frame(kuz.len() / 2)))
        }
    }
}

/// [`ansatz_residual`] at each `eps`, other parameters fixed.
pub fn residual_scaling(
    kind: IdentityKind,
    params: &ModelParams,
    eps_list: &[f64],
    probe: &ResidualProbe,
) -> Result<Vec<(f64, f64)>> {
    eps_list
        .iter()
        .map(|&eps| {
            let p = params.with_eps(eps)?;
            ansatz_residual(kind, &p, probe)
                .map(|r| (eps, r))
                .map_err(|e| e.at_stage(format!("{} residual", kind.name()), eps))
        })
        .collect()
}
