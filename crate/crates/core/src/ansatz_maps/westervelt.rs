//! The algebraic change of unknown between Kuznetsov and Westervelt solutions.

use crate::error::{Error, Result};
use crate::numerics::banded::PivotedBanded;
use crate::numerics::calculus::{all_axes, grad_dot, laplacian};
use crate::numerics::fd::{time_derivative_series, Stencils};
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::params::ModelParams;

/// Smallest admissible `1 - (gamma-1) eps u1 / c^2` in [`westervelt_initial_data`].
pub const MIN_FACTOR: f64 = 0.25;
/// Bound on `eps max|Pi| max|Pi_t| / c^2` for the fixed-point inversion.
pub const CONTRACTION_GATE: f64 = 0.1;
/// A sweep-to-sweep change that stops shrinking is accepted as converged below this: the
/// one-sided time stencils at the two ends of the trajectory leave boundary layers whose
/// jitter sets a floor.
pub const STAGNATION_FLOOR: f64 = 1e-6;
const MAX_SWEEPS: usize = 200;

fn require_time(traj: &Trajectory) -> Result<()> {
    if traj.march_axis() != MarchAxis::Time {
        return Err(Error::InvalidParameter(format!(
            "expected a time trajectory, got one ordered by {}",
            traj.march_axis().label()
        )));
    }
    Ok(())
}

/// `Pi = u + (eps / 2c^2) d_t(u^2)` per frame.
pub fn westervelt_forward(u: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require_time(u)?;
    let k = params.eps / (2.0 * params.c * params.c);
    let sq = u.map_frames(|f| f.mul(f))?;
    let sq_t = time_derivative_series(&sq, 1)?;
    u.zip_frames(&sq_t, |f, d| {
        let mut p = f.clone();
        p.axpy(k, d)?;
        Ok(p)
    })
}

fn traj_norm(t: &Trajectory) -> f64 {
    t.frames()
        .iter()
        .flat_map(|f| f.values())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// One sweep `u_next + k u_prev D u_next = Pi`, with `D` the fourth-order time stencil,
/// solved column by column. Keeping `D` on the new iterate stops the high-frequency
/// amplification an explicit sweep suffers once `k |u| / dt` is large.
fn implicit_sweep(pi: &Trajectory, u: &Trajectory, k: f64, d: &Stencils) -> Result<Trajectory> {
    let nt = pi.len();
    let npts = pi.grid().len();
    let bw = d.bandwidth();
    let mut out = vec![vec![0.0; npts]; nt];
    let mut col = vec![0.0; nt];
    for s in 0..npts {
        let mut m = PivotedBanded::zeros(nt, bw, bw);
        for i in 0..nt {
            m.add(i, i, 1.0);
            let coef = k * u.frame(i).values()[s];
            let (first, w) = d.row(i);
            for (j, wj) in w.iter().enumerate() {
                m.add(i, first + j, coef * wj);
            }
            col[i] = pi.frame(i).values()[s];
        }
        m.factor()?.solve_in_place(&mut col);
        for (o, v) in out.iter_mut().zip(&col) {
            o[s] = *v;
        }
    }
    let frames = out
        .into_iter()
        .map(|v| Field::new(pi.grid().clone(), v))
        .collect::<Result<Vec<_>>>()?;
    pi.with_frames(frames)
}

/// Solves `Pi = u + (eps/c^2) u u_t` for `u` by semi-implicit sweeps over the whole
/// trajectory, stopping when the relative sweep-to-sweep change is at most `tol`, or when it
/// stalls below [`STAGNATION_FLOOR`].
pub fn westervelt_inverse(pi: &Trajectory, params: &ModelParams, tol: f64) -> Result<Trajectory> {
    require_time(pi)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let k = params.eps / (params.c * params.c);
    let scale = traj_norm(pi);
    if scale == 0.0 || k == 0.0 {
        return Ok(pi.clone());
    }
    let pi_t = time_derivative_series(pi, 1)?;
    let max_pi = pi.frames().iter().map(Field::max_abs).fold(0.0, f64::max);
    let max_pt = pi_t.frames().iter().map(Field::max_abs).fold(0.0, f64::max);
    let gate = k * max_pi * max_pt;
    if gate > CONTRACTION_GATE {
        return Err(Error::InversionFailure(format!(
            "eps max|Pi| max|Pi_t| / c^2 = {gate:.3e} exceeds {CONTRACTION_GATE}"
        )));
    }
    let d = Stencils::bounded(pi.len(), pi.step(), 1)?;
    let mut u = pi.clone();
    let mut last = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        let next = implicit_sweep(pi, &u, k, &d)?;
        let diff = next.zip_frames(&u, |a, b| a.sub(b))?;
        let change = traj_norm(&diff) / scale;
        u = next;
        if change <= tol {
            return Ok(u);
        }
        if sweep > 2 && change > 0.5 * last {
            if change <= STAGNATION_FLOOR {
                return Ok(u);
            }
            return Err(Error::InversionFailure(format!(
                "sweep {sweep}: change stalled at {change:.3e} (previous {last:.3e})"
            )));
        }
        last = change;
    }
    Err(Error::InversionFailure(format!(
        "no convergence to {tol:e} in {MAX_SWEEPS} sweeps (last change {last:.3e})"
    )))
}

/// `(Pi0, Pi1)` from Kuznetsov data `(u0, u1)`, with `u_tt(0)` taken from the Kuznetsov equation.
pub fn westervelt_initial_data(
    u0: &Field,
    u1: &Field,
    params: &ModelParams,
) -> Result<(Field, Field)> {
    u0.check_same_grid(u1)?;
    let (eps, c2) = (params.eps, params.c * params.c);
    let k = eps / c2;
    let pi0 = u0.zip_map(u1, |a, b| a + k * a * b)?;
    if eps == 0.0 {
        return Ok((pi0, u1.clone()));
    }
    let axes = all_axes(u0);
    let factor = u1.map(|b| 1.0 - (params.gamma - 1.0) * eps * b / c2);
    let worst = factor
        .values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if worst < MIN_FACTOR {
        return Err(Error::Degeneracy {
            factor: worst,
            time: 0.0,
        });
    }
    let mut acc = laplacian(u0, &axes)?.scaled(c2);
    acc.axpy(params.visc() * eps, &laplacian(u1, &axes)?)?;
    acc.axpy(2.0 * eps, &grad_dot(u0, u1, &axes)?)?;
    let utt = acc.zip_map(&factor, |a, f| a / f)?;
    let vals = u0
        .values()
        .iter()
        .zip(u1.values())
        .zip(utt.values())
        .map(|((a, b), w)| b + k * b * b + k * a * w)
        .collect();
    Ok((pi0, Field::new(u0.grid().clone(), vals)?))
}
