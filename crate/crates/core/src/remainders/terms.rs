//! Pointwise remainder terms of the three model reductions, evaluated on stored trajectories.
//!
//! Derivatives along the march variable use the fourth-order trajectory stencils; periodic
//! axes are differentiated spectrally and bounded ones by finite differences.

use crate::error::{Error, Result};
use crate::numerics::calculus::{all_axes, derivative, grad_dot, laplacian};
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::params::ModelParams;

/// Minimum number of frames for the nested march-direction stencils.
pub const MIN_REMAINDER_FRAMES: usize = 7;

fn require(traj: &Trajectory, axis: MarchAxis) -> Result<()> {
    if traj.march_axis() != axis {
        return Err(Error::InvalidParameter(format!(
            "expected a trajectory ordered by {}, got {}",
            axis.label(),
            traj.march_axis().label()
        )));
    }
    if traj.len() < MIN_REMAINDER_FRAMES {
        return Err(Error::InsufficientSamples {
            what: "remainder frames",
            needed: MIN_REMAINDER_FRAMES,
            got: traj.len(),
        });
    }
    Ok(())
}

/// `sum_i a_i f_i`.
fn combo(terms: &[(f64, &Field)]) -> Result<Field> {
    let mut out = Field::zeros(terms[0].1.grid());
    for (a, f) in terms {
        if *a != 0.0 {
            out.axpy(*a, f)?;
        }
    }
    Ok(out)
}

fn d(f: &Field, axis: usize, order: usize) -> Result<Field> {
    derivative(f, axis, order)
}

fn transverse(f: &Field) -> Vec<usize> {
    (1..f.grid().ndim()).collect()
}

/// `R_{Kuz-KZK}` for a potential `Phi(tau, z, y)` marched in `z` (axis 0 of each frame is
/// `tau`): the `eps^2` bracket plus `eps` times the `eps^3` bracket.
pub fn eval_r_kuz_kzk(phi: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require(phi, MarchAxis::Depth)?;
    let (c, eps, visc) = (params.c, params.eps, params.visc());
    let pz = time_derivative_series(phi, 1)?;
    let pzz = time_derivative_series(phi, 2)?;
    let frames = (0..phi.len())
        .map(|i| {
            let (p, p_z, p_zz) = (phi.frame(i), pz.frame(i), pzz.frame(i));
            let tr = transverse(p);
            let p_tau = d(p, 0, 1)?;
            let flux = d(&p_tau.mul(p_z)?, 0, 1)?;
            let grad_y = d(&grad_dot(p, p, &tr)?, 0, 1)?;
            let p_ttz = d(p_z, 0, 2)?;
            let lap_y_tau = d(&laplacian(p, &tr)?, 0, 1)?;
            let pz_sq = d(&p_z.mul(p_z)?, 0, 1)?;
            let p_tzz = d(p_zz, 0, 1)?;
            combo(&[
                (-c * c, p_zz),
                (2.0 / c, &flux),
                (-1.0, &grad_y),
                (2.0 * visc / c, &p_ttz),
                (-visc, &lap_y_tau),
                (-eps, &pz_sq),
                (-eps * visc, &p_tzz),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    phi.with_frames(frames)
}

/// `R_{Kuz-NPE}` for a potential `Psi(tau, z, y)` marched in `tau` (axis 0 of each frame is
/// `z`): the `eps^2`, `eps^3` and `eps^4` brackets with the `eps` weights folded in.
pub fn eval_r_kuz_npe(psi: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require(psi, MarchAxis::SlowTime)?;
    let (c, eps, visc, g) = (params.c, params.eps, params.visc(), params.gamma);
    let pt = time_derivative_series(psi, 1)?;
    let ptt = time_derivative_series(psi, 2)?;
    let frames = (0..psi.len())
        .map(|i| {
            let (p, p_t, p_tt) = (psi.frame(i), pt.frame(i), ptt.frame(i));
            let tr = transverse(p);
            let p_z = d(p, 0, 1)?;
            let p_zz = d(p, 0, 2)?;
            let p_tz = d(p_t, 0, 1)?;
            let p_tzz = d(p_t, 0, 2)?;
            let lap_y = laplacian(p, &tr)?;
            let lap_y_z = d(&lap_y, 0, 1)?;
            let grad_y_z = grad_dot(p, &p_z, &tr)?;
            let lap_y_t = laplacian(p_t, &tr)?;
            let grad_y_t = grad_dot(p, p_t, &tr)?;
            combo(&[
                (1.0, p_tt),
                (-visc, &p_tzz),
                (visc * c, &lap_y_z),
                (-(g - 1.0), &p_t.mul(&p_zz)?),
                (-2.0 * g, &p_z.mul(&p_tz)?),
                (2.0 * c, &grad_y_z),
                (-eps * visc, &lap_y_t),
                (eps * 2.0 * (g - 1.0) / c, &p_t.mul(&p_tz)?),
                (eps * (g - 1.0) / c, &p_z.mul(p_tt)?),
                (-2.0 * eps, &grad_y_t),
                (-eps * eps * (g - 1.0) / (c * c), &p_t.mul(p_tt)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    psi.with_frames(frames)
}

/// `R_{Kuz-Wes}` for a Kuznetsov-side field `u(t, x)`, defined by
/// `Wes(Pi) = Kuz(u) + (eps/c^2) d_t(u Kuz(u)) + eps^2 R` with `Pi = u + (eps/2c^2) d_t(u^2)`.
pub fn eval_r_kuz_wes(u: &Trajectory, params: &ModelParams) -> Result<Trajectory> {
    require(u, MarchAxis::Time)?;
    let (c, eps, visc, g) = (params.c, params.eps, params.visc(), params.gamma);
    let c2 = c * c;
    let axes = all_axes(u.frame(0));
    let ut = time_derivative_series(u, 1)?;
    let sq = u.map_frames(|f| f.mul(f))?;
    let sq_tt = time_derivative_series(&sq, 2)?;
    let flux = u.zip_frames(&ut, |f, v| {
        combo(&[
            (1.0, &grad_dot(f, f, &axes)?),
            ((g - 1.0) / (2.0 * c2), &v.mul(v)?),
            (visc, &laplacian(f, &axes)?),
        ])
    })?;
    let flux_t = time_derivative_series(&flux, 1)?;
    let frames = (0..u.len())
        .map(|i| {
            let (f, v, s2) = (u.frame(i), ut.frame(i), sq_tt.frame(i));
            combo(&[
                (-visc / c2, &laplacian(&f.mul(v)?, &axes)?),
                (-(g + 1.0) / (2.0 * c2 * c2), &v.mul(s2)?),
                (1.0 / c2, &f.mul(flux_t.frame(i))?),
                (-eps * (g + 1.0) / (8.0 * c2 * c2 * c2), &s2.mul(s2)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    time_derivative_series(&u.with_frames(frames)?, 1)
}

/// The two parts of the Westervelt-to-Kuznetsov remainder:
/// `Kuz(ubar) - Wes(Pi) = eps^2 r1 - eps correction` for `Pi = ubar + (eps/c^2) ubar ubar_t`.
#[derive(Clone, Debug)]
pub struct WesKuzRemainder {
    pub r1: Trajectory,
    /// `(1/c^2) d_t(ubar (ubar_tt - c^2 Lap ubar))`.
    pub correction: Trajectory,
}

impl WesKuzRemainder {
    /// `eps^2 r1 - eps correction` per frame.
    pub fn weighted(&self, eps: f64) -> Result<Trajectory> {
        self.r1
            .zip_frames(&self.correction, |r, b| combo(&[(eps * eps, r), (-eps, b)]))
    }
}

pub fn eval_r_wes_kuz(ubar: &Trajectory, params: &ModelParams) -> Result<WesKuzRemainder> {
    require(ubar, MarchAxis::Time)?;
    let (c, eps, visc, g) = (params.c, params.eps, params.visc(), params.gamma);
    let c2 = c * c;
    let axes = all_axes(ubar.frame(0));
    let d1 = time_derivative_series(ubar, 1)?;
    let d2 = time_derivative_series(ubar, 2)?;
    let d3 = time_derivative_series(ubar, 3)?;
    let mut r1 = Vec::with_capacity(ubar.len());
    let mut corr = Vec::with_capacity(ubar.len());
    for i in 0..ubar.len() {
        let (u, ut, utt, uttt) = (ubar.frame(i), d1.frame(i), d2.frame(i), d3.frame(i));
        let lap_u = laplacian(u, &axes)?;
        let lap_ut = laplacian(ut, &axes)?;
        let lap_utt = laplacian(utt, &axes)?;
        let viscous = combo(&[
            (2.0, &ut.mul(&lap_ut)?),
            (2.0, &grad_dot(ut, ut, &axes)?),
            (1.0, &utt.mul(&lap_u)?),
            (1.0, &u.mul(&lap_utt)?),
            (2.0, &grad_dot(u, utt, &axes)?),
        ])?;
        let p = combo(&[(1.0, &ut.mul(ut)?), (1.0, &u.mul(utt)?)])?;
        let q = combo(&[(3.0, &ut.mul(utt)?), (1.0, &u.mul(uttt)?)])?;
        let k = (g + 1.0) / (c2 * c2);
        r1.push(combo(&[
            (visc / c2, &viscous),
            (k, &p.mul(utt)?),
            (k, &q.mul(ut)?),
            (eps * (g + 1.0) / (c2 * c2 * c2), &p.mul(&q)?),
        ])?);
        corr.push(combo(&[
            (1.0 / c2, &ut.mul(utt)?),
            (-1.0, &ut.mul(&lap_u)?),
            (1.0 / c2, &u.mul(uttt)?),
            (-1.0, &u.mul(&lap_ut)?),
        ])?);
    }
    Ok(WesKuzRemainder {
        r1: ubar.with_frames(r1)?,
        correction: ubar.with_frames(corr)?,
    })
}
