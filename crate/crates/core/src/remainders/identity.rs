//! Refinement studies of the exact identities linking the Kuznetsov operator to each
//! reduced model plus its remainder.

use crate::ansatz_maps::westervelt_forward;
use crate::error::{Error, Result};
use crate::full_models::{apply_kuznetsov_operator, apply_westervelt_operator};
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::norm::l2_norm_all;
use crate::numerics::spectral::{antiderivative_mean_zero, project_mean_zero, spectral_derivative};
use crate::params::ModelParams;
use crate::paraxial_models::{apply_kzk_operator, apply_npe_operator};

use super::terms::{eval_r_kuz_kzk, eval_r_kuz_npe, eval_r_kuz_wes, eval_r_wes_kuz};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum IdentityKind {
    /// `Kuz(Phi o map) = eps B_KZK + eps^2 R_{Kuz-KZK}`.
    Kzk,
    /// `Kuz(Psi o map) = eps B_NPE + eps^2 R_{Kuz-NPE}`.
    Npe,
    /// `Wes(Pi) = Kuz(u) + (eps/c^2) d_t(u Kuz(u)) + eps^2 R_{Kuz-Wes}`.
    Wes,
    /// `Kuz(u) - Wes(Pi) = eps^2 R_1 - eps B`.
    WesKuz,
}

impl IdentityKind {
    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Kzk => "kzk",
            IdentityKind::Npe => "npe",
            IdentityKind::Wes => "wes",
            IdentityKind::WesKuz => "wes_kuz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kzk" => Some(IdentityKind::Kzk),
            "npe" => Some(IdentityKind::Npe),
            "wes" | "westervelt" => Some(IdentityKind::Wes),
            "wes_kuz" | "weskuz" => Some(IdentityKind::WesKuz),
            _ => None,
        }
    }
}

/// A smooth field for an identity check, with the box it is periodic on.
///
/// Arguments are `(tau, z, y...)` for the paraxial kinds and `(t, x1, x'...)` for the
/// Westervelt kinds. The field must be periodic in `tau` (KZK), `z` (NPE) or `x1`
/// (Westervelt) with period `period`, and in every transverse coordinate with the
/// extents in `transverse`. The paraxial potentials must also have zero mean over that
/// period.
pub struct Manufactured<'a> {
    pub field: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub period: f64,
    /// `(extent, points)` per transverse axis, in the field's own coordinates.
    pub transverse: Vec<(f64, usize)>,
    /// Value of the march variable (`z`, `tau` or `t`) at the first sample.
    pub anchor: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IdentityLevel {
    /// Points along the periodic coordinate.
    pub points: usize,
    /// March/time spacing used at this level.
    pub step: f64,
    pub max_defect: f64,
    pub l2_defect: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct IdentityReport {
    pub kind: IdentityKind,
    /// Physical grid of the finest level.
    pub grid: GridSpec,
    pub max_defect: f64,
    pub l2_defect: f64,
    pub levels: Vec<IdentityLevel>,
    /// Least-squares slope of `log max_defect` against `log step`; `None` when a defect is
    /// exactly zero.
    pub order: Option<f64>,
}

/// Below this an observed defect counts as converged regardless of the slope.
const ROUNDOFF_FLOOR: f64 = 1e-11;
/// Slopes below this mean the defect is not shrinking with the discretisation.
const MIN_ORDER: f64 = 1.0;

/// Frames of the physical trajectory; enough for three nested fourth-order stencils to stay
/// central at the middle frame.
const FRAMES: usize = 21;
/// Slow-time frames an NPE lattice needs.
pub(crate) const PULLBACK_FRAMES: usize = FRAMES;

/// Runs the identity of `kind` at every resolution in `levels` (points along the periodic
/// coordinate, at least three) and reports defects at the middle frame.
pub fn identity_check(
    kind: IdentityKind,
    field: &Manufactured<'_>,
    params: &ModelParams,
    levels: &[usize],
) -> Result<IdentityReport> {
    params.validate()?;
    if levels.len() < 3 {
        return Err(Error::InsufficientSamples {
            what: "refinement levels",
            needed: 3,
            got: levels.len(),
        });
    }
    if matches!(kind, IdentityKind::Kzk | IdentityKind::Npe) && params.eps <= 0.0 {
        return Err(Error::InvalidParameter(
            "paraxial identities need eps > 0".into(),
        ));
    }
    let mut out = Vec::with_capacity(levels.len());
    let mut grid = None;
    for &n in levels {
        let (g, level) = match kind {
            IdentityKind::Kzk => kzk_level(field, params, n)?,
            IdentityKind::Npe => npe_level(field, params, n)?,
            IdentityKind::Wes | IdentityKind::WesKuz => wes_level(kind, field, params, n)?,
        };
        grid = Some(g);
        out.push(level);
    }
    let order = convergence_order(&out);
    let last = out.last().expect("at least three levels");
    if last.max_defect > ROUNDOFF_FLOOR {
        if let Some(o) = order {
            if o < MIN_ORDER {
                return Err(Error::IdentityViolation(format!(
                    "{} defect does not converge: order {o:.2}, finest max defect {:.3e}",
                    kind.name(),
                    last.max_defect
                )));
            }
        }
    }
    Ok(IdentityReport {
        kind,
        grid: grid.expect("at least three levels"),
        max_defect: last.max_defect,
        l2_defect: last.l2_defect,
        levels: out,
        order,
    })
}

fn convergence_order(levels: &[IdentityLevel]) -> Option<f64> {
    if levels.iter().any(|l| l.max_defect <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = levels.iter().map(|l| l.step.ln()).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.max_defect.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

fn check_points(n: usize) -> Result<()> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "refinement levels need an even point count >= 16, got {n}"
        )));
    }
    Ok(())
}

/// Periodic slow-variable grid: the periodic coordinate then the transverse axes.
fn slow_grid(field: &Manufactured<'_>, n: usize, role: AxisRole) -> Result<GridSpec> {
    let mut axes = vec![AxisSpec::periodic(field.period, n, role)];
    for &(extent, points) in &field.transverse {
        axes.push(AxisSpec::periodic(extent, points, AxisRole::Transverse));
    }
    GridSpec::new(axes)
}

fn physical_transverse(slow: &GridSpec, eps: f64) -> Vec<AxisSpec> {
    slow.axes()[1..]
        .iter()
        .map(|a| AxisSpec::periodic(a.extent / eps.sqrt(), a.points, AxisRole::Transverse))
        .collect()
}

/// Samples `f(march, x...)` on `grid`.
fn sample(grid: &GridSpec, march: f64, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Field {
    let mut arg = vec![0.0; grid.ndim() + 1];
    Field::from_fn(grid, |x| {
        arg[0] = march;
        arg[1..].copy_from_slice(x);
        f(&arg)
    })
}

fn defect_stats(lhs: &Field, rhs: &Field) -> Result<(f64, f64)> {
    let d = lhs.sub(rhs)?;
    Ok((
        d.max_abs(),
        l2_norm_all(&d) / crate::numerics::norm::domain_measure(d.grid()).sqrt(),
    ))
}

/// Rearranges the slow-lattice samples onto the physical lattice:
/// `out[n][j][m] = slow[index(n, j)][j or row][m]` via `pick(n, j) -> (frame, row)`.
fn to_physical(
    slow: &Trajectory,
    phys: &GridSpec,
    nframe: usize,
    pick: impl Fn(usize, usize) -> (usize, usize),
) -> Vec<Vec<f64>> {
    let slice = phys.stride(0);
    let rows = phys.axis(0).points;
    (0..nframe)
        .map(|n| {
            let mut v = Vec::with_capacity(phys.len());
            for j in 0..rows {
                let (frame, row) = pick(n, j);
                v.extend_from_slice(&slow.frame(frame).values()[row * slice..(row + 1) * slice]);
            }
            v
        })
        .collect()
}

/// Kuznetsov operator of a KZK potential pulled back onto the physical lattice, and the
/// reduced-model right-hand side, both at the middle physical frame.
pub(crate) struct Pullback {
    pub grid: GridSpec,
    pub step: f64,
    pub lhs: Field,
    pub rhs: Field,
}

/// `phi` is a depth trajectory on the slow `(tau, y)` grid with `dz = eps c dtau` and at
/// least `N/4 + 1` frames for `N` points in `tau`.
pub(crate) fn kzk_pullback(phi: &Trajectory, p: &ModelParams) -> Result<Pullback> {
    let (c, eps, rho0) = (p.c, p.eps, p.rho0);
    let sg = phi.grid().clone();
    let n = sg.axis(0).points;
    let dtau = sg.axis(0).spacing();
    let depth_rows = n / 4 + 1;
    if phi.len() < depth_rows {
        return Err(Error::InsufficientSamples {
            what: "depth frames of the KZK lattice",
            needed: depth_rows,
            got: phi.len(),
        });
    }
    let dz = eps * c * dtau;
    if (phi.step() - dz).abs() > 1e-9 * dz {
        return Err(Error::InvalidParameter(format!(
            "KZK lattice needs dz = eps c dtau = {dz}, got {}",
            phi.step()
        )));
    }
    let phi = phi.window(0..depth_rows)?;

    // eps * (2c^2/rho0) d_tau^{-1} KZK(I) with I = (rho0/c^2) Phi_tau, plus eps^2 R
    let intensity = phi.map_frames(|f| Ok(spectral_derivative(f, 0, 1)?.scaled(rho0 / (c * c))))?;
    let reduced = apply_kzk_operator(&intensity, p)?;
    let r = eval_r_kuz_kzk(&phi, p)?;
    let rhs = reduced.zip_frames(&r, |b, r| {
        // the reduced operator is a mean-zero combination; drop roundoff in its mean
        let mut b = b.clone();
        project_mean_zero(&mut b, 0);
        let mut out = antiderivative_mean_zero(&b, 0)?.scaled(eps * 2.0 * c * c / rho0);
        out.axpy(eps * eps, r)?;
        Ok(out)
    })?;

    let mut axes = vec![AxisSpec::bounded(
        (depth_rows - 1) as f64 * c * dtau,
        depth_rows,
        AxisRole::Propagation,
    )];
    axes.extend(physical_transverse(&sg, eps));
    let pg = GridSpec::new(axes)?;
    // tau = t - x1/c lands on tau index (n - j) mod N, z on index j
    let pick = |fr: usize, j: usize| (j, (fr + n - j % n) % n);
    let u_frames = to_physical(&phi, &pg, FRAMES, pick)
        .into_iter()
        .map(|v| Field::new(pg.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let u = Trajectory::new(pg.clone(), dtau, 0.0, u_frames, MarchAxis::Time)?;
    let mid = FRAMES / 2;
    let lhs = apply_kuznetsov_operator(&u, p)?.frame(mid).clone();
    let rhs = Field::new(
        pg.clone(),
        to_physical(&rhs, &pg, mid + 1, pick).pop().expect("frames"),
    )?;
    Ok(Pullback {
        grid: pg,
        step: dtau,
        lhs,
        rhs,
    })
}

/// `psi` is a slow-time trajectory on the slow `(z, y)` grid with `dtau = eps dz / c` and
/// at least [`PULLBACK_FRAMES`] frames.
pub(crate) fn npe_pullback(psi: &Trajectory, p: &ModelParams) -> Result<Pullback> {
    let (c, eps, rho0) = (p.c, p.eps, p.rho0);
    let sg = psi.grid().clone();
    let n = sg.axis(0).points;
    let dx = sg.axis(0).spacing();
    let dt = dx / c;
    if psi.len() < FRAMES {
        return Err(Error::InsufficientSamples {
            what: "slow-time frames of the NPE lattice",
            needed: FRAMES,
            got: psi.len(),
        });
    }
    if (psi.step() - eps * dt).abs() > 1e-9 * eps * dt {
        return Err(Error::InvalidParameter(format!(
            "NPE lattice needs dtau = eps dz / c = {}, got {}",
            eps * dt,
            psi.step()
        )));
    }
    let psi = psi.window(0..FRAMES)?;

    // eps * (2c^2/rho0) d_z^{-1} NPE(xi) with xi = -(rho0/c) Psi_z, plus eps^2 R
    let xi = psi.map_frames(|f| Ok(spectral_derivative(f, 0, 1)?.scaled(-rho0 / c)))?;
    let reduced = apply_npe_operator(&xi, p)?;
    let r = eval_r_kuz_npe(&psi, p)?;
    let rhs = reduced.zip_frames(&r, |b, r| {
        // the reduced operator is a mean-zero combination; drop roundoff in its mean
        let mut b = b.clone();
        project_mean_zero(&mut b, 0);
        let mut out = antiderivative_mean_zero(&b, 0)?.scaled(eps * 2.0 * c * c / rho0);
        out.axpy(eps * eps, r)?;
        Ok(out)
    })?;

    let mut axes = vec![AxisSpec::periodic(
        sg.axis(0).extent,
        n,
        AxisRole::Propagation,
    )];
    axes.extend(physical_transverse(&sg, eps));
    let pg = GridSpec::new(axes)?;
    // z = x1 - c t lands on z index (j - n) mod N
    let pick = |fr: usize, j: usize| (fr, (j + n * FRAMES - fr) % n);
    let u_frames = to_physical(&psi, &pg, FRAMES, pick)
        .into_iter()
        .map(|v| Field::new(pg.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let u = Trajectory::new(pg.clone(), dt, psi.start() / eps, u_frames, MarchAxis::Time)?;
    let mid = FRAMES / 2;
    let lhs = apply_kuznetsov_operator(&u, p)?.frame(mid).clone();
    let rhs = Field::new(
        pg.clone(),
        to_physical(&rhs, &pg, mid + 1, pick).pop().expect("frames"),
    )?;
    Ok(Pullback {
        grid: pg,
        step: dt,
        lhs,
        rhs,
    })
}

fn level(pb: Pullback, n: usize) -> Result<(GridSpec, IdentityLevel)> {
    let (max_defect, l2_defect) = defect_stats(&pb.lhs, &pb.rhs)?;
    Ok((
        pb.grid,
        IdentityLevel {
            points: n,
            step: pb.step,
            max_defect,
            l2_defect,
        },
    ))
}

fn kzk_level(
    field: &Manufactured<'_>,
    p: &ModelParams,
    n: usize,
) -> Result<(GridSpec, IdentityLevel)> {
    check_points(n)?;
    let dtau = field.period / n as f64;
    let dz = p.eps * p.c * dtau;
    let sg = slow_grid(field, n, AxisRole::TimeLike)?;
    let f = field.field;
    let frames = (0..n / 4 + 1)
        .map(|j| {
            let z = field.anchor + j as f64 * dz;
            sample(&sg, z, &|a: &[f64]| {
                let mut b = a.to_vec();
                b.swap(0, 1);
                f(&b)
            })
        })
        .collect();
    let phi = Trajectory::new(sg, dz, field.anchor, frames, MarchAxis::Depth)?;
    level(kzk_pullback(&phi, p)?, n)
}

fn npe_level(
    field: &Manufactured<'_>,
    p: &ModelParams,
    n: usize,
) -> Result<(GridSpec, IdentityLevel)> {
    check_points(n)?;
    let dtau = p.eps * field.period / n as f64 / p.c;
    let sg = slow_grid(field, n, AxisRole::Propagation)?;
    let frames = (0..FRAMES)
        .map(|k| sample(&sg, field.anchor + k as f64 * dtau, field.field))
        .collect();
    let psi = Trajectory::new(sg, dtau, field.anchor, frames, MarchAxis::SlowTime)?;
    level(npe_pullback(&psi, p)?, n)
}

fn wes_level(
    kind: IdentityKind,
    field: &Manufactured<'_>,
    p: &ModelParams,
    n: usize,
) -> Result<(GridSpec, IdentityLevel)> {
    check_points(n)?;
    let eps = p.eps;
    let c2 = p.c * p.c;
    let dt = field.period / n as f64;
    let mut axes = vec![AxisSpec::periodic(field.period, n, AxisRole::Propagation)];
    for &(extent, points) in &field.transverse {
        axes.push(AxisSpec::periodic(extent, points, AxisRole::Transverse));
    }
    let pg = GridSpec::new(axes)?;
    let frames = (0..FRAMES)
        .map(|k| sample(&pg, field.anchor + k as f64 * dt, field.field))
        .collect();
    let u = Trajectory::new(pg.clone(), dt, field.anchor, frames, MarchAxis::Time)?;
    let kuz = apply_kuznetsov_operator(&u, p)?;
    let defect = match kind {
        IdentityKind::Wes => {
            let pi = westervelt_forward(&u, p)?;
            let wes = apply_westervelt_operator(&pi, p)?;
            let coupled = time_derivative_series(&u.zip_frames(&kuz, |a, b| a.mul(b))?, 1)?;
            let r = eval_r_kuz_wes(&u, p)?;
            let mid = FRAMES / 2;
            let mut rhs = kuz.frame(mid).clone();
            rhs.axpy(eps / c2, coupled.frame(mid))?;
            rhs.axpy(eps * eps, r.frame(mid))?;
            defect_stats(wes.frame(mid), &rhs)?
        }
        _ => {
            let ut = time_derivative_series(&u, 1)?;
            let pi = u.zip_frames(&ut, |a, b| {
                let mut out = a.clone();
                out.axpy(eps / c2, &a.mul(b)?)?;
                Ok(out)
            })?;
            let wes = apply_westervelt_operator(&pi, p)?;
            let r = eval_r_wes_kuz(&u, p)?.weighted(eps)?;
            let mid = FRAMES / 2;
            let lhs = kuz.frame(mid).sub(wes.frame(mid))?;
            defect_stats(&lhs, r.frame(mid))?
        }
    };
    Ok((
        pg,
        IdentityLevel {
            points: n,
            step: dt,
            max_defect: defect.0,
            l2_defect: defect.1,
        },
    ))
}
