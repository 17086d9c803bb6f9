//! Kuznetsov data built from KZK and NPE solutions by composing with the ansatz maps.

use crate::error::{Error, Result};
use crate::full_models::BoundaryData;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::spectral::{
    antiderivative_mean_zero, project_mean_zero, spectral_derivative, spectral_laplacian,
};
use crate::params::ModelParams;

use super::coords::{ParaxialKind, ParaxialMap};
use super::interp::{resample_tensor, trig_matrix, FrameSpline};
use super::{AnsatzFieldSet, Provenance};

fn require_paraxial_grid(grid: &GridSpec) -> Result<()> {
    for ax in 0..grid.ndim() {
        grid.require_periodic(ax)?;
    }
    Ok(())
}

fn require_march(traj: &Trajectory, axis: MarchAxis) -> Result<()> {
    if traj.march_axis() != axis {
        return Err(Error::InvalidParameter(format!(
            "expected a trajectory ordered by {}, got {}",
            axis.label(),
            traj.march_axis().label()
        )));
    }
    require_paraxial_grid(traj.grid())
}

/// Evaluates `F(s(x1), slice(x1); y = scale * x')` on `target`, where each slice is a field
/// on `native` (axis 0 the periodic slow coordinate, then the transverse axes).
fn compose(
    native: &GridSpec,
    target: &GridSpec,
    scale: f64,
    s_of: impl Fn(f64) -> f64,
    mut slice_at: impl FnMut(f64) -> Result<Vec<f64>>,
) -> Result<Field> {
    if target.ndim() != native.ndim() {
        return Err(Error::GridMismatch(format!(
            "target grid has {} axes, solution grid has {}",
            target.ndim(),
            native.ndim()
        )));
    }
    let mats = transverse_matrices(native, &target.axes()[1..], scale)?;
    let sizes: Vec<usize> = native.axes()[1..].iter().map(|a| a.points).collect();
    let stride = native.stride(0);
    let s_axis = native.axis(0);
    let mut out = Vec::with_capacity(target.len());
    for x1 in target.axis(0).coordinates() {
        let slice = slice_at(x1)?;
        let w = &trig_matrix(s_axis, &[s_of(x1)])[0];
        let mut row = vec![0.0; stride];
        for (j, wj) in w.iter().enumerate() {
            if *wj == 0.0 {
                continue;
            }
            for (r, v) in row.iter_mut().zip(&slice[j * stride..(j + 1) * stride]) {
                *r += wj * v;
            }
        }
        out.extend(resample_tensor(&row, &sizes, &mats));
    }
    Field::new(target.clone(), out)
}

fn transverse_matrices(
    native: &GridSpec,
    targets: &[AxisSpec],
    scale: f64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    if targets.len() + 1 != native.ndim() {
        return Err(Error::GridMismatch(format!(
            "{} target transverse axes for {} solution transverse axes",
            targets.len(),
            native.ndim() - 1
        )));
    }
    Ok(targets
        .iter()
        .zip(&native.axes()[1..])
        .map(|(t, n)| {
            let ys: Vec<f64> = t.coordinates().iter().map(|x| scale * x).collect();
            trig_matrix(n, &ys)
        })
        .collect())
}

/// Transverse axes of the physical box matching the slow box: extents divided by `sqrt(eps)`.
pub fn physical_transverse_axes(native: &GridSpec, eps: f64) -> Vec<AxisSpec> {
    native.axes()[1..]
        .iter()
        .map(|a| AxisSpec::periodic(a.extent / eps.sqrt(), a.points, AxisRole::Transverse))
        .collect()
}

/// KZK solution prepared for repeated evaluation of `ubar = (c^2/rho0) d_tau^{-1} I` and
/// `ubar_t = (c^2/rho0) I` along the map `tau = t - x1/c`, `z = eps x1`, `y = sqrt(eps) x'`.
pub struct KzkAnsatz {
    map: ParaxialMap,
    native: GridSpec,
    potential: FrameSpline,
    density: FrameSpline,
    first_potential: Vec<f64>,
    first_density: Vec<f64>,
}

impl KzkAnsatz {
    pub fn new(traj: &Trajectory, params: &ModelParams) -> Result<Self> {
        require_march(traj, MarchAxis::Depth)?;
        let map = ParaxialMap::for_params(ParaxialKind::Kzk, params)?;
        let k = params.c * params.c / params.rho0;
        let mut pot = Vec::with_capacity(traj.len());
        let mut den = Vec::with_capacity(traj.len());
        for f in traj.frames() {
            pot.push(antiderivative_mean_zero(f, 0)?.scaled(k).into_values());
            den.push(f.scaled(k).into_values());
        }
        let first_potential = pot[0].clone();
        let first_density = den[0].clone();
        Ok(KzkAnsatz {
            map,
            native: traj.grid().clone(),
            potential: FrameSpline::new(pot, traj.start(), traj.step())?,
            density: FrameSpline::new(den, traj.start(), traj.step())?,
            first_potential,
            first_density,
        })
    }

    pub fn map(&self) -> &ParaxialMap {
        &self.map
    }

    fn eval(&self, spline: &FrameSpline, target: &GridSpec, t: f64) -> Result<Field> {
        let (eps, c) = (self.map.eps, self.map.c);
        compose(
            &self.native,
            target,
            self.map.transverse_scale(),
            |x1| t - x1 / c,
            |x1| spline.eval(eps * x1),
        )
    }

    pub fn ubar(&self, target: &GridSpec, t: f64) -> Result<Field> {
        self.eval(&self.potential, target, t)
    }

    pub fn ubar_t(&self, target: &GridSpec, t: f64) -> Result<Field> {
        self.eval(&self.density, target, t)
    }

    /// `g(t, x') = ubar(t, 0, x')` over one period, on the given physical transverse axes,
    /// with the exact `g_t(0)` attached.
    pub fn boundary(&self, transverse: &[AxisSpec]) -> Result<BoundaryData> {
        boundary_from_slices(
            &self.native,
            transverse,
            self.map.transverse_scale(),
            &self.first_potential,
            &self.first_density,
        )
    }

    pub fn initial_data(&self, target: &GridSpec) -> Result<AnsatzFieldSet> {
        let u0 = self.ubar(target, 0.0)?;
        let u1 = self.ubar_t(target, 0.0)?;
        let g = match target.axis(0).kind {
            crate::numerics::grid::AxisKind::Bounded => Some(self.boundary(&target.axes()[1..])?),
            crate::numerics::grid::AxisKind::Periodic => None,
        };
        AnsatzFieldSet::new(u0, u1, g, Provenance::Kzk)
    }
}

fn boundary_from_slices(
    native: &GridSpec,
    transverse: &[AxisSpec],
    scale: f64,
    potential: &[f64],
    density: &[f64],
) -> Result<BoundaryData> {
    let mats = transverse_matrices(native, transverse, scale)?;
    let sizes: Vec<usize> = native.axes()[1..].iter().map(|a| a.points).collect();
    let stride = native.stride(0);
    let tau = native.axis(0);
    let mut values = Vec::new();
    for j in 0..tau.points {
        values.extend(resample_tensor(
            &potential[j * stride..(j + 1) * stride],
            &sizes,
            &mats,
        ));
    }
    let mut axes = vec![AxisSpec::periodic(
        tau.extent,
        tau.points,
        AxisRole::TimeLike,
    )];
    axes.extend(transverse.iter().cloned());
    let mut g = Field::new(GridSpec::new(axes)?, values)?;
    // resampling leaves roundoff in the time mean
    project_mean_zero(&mut g, 0);
    let rate = resample_tensor(&density[..stride], &sizes, &mats);
    BoundaryData::periodic(g)?.with_initial_rate(rate)
}

/// `ubar(t, x) = (c^2/rho0) d_tau^{-1} I(t - x1/c, eps x1, sqrt(eps) x')` on `target`.
pub fn build_ubar_from_kzk(
    traj: &Trajectory,
    params: &ModelParams,
    target: &GridSpec,
    t: f64,
) -> Result<Field> {
    KzkAnsatz::new(traj, params)?.ubar(target, t)
}

/// Boundary trace `(c^2/rho0) d_tau^{-1} I0(t, sqrt(eps) x')` on the physical transverse box
/// matching the slice's transverse box.
pub fn kzk_boundary_g(i0: &Field, params: &ModelParams) -> Result<BoundaryData> {
    require_paraxial_grid(i0.grid())?;
    let map = ParaxialMap::for_params(ParaxialKind::Kzk, params)?;
    let k = params.c * params.c / params.rho0;
    let pot = antiderivative_mean_zero(i0, 0)?.scaled(k);
    let den = i0.scaled(k);
    let transverse = physical_transverse_axes(i0.grid(), params.eps);
    boundary_from_slices(
        i0.grid(),
        &transverse,
        map.transverse_scale(),
        pot.values(),
        den.values(),
    )
}

/// Kuznetsov initial data (and boundary trace on half-space grids) from a depth march.
pub fn kzk_initial_data(
    traj: &Trajectory,
    params: &ModelParams,
    target: &GridSpec,
) -> Result<AnsatzFieldSet> {
    KzkAnsatz::new(traj, params)?.initial_data(target)
}

/// `d_z^{-1} xi_tau` from the NPE equation.
fn npe_rate_potential(xi: &Field, params: &ModelParams) -> Result<Field> {
    let (c, rho0) = (params.c, params.rho0);
    let mut sq = xi.mul(xi)?;
    project_mean_zero(&mut sq, 0);
    let mut r = sq.scaled(-(params.gamma + 1.0) * c / (4.0 * rho0));
    r.axpy(params.nu / (2.0 * rho0), &spectral_derivative(xi, 0, 1)?)?;
    if xi.grid().ndim() > 1 {
        let trans: Vec<usize> = (1..xi.grid().ndim()).collect();
        let lap = spectral_laplacian(xi, &trans)?;
        let twice = antiderivative_mean_zero(&antiderivative_mean_zero(&lap, 0)?, 0)?;
        r.axpy(-c / 2.0, &twice)?;
    }
    Ok(r)
}

/// `(ubar, ubar_t)` sample vectors for one NPE slice.
fn npe_slices(xi: &Field, params: &ModelParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (c, rho0, eps) = (params.c, params.rho0, params.eps);
    let pot = antiderivative_mean_zero(xi, 0)?.scaled(-c / rho0);
    let mut rate = npe_rate_potential(xi, params)?.scaled(-eps * c / rho0);
    rate.axpy(c * c / rho0, xi)?;
    Ok((pot.into_values(), rate.into_values()))
}

fn check_torus_period(native: &GridSpec, target: &GridSpec) -> Result<()> {
    let t = target.require_periodic(0)?;
    let n = native.axis(0);
    if (t.extent - n.extent).abs() > 1e-12 * n.extent {
        return Err(Error::GridMismatch(format!(
            "target period {} differs from the NPE period {}",
            t.extent, n.extent
        )));
    }
    Ok(())
}

/// NPE solution prepared for evaluating `ubar = -(c/rho0) d_z^{-1} xi` and its time
/// derivative along `tau = eps t`, `z = x1 - c t`, `y = sqrt(eps) x'`.
pub struct NpeAnsatz {
    map: ParaxialMap,
    native: GridSpec,
    potential: FrameSpline,
    rate: FrameSpline,
}

impl NpeAnsatz {
    pub fn new(traj: &Trajectory, params: &ModelParams) -> Result<Self> {
        require_march(traj, MarchAxis::SlowTime)?;
        let map = ParaxialMap::for_params(ParaxialKind::Npe, params)?;
        let mut pot = Vec::with_capacity(traj.len());
        let mut rate = Vec::with_capacity(traj.len());
        for f in traj.frames() {
            let (p, r) = npe_slices(f, params)?;
            pot.push(p);
            rate.push(r);
        }
        Ok(NpeAnsatz {
            map,
            native: traj.grid().clone(),
            potential: FrameSpline::new(pot, traj.start(), traj.step())?,
            rate: FrameSpline::new(rate, traj.start(), traj.step())?,
        })
    }

    pub fn map(&self) -> &ParaxialMap {
        &self.map
    }

    fn eval(&self, spline: &FrameSpline, target: &GridSpec, t: f64) -> Result<Field> {
        check_torus_period(&self.native, target)?;
        let slice = spline.eval(self.map.eps * t)?;
        let c = self.map.c;
        compose(
            &self.native,
            target,
            self.map.transverse_scale(),
            |x1| x1 - c * t,
            |_| Ok(slice.clone()),
        )
    }

    pub fn ubar(&self, target: &GridSpec, t: f64) -> Result<Field> {
        self.eval(&self.potential, target, t)
    }

    pub fn ubar_t(&self, target: &GridSpec, t: f64) -> Result<Field> {
        self.eval(&self.rate, target, t)
    }
}

pub fn build_ubar_from_npe(
    traj: &Trajectory,
    params: &ModelParams,
    target: &GridSpec,
    t: f64,
) -> Result<Field> {
    NpeAnsatz::new(traj, params)?.ubar(target, t)
}

/// `u0 = -(c/rho0) d_z^{-1} xi0` and `u1 = eps ubar_tau - c ubar_z` with `xi_tau` from the NPE
/// equation, on a torus whose first period matches the NPE period.
pub fn npe_initial_data(
    xi0: &Field,
    params: &ModelParams,
    target: &GridSpec,
) -> Result<AnsatzFieldSet> {
    require_paraxial_grid(xi0.grid())?;
    check_torus_period(xi0.grid(), target)?;
    let map = ParaxialMap::for_params(ParaxialKind::Npe, params)?;
    let (pot, rate) = npe_slices(xi0, params)?;
    let scale = map.transverse_scale();
    let u0 = compose(xi0.grid(), target, scale, |x1| x1, |_| Ok(pot.clone()))?;
    let u1 = compose(xi0.grid(), target, scale, |x1| x1, |_| Ok(rate.clone()))?;
    AnsatzFieldSet::new(u0, u1, None, Provenance::Npe)
}
