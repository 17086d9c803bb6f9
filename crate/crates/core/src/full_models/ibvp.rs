//! Dirichlet problem on a truncated half space: bounded depth axis first, periodic
//! transverse axes after it, with an absorbing sponge before the far wall.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::full_models::ivp::check_cfl;
use crate::full_models::stepper::{
    check_step, Discretization, LinearCoefficients, StepperOptions, TimeLoop, WaveModel,
};
use crate::numerics::banded::{BandedLu, BandedMatrix};
use crate::numerics::fd::Stencils;
use crate::numerics::field::{Field, Trajectory};
use crate::numerics::grid::{AxisKind, AxisSpec, GridSpec};
use crate::numerics::spectral::{self, axis_index, is_nyquist, kept_by_two_thirds};
use crate::params::ModelParams;

/// Boundary trace `g(t, x')` at the `x1 = 0` face.
///
/// Axis 0 of `g` is time: periodic with extent equal to the period for periodic data,
/// bounded (sampled from `t = 0`) otherwise. The remaining axes match the transverse axes
/// of the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    g: Field,
    period: Option<f64>,
    /// Exact `g_t(0)` when the producer knows it.
    initial_rate: Option<Vec<f64>>,
}

/// Relative tolerance for the zero time mean of periodic boundary data.
pub const BOUNDARY_MEAN_TOL: f64 = 1e-10;

impl BoundaryData {
    pub fn periodic(g: Field) -> Result<Self> {
        let time = g.grid().require_periodic(0)?;
        let period = time.extent;
        let scale = g.max_abs();
        let mean = spectral::max_line_mean(&g, 0);
        let limit = BOUNDARY_MEAN_TOL * scale.max(f64::MIN_POSITIVE);
        if mean > limit {
            return Err(Error::MeanViolation {
                axis: 0,
                mean,
                limit,
            });
        }
        Ok(BoundaryData {
            g,
            period: Some(period),
            initial_rate: None,
        })
    }

    pub fn sampled(g: Field) -> Result<Self> {
        g.grid().require_bounded(0)?;
        Ok(BoundaryData {
            g,
            period: None,
            initial_rate: None,
        })
    }

    /// Identically zero data on `transverse` with a periodic time axis of `m` samples.
    pub fn zero(
        transverse: &[crate::numerics::grid::AxisSpec],
        period: f64,
        m: usize,
    ) -> Result<Self> {
        let mut axes = vec![crate::numerics::grid::AxisSpec::periodic(
            period,
            m,
            crate::numerics::grid::AxisRole::TimeLike,
        )];
        axes.extend(transverse.iter().cloned());
        BoundaryData::periodic(Field::zeros(&GridSpec::new(axes)?))
    }

    /// Attaches the exact `g_t(0)`, used by the compatibility check instead of a
    /// finite-difference estimate.
    pub fn with_initial_rate(mut self, rate: Vec<f64>) -> Result<Self> {
        if rate.len() != self.slice_len() {
            return Err(Error::GridMismatch(format!(
                "initial rate has {} samples, slice has {}",
                rate.len(),
                self.slice_len()
            )));
        }
        self.initial_rate = Some(rate);
        Ok(self)
    }

    /// Every `factor`-th time sample, for a run with a `factor` times larger step.
    pub fn decimated(&self, factor: usize) -> Result<Self> {
        let m = self.time_samples();
        // periodic samples wrap; sampled data keeps both ends
        let span = if self.period.is_some() { m } else { m - 1 };
        if factor == 0 || span % factor != 0 {
            return Err(Error::InvalidParameter(format!(
                "cannot decimate {m} time samples by {factor}"
            )));
        }
        let grid = self.g.grid();
        let time = grid.axis(0);
        let kept = span / factor + usize::from(self.period.is_none());
        let mut axes = grid.axes().to_vec();
        axes[0] = match self.period {
            Some(p) => AxisSpec::periodic(p, kept, time.role),
            None => AxisSpec::bounded(
                (kept - 1) as f64 * factor as f64 * self.time_step(),
                kept,
                time.role,
            ),
        };
        let values = (0..kept)
            .flat_map(|j| self.slice(j * factor).to_vec())
            .collect();
        Ok(BoundaryData {
            g: Field::new(GridSpec::new(axes)?, values)?,
            period: self.period,
            initial_rate: self.initial_rate.clone(),
        })
    }

    pub fn samples(&self) -> &Field {
        &self.g
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn time_step(&self) -> f64 {
        self.g.grid().axis(0).spacing()
    }

    pub fn time_samples(&self) -> usize {
        self.g.grid().axis(0).points
    }

    pub fn is_zero(&self) -> bool {
        self.g.max_abs() == 0.0
    }

    /// Number of transverse samples per time slice.
    pub fn slice_len(&self) -> usize {
        self.g.grid().stride(0)
    }

    pub fn slice(&self, j: usize) -> &[f64] {
        let n = self.slice_len();
        &self.g.values()[j * n..(j + 1) * n]
    }

    /// Slice at `t = n * dt`; `dt` must match the sample spacing.
    pub fn at_step(&self, n: usize, dt: f64) -> Result<&[f64]> {
        let h = self.time_step();
        if (dt - h).abs() > 1e-9 * h {
            return Err(Error::InvalidParameter(format!(
                "boundary samples are spaced {h}, stepper uses dt = {dt}"
            )));
        }
        let m = self.time_samples();
        match self.period {
            Some(_) => Ok(self.slice(n % m)),
            None if n < m => Ok(self.slice(n)),
            None => Err(Error::OutOfRange {
                requested: n as f64 * dt,
                available: (m - 1) as f64 * h,
            }),
        }
    }

    /// Time derivative of the trace at `t = 0`, with an estimate of its error
    /// (zero when exact or spectral).
    pub fn rate_at_start(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let s = self.slice_len();
        if let Some(r) = &self.initial_rate {
            return Ok((r.clone(), vec![0.0; s]));
        }
        match self.period {
            Some(_) => {
                let d = spectral::spectral_derivative(&self.g, 0, 1)?;
                Ok((d.values()[..s].to_vec(), vec![0.0; s]))
            }
            None => {
                let d = crate::numerics::fd::fd_derivative(&self.g, 0, 1)?;
                // Second-order one-sided difference as a local error indicator.
                let h = self.time_step();
                let v = self.g.values();
                let err = (0..s)
                    .map(|i| {
                        let low = (-3.0 * v[i] + 4.0 * v[s + i] - v[2 * s + i]) / (2.0 * h);
                        (low - d.values()[i]).abs()
                    })
                    .collect();
                Ok((d.values()[..s].to_vec(), err))
            }
        }
    }
}

/// Damping layer `sigma(x1)` over the deepest `fraction` of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpongeConfig {
    pub fraction: f64,
    /// Peak damping rate; `None` selects [`SpongeConfig::default_strength`].
    pub strength: Option<f64>,
}

impl Default for SpongeConfig {
    fn default() -> Self {
        SpongeConfig {
            fraction: 0.15,
            strength: None,
        }
    }
}

fn smootherstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

impl SpongeConfig {
    /// Peak rate `20 c / width`. Amplitude reflection is below 1e-3 once the layer is two
    /// wavelengths wide and near 1e-4 at four.
    pub fn default_strength(c: f64, width: f64) -> f64 {
        20.0 * c / width
    }

    pub fn start(&self, depth: f64) -> f64 {
        depth * (1.0 - self.fraction)
    }

    pub fn profile(&self, coords: &[f64], depth: f64, c: f64) -> Vec<f64> {
        let width = self.fraction * depth;
        if width <= 0.0 {
            return vec![0.0; coords.len()];
        }
        let peak = self
            .strength
            .unwrap_or_else(|| Self::default_strength(c, width));
        let x0 = self.start(depth);
        coords
            .iter()
            .map(|&x| peak * smootherstep((x - x0) / width))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(Error::InvalidParameter(format!(
                "sponge fraction must lie in [0, 1), got {}",
                self.fraction
            )));
        }
        if let Some(s) = self.strength {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "sponge strength must be non-negative, got {s}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct IbvpOptions {
    pub stepper: StepperOptions,
    pub sponge: SpongeConfig,
}

pub(crate) struct HalfSpace {
    grid: GridSpec,
    depth_points: usize,
    /// Samples per depth slice (product of the transverse sizes).
    slice: usize,
    trans_axes: Vec<usize>,
    d1: Stencils,
    d2: Stencils,
    k2: Vec<f64>,
    ik: Vec<Vec<f64>>,
    keep: Vec<bool>,
    sigma: Vec<f64>,
    solvers: Vec<BandedLu>,
    slice_grid: Option<GridSpec>,
    /// Coefficient of `-Lap` in the implicit operator.
    b: f64,
}

pub(crate) fn check_half_space(grid: &GridSpec) -> Result<()> {
    grid.require_bounded(0)?;
    for ax in 1..grid.ndim() {
        grid.require_periodic(ax)?;
    }
    Ok(())
}

impl HalfSpace {
    pub fn new(
        grid: &GridSpec,
        lin: &LinearCoefficients,
        sponge: &SpongeConfig,
        c: f64,
    ) -> Result<Self> {
        check_half_space(grid)?;
        sponge.validate()?;
        let depth = grid.axis(0);
        let n = depth.points;
        let h = depth.spacing();
        let d1 = Stencils::bounded(n, h, 1)?;
        let d2 = Stencils::bounded(n, h, 2)?;
        let slice = grid.stride(0);
        let trans_axes: Vec<usize> = (1..grid.ndim()).collect();
        let mut k2 = vec![0.0; slice];
        let mut ik = vec![vec![0.0; slice]; trans_axes.len()];
        let mut keep = vec![true; slice];
        for (j, &ax) in trans_axes.iter().enumerate() {
            let ks = grid.axis(ax).wavenumbers();
            let np = grid.axis(ax).points;
            for t in 0..slice {
                let m = axis_index(grid, ax, t);
                k2[t] += ks[m] * ks[m];
                ik[j][t] = if is_nyquist(m, np) { 0.0 } else { ks[m] };
                keep[t] &= kept_by_two_thirds(m, np);
            }
        }
        let sigma_line = sponge.profile(&depth.coordinates(), depth.extent, c);
        let mut sigma = vec![0.0; grid.len()];
        for (j, s) in sigma_line.iter().enumerate() {
            sigma[j * slice..(j + 1) * slice].fill(*s);
        }
        let a = lin.implicit_a();
        let b = lin.implicit_b();
        let dt = lin.dt;
        let interior = n - 2;
        let bw = d2.bandwidth();
        let mut solvers = Vec::with_capacity(slice);
        for &kk in &k2 {
            let mut m = BandedMatrix::zeros(interior, bw, bw);
            for row in 0..interior {
                let node = row + 1;
                let diag = a + sigma_line[node] / (2.0 * dt) + b * kk;
                m.add(row, row, Complex64::new(diag, 0.0));
                let (first, w) = d2.row(node);
                for (jj, wj) in w.iter().enumerate() {
                    let col = first + jj;
                    if col >= 1 && col <= interior {
                        m.add(row, col - 1, Complex64::new(-b * wj, 0.0));
                    }
                }
            }
            solvers.push(m.factor()?);
        }
        Ok(HalfSpace {
            grid: grid.clone(),
            depth_points: n,
            slice,
            trans_axes,
            d1,
            d2,
            k2,
            ik,
            keep,
            sigma,
            solvers,
            slice_grid: if grid.ndim() > 1 {
                Some(GridSpec::new(grid.axes()[1..].to_vec())?)
            } else {
                None
            },
            b,
        })
    }

    fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        spectral::forward(u, &self.grid, &self.trans_axes)
    }

    fn inverse(&self, d: Vec<Complex64>) -> Vec<f64> {
        spectral::inverse(d, &self.grid, &self.trans_axes)
    }

    fn depth_derivative(&self, st: &Stencils, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for t in 0..self.slice {
            st.apply_strided(u, t, self.slice, &mut out);
        }
        out
    }

    fn truncate(&self, d: &mut [Complex64]) {
        for (i, c) in d.iter_mut().enumerate() {
            if !self.keep[i % self.slice] {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn transverse_derivatives(&self, u: &[f64]) -> Vec<Vec<f64>> {
        if self.trans_axes.is_empty() {
            return Vec::new();
        }
        let mut uh = self.forward(u);
        self.truncate(&mut uh);
        self.ik
            .iter()
            .map(|ik| {
                self.inverse(
                    uh.iter()
                        .enumerate()
                        .map(|(i, c)| c * Complex64::new(0.0, ik[i % self.slice]))
                        .collect(),
                )
            })
            .collect()
    }
}

impl Discretization for HalfSpace {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.depth_derivative(&self.d2, u);
        if !self.trans_axes.is_empty() {
            let mut d = self.forward(u);
            for (i, c) in d.iter_mut().enumerate() {
                *c *= -self.k2[i % self.slice];
            }
            for (o, t) in out.iter_mut().zip(self.inverse(d)) {
                *o += t;
            }
        }
        out
    }

    fn grad_dot(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let du = self.depth_derivative(&self.d1, u);
        let dv = self.depth_derivative(&self.d1, v);
        let mut out: Vec<f64> = du.iter().zip(&dv).map(|(a, b)| a * b).collect();
        let tu = self.transverse_derivatives(u);
        let tv = self.transverse_derivatives(v);
        for (a, b) in tu.iter().zip(&tv) {
            for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                *o += x * y;
            }
        }
        out
    }

    fn dealias(&self, f: &mut Vec<f64>) {
        if self.trans_axes.is_empty() {
            return;
        }
        let mut d = self.forward(f);
        self.truncate(&mut d);
        *f = self.inverse(d);
    }

    fn solve(&self, rhs: Vec<f64>, boundary: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.depth_points;
        let s = self.slice;
        let rh = self.forward(&rhs);
        let gh = match (boundary, &self.slice_grid) {
            (Some(g), Some(sg)) => spectral::forward(g, sg, &shifted(&self.trans_axes)),
            (Some(g), None) => g.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            (None, _) => vec![Complex64::new(0.0, 0.0); s],
        };
        let mut out = vec![Complex64::new(0.0, 0.0); rh.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n - 2];
        for t in 0..s {
            for row in 0..n - 2 {
                line[row] = rh[(row + 1) * s + t];
            }
            // Known face value moves to the right-hand side.
            let g0 = gh[t];
            if g0 != Complex64::new(0.0, 0.0) {
                for row in 0..n - 2 {
                    let (first, w) = self.d2.row(row + 1);
                    if first == 0 {
                        line[row] += self.b * w[0] * g0;
                    }
                }
            }
            self.solvers[t].solve_in_place(&mut line);
            out[t] = g0;
            for row in 0..n - 2 {
                out[(row + 1) * s + t] = line[row];
            }
        }
        Ok(self.inverse(out))
    }

    fn damping(&self) -> Option<&[f64]> {
        Some(&self.sigma)
    }

    fn impose(&self, u: &mut [f64], boundary: Option<&[f64]>) {
        let s = self.slice;
        let n = self.depth_points;
        match boundary {
            Some(g) => u[..s].copy_from_slice(g),
            None => u[..s].fill(0.0),
        }
        u[(n - 1) * s..].fill(0.0);
    }
}

fn shifted(axes: &[usize]) -> Vec<usize> {
    axes.iter().map(|a| a - 1).collect()
}

/// Checks that the boundary data match the domain's transverse axes.
pub(crate) fn check_boundary_shape(grid: &GridSpec, g: &BoundaryData) -> Result<()> {
    let gg = g.samples().grid();
    let same = gg.ndim() == grid.ndim()
        && gg.axes()[1..].iter().zip(&grid.axes()[1..]).all(|(a, b)| {
            a.points == b.points
                && a.kind == b.kind
                && (a.extent - b.extent).abs() <= 1e-12 * b.extent
        });
    if !same {
        return Err(Error::GridMismatch(format!(
            "boundary data shape {:?} does not match domain {:?}",
            gg.shape(),
            grid.shape()
        )));
    }
    Ok(())
}

/// Absolute tolerance (scaled by the data magnitude) for the trace compatibility checks.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

fn check_compatibility(u0: &Field, u1: &Field, g: &BoundaryData) -> Result<()> {
    let s = g.slice_len();
    let g0 = g.slice(0);
    let (gt, gt_err) = g.rate_at_start()?;
    let scale0 = u0.max_abs().max(1.0);
    let scale1 = u1.max_abs().max(1.0);
    let e0 = g0
        .iter()
        .zip(&u0.values()[..s])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if e0 > COMPATIBILITY_TOL * scale0 {
        return Err(Error::Compatibility(format!(
            "g(0) differs from u0 on the face by {e0:e}"
        )));
    }
    let e1 = gt
        .iter()
        .zip(&gt_err)
        .zip(&u1.values()[..s])
        .map(|((a, err), b)| ((a - b).abs() - err).max(0.0))
        .fold(0.0, f64::max);
    if e1 > COMPATIBILITY_TOL * scale1 {
        return Err(Error::Compatibility(format!(
            "g_t(0) differs from u1 on the face by {e1:e}"
        )));
    }
    Ok(())
}

/// Either model on the truncated half space with explicit options.
#[allow(clippy::too_many_arguments)]
pub fn solve_ibvp(
    model: WaveModel,
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    g: &BoundaryData,
    dt: f64,
    horizon: f64,
    options: &IbvpOptions,
) -> Result<Trajectory> {
    params.validate()?;
    u0.check_same_grid(u1)?;
    let grid = u0.grid();
    check_half_space(grid)?;
    check_boundary_shape(grid, g)?;
    check_compatibility(u0, u1, g)?;
    let nsteps = check_step(dt, horizon)?;
    check_cfl(grid, params, dt)?;
    // Reject short data up front rather than mid-run.
    g.at_step(nsteps, dt)?;
    let lin = LinearCoefficients::new(params, dt);
    let disc = HalfSpace::new(grid, &lin, &options.sponge, params.c)?;
    let lp = TimeLoop {
        disc: &disc,
        params: *params,
        model,
        options: options.stepper,
        lin,
    };
    lp.run(u0, u1, nsteps, &|n| Ok(Some(g.at_step(n, dt)?.to_vec())))
}

/// Kuznetsov equation on `[0, X] x torus` with `u = g` at `x1 = 0` and the default sponge.
pub fn solve_kuznetsov_ibvp(
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    g: &BoundaryData,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    solve_ibvp(
        WaveModel::Kuznetsov,
        params,
        u0,
        u1,
        g,
        dt,
        horizon,
        &IbvpOptions::default(),
    )
}

/// Depth index where the sponge starts; samples from here on are excluded from error metrics.
pub fn sponge_start_index(grid: &GridSpec, sponge: &SpongeConfig) -> usize {
    let depth = grid.axis(0);
    if depth.kind != AxisKind::Bounded {
        return depth.points;
    }
    let x0 = sponge.start(depth.extent);
    depth
        .coordinates()
        .iter()
        .position(|&x| x >= x0 - 1e-12 * depth.extent)
        .unwrap_or(depth.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{AxisRole, AxisSpec};
    use std::f64::consts::PI;

    fn domain(depth: f64, n: usize) -> GridSpec {
        GridSpec::new(vec![
            AxisSpec::bounded(depth, n, AxisRole::Propagation),
            AxisSpec::periodic(2.0 * PI, 8, AxisRole::Transverse),
        ])
        .unwrap()
    }

    fn sampled_trace(m: usize, dt: f64, f: impl Fn(f64, f64) -> f64) -> BoundaryData {
        let g = GridSpec::new(vec![
            AxisSpec::bounded((m - 1) as f64 * dt, m, AxisRole::TimeLike),
            AxisSpec::periodic(2.0 * PI, 8, AxisRole::Transverse),
        ])
        .unwrap();
        BoundaryData::sampled(Field::from_fn(&g, |x| f(x[0], x[1]))).unwrap()
    }

    #[test]
    fn zero_problem_stays_zero() {
        let g = domain(4.0, 41);
        let z = Field::zeros(&g);
        let bd = sampled_trace(101, 0.01, |_, _| 0.0);
        let t = solve_kuznetsov_ibvp(&ModelParams::default(), &z, &z, &bd, 0.01, 1.0).unwrap();
        assert!(t.frames().iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn incompatible_data_rejected() {
        let g = domain(4.0, 41);
        let z = Field::zeros(&g);
        let bd = sampled_trace(101, 0.01, |t, _| 1.0 + t);
        let err = solve_kuznetsov_ibvp(&ModelParams::default(), &z, &z, &bd, 0.01, 1.0);
        assert!(matches!(err, Err(Error::Compatibility(_))));
    }

    #[test]
    fn periodic_data_needs_zero_mean() {
        let g = GridSpec::new(vec![
            AxisSpec::periodic(1.0, 16, AxisRole::TimeLike),
            AxisSpec::periodic(1.0, 8, AxisRole::Transverse),
        ])
        .unwrap();
        assert!(BoundaryData::periodic(Field::from_fn(&g, |x| 1.0 + x[0])).is_err());
        assert!(BoundaryData::periodic(Field::from_fn(&g, |x| (2.0 * PI * x[0]).sin())).is_ok());
    }

    #[test]
    fn sponge_profile_shape() {
        let cfg = SpongeConfig::default();
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
        let s = cfg.profile(&xs, 10.0, 1.0);
        assert!(s[..=85].iter().all(|&v| v == 0.0));
        assert!((s[100] - 20.0 / 1.5).abs() < 1e-12);
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
    }
}
