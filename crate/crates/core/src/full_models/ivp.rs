//! Cauchy problems on the torus, where the implicit solve is diagonal in Fourier space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::full_models::stepper::{
    check_step, Discretization, LinearCoefficients, StepperOptions, TimeLoop, WaveModel,
};
use crate::numerics::field::{Field, Trajectory};
use crate::numerics::grid::GridSpec;
use crate::numerics::spectral::{self, axis_index, is_nyquist, kept_by_two_thirds};
use crate::params::ModelParams;

/// Advective step limit `dt <= CFL * min spacing / c`.
pub const CFL: f64 = 0.5;

pub(crate) fn check_cfl(grid: &GridSpec, params: &ModelParams, dt: f64) -> Result<()> {
    let h = grid
        .axes()
        .iter()
        .map(|a| a.spacing())
        .fold(f64::INFINITY, f64::min);
    let limit = CFL * h / params.c;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} exceeds the step limit {limit:.6e} (0.5 * dx_min / c)"
        )));
    }
    Ok(())
}

pub(crate) struct Torus {
    grid: GridSpec,
    axes: Vec<usize>,
    k2: Vec<f64>,
    /// First-derivative symbol per axis (Nyquist removed), indexed by flat offset.
    ik: Vec<Vec<f64>>,
    keep: Vec<bool>,
    a: f64,
    b: f64,
}

impl Torus {
    pub fn new(grid: &GridSpec, lin: &LinearCoefficients) -> Result<Self> {
        if let Some(axis) = grid.axes().iter().position(|a| !a.is_periodic()) {
            return Err(Error::UnsupportedAxis {
                axis,
                expected: "periodic",
                found: "bounded",
            });
        }
        let axes: Vec<usize> = (0..grid.ndim()).collect();
        let ks: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.wavenumbers()).collect();
        let n = grid.len();
        let mut k2 = vec![0.0; n];
        let mut ik = vec![vec![0.0; n]; axes.len()];
        let mut keep = vec![true; n];
        for flat in 0..n {
            for &ax in &axes {
                let m = axis_index(grid, ax, flat);
                let npts = grid.axis(ax).points;
                let k = ks[ax][m];
                k2[flat] += k * k;
                ik[ax][flat] = if is_nyquist(m, npts) { 0.0 } else { k };
                keep[flat] &= kept_by_two_thirds(m, npts);
            }
        }
        Ok(Torus {
            grid: grid.clone(),
            axes,
            k2,
            ik,
            keep,
            a: lin.implicit_a(),
            b: lin.implicit_b(),
        })
    }

    fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        spectral::forward(u, &self.grid, &self.axes)
    }

    fn inverse(&self, d: Vec<Complex64>) -> Vec<f64> {
        spectral::inverse(d, &self.grid, &self.axes)
    }

    fn truncated(&self, u: &[f64]) -> Vec<Complex64> {
        let mut d = self.forward(u);
        for (c, &k) in d.iter_mut().zip(&self.keep) {
            if !k {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        d
    }
}

impl Discretization for Torus {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut d = self.forward(u);
        for (c, k2) in d.iter_mut().zip(&self.k2) {
            *c *= -k2;
        }
        self.inverse(d)
    }

    fn grad_dot(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let uh = self.truncated(u);
        let vh = self.truncated(v);
        let mut out = vec![0.0; u.len()];
        for ik in &self.ik {
            let du = self.inverse(
                uh.iter()
                    .zip(ik)
                    .map(|(c, k)| c * Complex64::new(0.0, *k))
                    .collect(),
            );
            let dv = self.inverse(
                vh.iter()
                    .zip(ik)
                    .map(|(c, k)| c * Complex64::new(0.0, *k))
                    .collect(),
            );
            for ((o, a), b) in out.iter_mut().zip(&du).zip(&dv) {
                *o += a * b;
            }
        }
        out
    }

    fn dealias(&self, f: &mut Vec<f64>) {
        let d = self.truncated(f);
        *f = self.inverse(d);
    }

    fn solve(&self, rhs: Vec<f64>, _boundary: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut d = self.forward(&rhs);
        for (c, k2) in d.iter_mut().zip(&self.k2) {
            *c /= self.a + self.b * k2;
        }
        Ok(self.inverse(d))
    }

    fn damping(&self) -> Option<&[f64]> {
        None
    }
}

fn check_data(u0: &Field, u1: &Field) -> Result<()> {
    u0.check_same_grid(u1)?;
    if !(u0.is_finite() && u1.is_finite()) {
        return Err(Error::NonFinite("initial data"));
    }
    Ok(())
}

/// Periodic Cauchy problem for either model, with explicit options.
pub fn solve_ivp(
    model: WaveModel,
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    dt: f64,
    horizon: f64,
    options: StepperOptions,
) -> Result<Trajectory> {
    params.validate()?;
    check_data(u0, u1)?;
    let nsteps = check_step(dt, horizon)?;
    check_cfl(u0.grid(), params, dt)?;
    let lin = LinearCoefficients::new(params, dt);
    let disc = Torus::new(u0.grid(), &lin)?;
    let lp = TimeLoop {
        disc: &disc,
        params: *params,
        model,
        options,
        lin,
    };
    lp.run(u0, u1, nsteps, &|_| Ok(None))
}

/// Kuznetsov equation on the torus from `u(0) = u0`, `u_t(0) = u1`, frames at every `dt`.
pub fn solve_kuznetsov_ivp(
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    solve_ivp(
        WaveModel::Kuznetsov,
        params,
        u0,
        u1,
        dt,
        horizon,
        StepperOptions::default(),
    )
}

/// Westervelt equation on the torus from `p(0) = p0`, `p_t(0) = p1`, frames at every `dt`.
pub fn solve_westervelt_ivp(
    params: &ModelParams,
    p0: &Field,
    p1: &Field,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    solve_ivp(
        WaveModel::Westervelt,
        params,
        p0,
        p1,
        dt,
        horizon,
        StepperOptions::default(),
    )
}
