//! Integrating-factor Runge-Kutta march shared by the KZK and NPE equations.
//!
//! Both reduce to `q_s = a d_x(q^2) + d q_xx + f d_x^{-1} Lap_y q` on a grid whose first
//! axis `x` is periodic with zero-mean data. The linear part is diagonal in Fourier space
//! and integrated exactly; the quadratic term is explicit and de-aliased.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::GridSpec;
use crate::numerics::norm::{hs_norm, l2_norm_all};
use crate::numerics::spectral::{self, axis_index, is_nyquist, kept_by_two_thirds};

/// Which terms of the reduced equation are active.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarchOptions {
    pub nonlinear: bool,
    pub diffusion: bool,
    pub diffraction: bool,
    /// Bound on the initial `H^2` norm; `None` selects `0.1 * rho0`.
    pub smallness_gate: Option<f64>,
    pub record_every: usize,
}

impl Default for MarchOptions {
    fn default() -> Self {
        MarchOptions {
            nonlinear: true,
            diffusion: true,
            diffraction: true,
            smallness_gate: None,
            record_every: 1,
        }
    }
}

/// A march plus diagnostics gathered on the way.
#[derive(Clone, Debug)]
pub struct MarchRun {
    pub trajectory: Trajectory,
    /// L2 norm after every step (not only recorded ones), starting with the initial norm.
    pub norms: Vec<f64>,
    /// Largest mean removed by the per-step projection.
    pub max_mean_correction: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Coefficients {
    pub advection: f64,
    pub diffusion: f64,
    pub diffraction: f64,
}

pub(crate) struct Marcher {
    grid: GridSpec,
    all_axes: Vec<usize>,
    /// Linear symbol per flat Fourier index.
    symbol: Vec<Complex64>,
    /// `i k_x` with the Nyquist mode removed.
    ddx: Vec<Complex64>,
    keep: Vec<bool>,
    advection: f64,
    nonlinear: bool,
}

impl Marcher {
    pub fn new(grid: &GridSpec, coef: Coefficients, opts: &MarchOptions) -> Result<Self> {
        for ax in 0..grid.ndim() {
            grid.require_periodic(ax)?;
        }
        let all_axes: Vec<usize> = (0..grid.ndim()).collect();
        let ks: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.wavenumbers()).collect();
        let nx = grid.axis(0).points;
        let n = grid.len();
        let mut symbol = vec![Complex64::new(0.0, 0.0); n];
        let mut ddx = vec![Complex64::new(0.0, 0.0); n];
        let mut keep = vec![true; n];
        for flat in 0..n {
            let mx = axis_index(grid, 0, flat);
            let kx = ks[0][mx];
            let mut ky2 = 0.0;
            for ax in 1..grid.ndim() {
                let m = axis_index(grid, ax, flat);
                ky2 += ks[ax][m] * ks[ax][m];
                keep[flat] &= kept_by_two_thirds(m, grid.axis(ax).points);
            }
            keep[flat] &= kept_by_two_thirds(mx, nx);
            let odd_ok = mx != 0 && !is_nyquist(mx, nx);
            if odd_ok {
                ddx[flat] = Complex64::new(0.0, kx);
            }
            let mut s = Complex64::new(0.0, 0.0);
            if opts.diffusion {
                s -= coef.diffusion * kx * kx;
            }
            if opts.diffraction && odd_ok {
                // d_x^{-1} Lap_y  ->  (-ky^2) / (i kx) = i ky^2 / kx
                s += Complex64::new(0.0, coef.diffraction * ky2 / kx);
            }
            symbol[flat] = s;
        }
        Ok(Marcher {
            grid: grid.clone(),
            all_axes,
            symbol,
            ddx,
            keep,
            advection: coef.advection,
            nonlinear: opts.nonlinear && coef.advection != 0.0,
        })
    }

    fn to_physical(&self, d: &[Complex64]) -> Vec<f64> {
        spectral::inverse(d.to_vec(), &self.grid, &self.all_axes)
    }

    /// De-aliased `advection * d_x(q^2)` in Fourier space.
    fn nonlinear_term(&self, qh: &[Complex64]) -> Vec<Complex64> {
        if !self.nonlinear {
            return vec![Complex64::new(0.0, 0.0); qh.len()];
        }
        let truncated: Vec<Complex64> = qh
            .iter()
            .zip(&self.keep)
            .map(|(c, &k)| if k { *c } else { Complex64::new(0.0, 0.0) })
            .collect();
        let q = self.to_physical(&truncated);
        let sq: Vec<f64> = q.iter().map(|v| v * v).collect();
        let mut out = spectral::forward(&sq, &self.grid, &self.all_axes);
        for ((c, d), &k) in out.iter_mut().zip(&self.ddx).zip(&self.keep) {
            *c = if k {
                *c * *d * self.advection
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        out
    }

    /// One Lawson RK4 step of size `h` in Fourier space.
    fn step(
        &self,
        qh: &[Complex64],
        e_half: &[Complex64],
        e_full: &[Complex64],
        h: f64,
    ) -> Vec<Complex64> {
        let n = qh.len();
        let a = self.nonlinear_term(qh);
        let mut tmp: Vec<Complex64> = (0..n)
            .map(|i| e_half[i] * (qh[i] + 0.5 * h * a[i]))
            .collect();
        let b = self.nonlinear_term(&tmp);
        let eq: Vec<Complex64> = (0..n).map(|i| e_half[i] * qh[i]).collect();
        for i in 0..n {
            tmp[i] = eq[i] + 0.5 * h * b[i];
        }
        let c = self.nonlinear_term(&tmp);
        for i in 0..n {
            tmp[i] = e_full[i] * qh[i] + h * e_half[i] * c[i];
        }
        let d = self.nonlinear_term(&tmp);
        (0..n)
            .map(|i| {
                e_full[i] * qh[i]
                    + h / 6.0 * (e_full[i] * a[i] + 2.0 * e_half[i] * (b[i] + c[i]) + d[i])
            })
            .collect()
    }
}

pub(crate) fn check_mean_zero(q0: &Field) -> Result<()> {
    let rms = l2_norm_all(q0) / crate::numerics::norm::domain_measure(q0.grid()).sqrt();
    let mean = spectral::max_line_mean(q0, 0);
    let limit = spectral::MEAN_ZERO_TOL * rms.max(f64::MIN_POSITIVE);
    if mean > limit {
        return Err(Error::MeanViolation {
            axis: 0,
            mean,
            limit,
        });
    }
    Ok(())
}

pub(crate) fn march(
    q0: &Field,
    coef: Coefficients,
    step: f64,
    range: f64,
    rho0: f64,
    axis: MarchAxis,
    opts: &MarchOptions,
) -> Result<MarchRun> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "march step must be positive, got {step}"
        )));
    }
    if !(range.is_finite() && range >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "march range must be non-negative, got {range}"
        )));
    }
    if !q0.is_finite() {
        return Err(Error::NonFinite("initial data"));
    }
    let grid = q0.grid();
    let marcher = Marcher::new(grid, coef, opts)?;
    check_mean_zero(q0)?;
    let gate = opts.smallness_gate.unwrap_or(0.1 * rho0);
    let h2 = hs_norm(q0, 2.0)?;
    if h2 > gate {
        return Err(Error::SmallnessGate { norm: h2, gate });
    }

    let nsteps = (range / step - 1e-9).ceil().max(0.0) as usize;
    let every = opts.record_every.max(1);
    let e_half: Vec<Complex64> = marcher
        .symbol
        .iter()
        .map(|s| (s * (0.5 * step)).exp())
        .collect();
    let e_full: Vec<Complex64> = marcher.symbol.iter().map(|s| (s * step).exp()).collect();

    let mut q = q0.clone();
    let mut max_corr = spectral::project_mean_zero(&mut q, 0);
    let initial = l2_norm_all(&q);
    let mut norms = Vec::with_capacity(nsteps + 1);
    norms.push(initial);
    let mut frames = vec![q.clone()];
    let mut qh = spectral::forward(q.values(), grid, &marcher.all_axes);
    for n in 1..=nsteps {
        qh = marcher.step(&qh, &e_half, &e_full, step);
        let mut f = Field::from_parts(grid.clone(), marcher.to_physical(&qh));
        if !f.is_finite() {
            return Err(Error::NonFinite("paraxial march"));
        }
        let corr = spectral::project_mean_zero(&mut f, 0);
        max_corr = max_corr.max(corr);
        if corr != 0.0 {
            qh = spectral::forward(f.values(), grid, &marcher.all_axes);
        }
        let norm = l2_norm_all(&f);
        if initial > 0.0 && norm > 2.0 * initial {
            return Err(Error::BlowUp {
                initial,
                current: norm,
                position: n as f64 * step,
            });
        }
        norms.push(norm);
        if n % every == 0 {
            frames.push(f);
        }
    }
    let trajectory = Trajectory::new(grid.clone(), step * every as f64, 0.0, frames, axis)?;
    Ok(MarchRun {
        trajectory,
        norms,
        max_mean_correction: max_corr,
    })
}
