//! Three-level semi-implicit time stepping for the quasilinear wave models.
//!
//! Both models share the form
//! `(1 - a eps u_t) u_tt + s u_t = c^2 Lap u + visc eps Lap u_t + b eps grad u . grad u_t`
//! with `(a, b) = ((gamma-1)/c^2, 2)` for Kuznetsov and `((gamma+1)/c^2, 0)` for Westervelt,
//! and `s` a sponge profile (zero on the torus). The wave and viscous terms are implicit,
//! the remaining products explicit with the quasilinear factor frozen at the current step.

use crate::error::{Error, Result};
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::GridSpec;
use crate::params::ModelParams;

/// Allowed range of the quasilinear factor before the stepper aborts.
pub const FACTOR_RANGE: (f64, f64) = (0.25, 4.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaveModel {
    Kuznetsov,
    Westervelt,
}

impl WaveModel {
    pub fn name(self) -> &'static str {
        match self {
            WaveModel::Kuznetsov => "kuznetsov",
            WaveModel::Westervelt => "westervelt",
        }
    }

    /// `(a, b)`: coefficients of `u_t u_tt` and `grad u . grad u_t`.
    pub fn quasilinear_coefficients(self, params: &ModelParams) -> (f64, f64) {
        match self {
            WaveModel::Kuznetsov => (params.alpha(), params.beta()),
            WaveModel::Westervelt => (params.westervelt_alpha(), 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperOptions {
    /// Include the quadratic terms; off gives the linear strongly damped wave equation.
    pub nonlinear: bool,
    /// Store every `record_every`-th step.
    pub record_every: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            nonlinear: true,
            record_every: 1,
        }
    }
}

/// Spatial discretization plugged into the time loop.
pub(crate) trait Discretization {
    fn grid(&self) -> &GridSpec;
    fn laplacian(&self, u: &[f64]) -> Vec<f64>;
    /// `grad u . grad v` with de-aliased factors and product.
    fn grad_dot(&self, u: &[f64], v: &[f64]) -> Vec<f64>;
    fn dealias(&self, f: &mut Vec<f64>);
    /// Solves `(1/dt^2 + s/(2dt)) w - b Lap w = rhs`, imposing `boundary` where applicable.
    fn solve(&self, rhs: Vec<f64>, boundary: Option<&[f64]>) -> Result<Vec<f64>>;
    fn damping(&self) -> Option<&[f64]>;
    /// Sets the Dirichlet values of `u` in place.
    fn impose(&self, _u: &mut [f64], _boundary: Option<&[f64]>) {}
}

/// Linear coefficients shared by every model; independent of the quasilinear terms.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LinearCoefficients {
    pub dt: f64,
    pub c2: f64,
    pub visc_eps: f64,
}

impl LinearCoefficients {
    pub fn new(params: &ModelParams, dt: f64) -> Self {
        LinearCoefficients {
            dt,
            c2: params.c * params.c,
            visc_eps: params.visc() * params.eps,
        }
    }

    /// Coefficient of `-Lap` on the new level.
    pub fn implicit_b(&self) -> f64 {
        self.c2 / 4.0 + self.visc_eps / (2.0 * self.dt)
    }

    pub fn implicit_a(&self) -> f64 {
        1.0 / (self.dt * self.dt)
    }
}

pub(crate) fn check_step(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    Ok((horizon / dt - 1e-9).ceil().max(0.0) as usize)
}

/// Boundary values at step `n`, if the discretization has a Dirichlet face.
pub(crate) type BoundarySource<'a> = dyn Fn(usize) -> Result<Option<Vec<f64>>> + 'a;

pub(crate) struct TimeLoop<'a, D: Discretization> {
    pub disc: &'a D,
    pub params: ModelParams,
    pub model: WaveModel,
    pub options: StepperOptions,
    pub lin: LinearCoefficients,
}

impl<'a, D: Discretization> TimeLoop<'a, D> {
    fn factor_check(&self, v: &[f64], a: f64, time: f64) -> Result<Vec<f64>> {
        let eps = self.params.eps;
        let mut out = Vec::with_capacity(v.len());
        for &vi in v {
            let factor = 1.0 - a * eps * vi;
            if !(FACTOR_RANGE.0..=FACTOR_RANGE.1).contains(&factor) || !factor.is_finite() {
                return Err(Error::Degeneracy { factor, time });
            }
            out.push(factor);
        }
        Ok(out)
    }

    fn nonlinear_active(&self) -> bool {
        self.options.nonlinear && self.params.eps != 0.0
    }

    /// Acceleration `u_tt` implied by the PDE at a level with rate `v`, and the
    /// gradient product `grad u . grad v` it used (zero when not needed).
    fn acceleration(
        &self,
        u: &[f64],
        u_lap: &[f64],
        v: &[f64],
        time: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.disc;
        let nl = self.nonlinear_active();
        let (a, b) = self.model.quasilinear_coefficients(&self.params);
        let eps = self.params.eps;
        let v_lap = d.laplacian(v);
        let gd = if nl && b != 0.0 {
            d.grad_dot(u, v)
        } else {
            vec![0.0; u.len()]
        };
        let factor = if nl {
            Some(self.factor_check(v, a, time)?)
        } else {
            None
        };
        let damping = d.damping();
        let acc = (0..u.len())
            .map(|i| {
                let mut r = self.lin.c2 * u_lap[i] + self.lin.visc_eps * v_lap[i];
                if nl {
                    r += b * eps * gd[i];
                }
                if let Some(s) = damping {
                    r -= s[i] * v[i];
                }
                match &factor {
                    Some(f) => r / f[i],
                    None => r,
                }
            })
            .collect();
        Ok((acc, gd))
    }

    /// Nonlinear forcing `eps (a v u_tt + b grad u . grad v)`.
    fn forcing(&self, u: &[f64], u_lap: &[f64], v: &[f64], time: f64) -> Result<Vec<f64>> {
        let (a, b) = self.model.quasilinear_coefficients(&self.params);
        let eps = self.params.eps;
        let (acc, gd) = self.acceleration(u, u_lap, v, time)?;
        let mut f: Vec<f64> = (0..u.len())
            .map(|i| eps * (a * v[i] * acc[i] + b * gd[i]))
            .collect();
        self.disc.dealias(&mut f);
        Ok(f)
    }

    /// Runs `nsteps` steps from `(u0, u1)` and stores every `record_every`-th level.
    pub fn run(
        &self,
        u0: &Field,
        u1: &Field,
        nsteps: usize,
        boundary: &BoundarySource<'_>,
    ) -> Result<Trajectory> {
        let grid = self.disc.grid().clone();
        let every = self.options.record_every.max(1);
        let mut frames = Vec::with_capacity(nsteps / every + 1);
        self.run_observed(u0, u1, nsteps, boundary, &mut |n, u| {
            if n % every == 0 {
                frames.push(Field::from_parts(grid.clone(), u.to_vec()));
            }
            Ok(true)
        })?;
        Trajectory::new(
            grid,
            self.lin.dt * every as f64,
            0.0,
            frames,
            MarchAxis::Time,
        )
    }

    /// Runs up to `nsteps` steps, handing every level `u^n` to `observe`; stops early
    /// when `observe` returns `false`.
    pub fn run_observed(
        &self,
        u0: &Field,
        u1: &Field,
        nsteps: usize,
        boundary: &BoundarySource<'_>,
        observe: &mut dyn FnMut(usize, &[f64]) -> Result<bool>,
    ) -> Result<()> {
        let d = self.disc;
        let dt = self.lin.dt;

        let mut u_prev = u0.values().to_vec();
        d.impose(&mut u_prev, boundary(0)?.as_deref());
        if !observe(0, &u_prev)? || nsteps == 0 {
            return Ok(());
        }
        let lap_prev0 = d.laplacian(&u_prev);

        // Taylor start: u(dt) = u0 + dt u1 + dt^2/2 a0 + dt^3/6 j0, with the linear jerk j0.
        let v0 = u1.values();
        let (a0, _) = self.acceleration(&u_prev, &lap_prev0, v0, 0.0)?;
        let a0_lap = d.laplacian(&a0);
        let v0_lap = d.laplacian(v0);
        let damping = d.damping();
        let jerk: Vec<f64> = (0..a0.len())
            .map(|i| {
                let mut j = self.lin.c2 * v0_lap[i] + self.lin.visc_eps * a0_lap[i];
                if let Some(s) = damping {
                    j -= s[i] * a0[i];
                }
                j
            })
            .collect();
        let mut u_curr: Vec<f64> = (0..a0.len())
            .map(|i| u_prev[i] + dt * v0[i] + 0.5 * dt * dt * a0[i] + dt * dt * dt / 6.0 * jerk[i])
            .collect();
        d.impose(&mut u_curr, boundary(1)?.as_deref());
        if u_curr.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("time stepper"));
        }
        let mut v_start: Vec<f64> = (0..a0.len())
            .map(|i| v0[i] + dt * a0[i] + 0.5 * dt * dt * jerk[i])
            .collect();
        if !observe(1, &u_curr)? {
            return Ok(());
        }

        let mut u_prev2: Option<Vec<f64>> = None;
        let mut lap_prev = lap_prev0;
        let mut lap_curr = d.laplacian(&u_curr);
        let a_imp = self.lin.implicit_a();
        let c2 = self.lin.c2;
        let ve = self.lin.visc_eps;
        for n in 1..nsteps {
            let time = n as f64 * dt;
            let forcing = if self.nonlinear_active() {
                let v: Vec<f64> = match &u_prev2 {
                    None => std::mem::take(&mut v_start),
                    Some(u2) => (0..u_curr.len())
                        .map(|i| (3.0 * u_curr[i] - 4.0 * u_prev[i] + u2[i]) / (2.0 * dt))
                        .collect(),
                };
                Some(self.forcing(&u_curr, &lap_curr, &v, time)?)
            } else {
                None
            };
            let mut rhs = Vec::with_capacity(u_curr.len());
            for i in 0..u_curr.len() {
                let mut r = 2.0 * a_imp * u_curr[i] + 0.5 * c2 * lap_curr[i] - a_imp * u_prev[i]
                    + (0.25 * c2 - ve / (2.0 * dt)) * lap_prev[i];
                if let Some(s) = damping {
                    r += s[i] / (2.0 * dt) * u_prev[i];
                }
                if let Some(f) = &forcing {
                    r += f[i];
                }
                rhs.push(r);
            }
            let u_next = d.solve(rhs, boundary(n + 1)?.as_deref())?;
            if u_next.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("time stepper"));
            }
            let lap_next = d.laplacian(&u_next);
            let keep_going = observe(n + 1, &u_next)?;
            u_prev2 = Some(std::mem::replace(
                &mut u_prev,
                std::mem::replace(&mut u_curr, u_next),
            ));
            lap_prev = std::mem::replace(&mut lap_curr, lap_next);
            if !keep_going {
                break;
            }
        }
        Ok(())
    }
}
