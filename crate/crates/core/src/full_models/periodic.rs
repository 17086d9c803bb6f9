//! Time-periodic regime of the boundary-driven half-space problem, reached by
//! integrating from rest until consecutive periods agree.

use crate::error::{Error, Result};
use crate::full_models::ibvp::{check_boundary_shape, check_half_space, HalfSpace, SpongeConfig};
use crate::full_models::ivp::check_cfl;
use crate::full_models::stepper::{LinearCoefficients, StepperOptions, TimeLoop, WaveModel};
use crate::full_models::BoundaryData;
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::GridSpec;
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicRegimeOptions {
    /// Length of the smooth switch-on of the boundary data, in periods.
    pub ramp_periods: f64,
    /// Give up after this many periods.
    pub max_periods: usize,
    pub sponge: SpongeConfig,
    pub nonlinear: bool,
}

impl Default for PeriodicRegimeOptions {
    fn default() -> Self {
        PeriodicRegimeOptions {
            ramp_periods: 4.0,
            max_periods: 200,
            sponge: SpongeConfig::default(),
            nonlinear: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicRegime {
    /// One period of the converged solution: `M` frames spaced `period / M`.
    pub window: Trajectory,
    /// Whole periods integrated before the accepted window.
    pub transient_periods: usize,
    /// Relative L2 change between the accepted window and the one before it.
    pub change: f64,
    pub tol: f64,
}

fn switch_on(t: f64, ramp: f64) -> f64 {
    if ramp <= 0.0 {
        return 1.0;
    }
    let s = (t / ramp).clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

fn relative_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (fa, fb) in a.iter().zip(b) {
        for (x, y) in fa.iter().zip(fb) {
            diff += (x - y) * (x - y);
            norm += x * x;
        }
    }
    if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / norm).sqrt()
    }
}

/// Integrates the Kuznetsov half-space problem from rest under the periodic trace `g`
/// (switched on smoothly) and returns the first period whose relative L2 change from the
/// previous period is at most `tol`.
pub fn extract_periodic_regime(
    params: &ModelParams,
    domain: &GridSpec,
    g: &BoundaryData,
    tol: f64,
    options: &PeriodicRegimeOptions,
) -> Result<PeriodicRegime> {
    params.validate()?;
    if params.nu <= 0.0 {
        return Err(Error::InvalidParameter(
            "the periodic regime needs nu > 0".into(),
        ));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let period = g.period().ok_or_else(|| {
        Error::InvalidParameter("the periodic regime needs time-periodic boundary data".into())
    })?;
    check_half_space(domain)?;
    check_boundary_shape(domain, g)?;
    let m = g.time_samples();
    let dt = period / m as f64;
    check_cfl(domain, params, dt)?;

    if g.is_zero() {
        let frames = vec![Field::zeros(domain); m];
        return Ok(PeriodicRegime {
            window: Trajectory::new(domain.clone(), dt, 0.0, frames, MarchAxis::Time)?,
            transient_periods: 0,
            change: 0.0,
            tol,
        });
    }

    let lin = LinearCoefficients::new(params, dt);
    let disc = HalfSpace::new(domain, &lin, &options.sponge, params.c)?;
    let lp = TimeLoop {
        disc: &disc,
        params: *params,
        model: WaveModel::Kuznetsov,
        options: StepperOptions {
            nonlinear: options.nonlinear,
            record_every: 1,
        },
        lin,
    };
    let ramp = options.ramp_periods * period;
    let ramp_done = (options.ramp_periods.max(0.0)).ceil() as usize;
    let boundary = |n: usize| -> Result<Option<Vec<f64>>> {
        let s = switch_on(n as f64 * dt, ramp);
        Ok(Some(g.at_step(n, dt)?.iter().map(|v| s * v).collect()))
    };

    let zero = Field::zeros(domain);
    let mut previous: Option<Vec<Vec<f64>>> = None;
    let mut current: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut accepted: Option<(usize, Vec<Vec<f64>>, f64)> = None;
    let mut last_change = f64::INFINITY;
    let nsteps = (options.max_periods + 1) * m;
    lp.run_observed(&zero, &zero, nsteps, &boundary, &mut |n, u| {
        if current.len() == m {
            let p = n / m - 1;
            let done = std::mem::replace(&mut current, Vec::with_capacity(m));
            if let Some(prev) = &previous {
                if p >= ramp_done {
                    last_change = relative_change(&done, prev);
                    if last_change <= tol {
                        accepted = Some((p, done, last_change));
                        return Ok(false);
                    }
                }
            }
            previous = Some(done);
        }
        current.push(u.to_vec());
        Ok(true)
    })?;
    let (p, frames, change) = accepted.ok_or(Error::RegimeNotReached {
        periods: options.max_periods,
        change: last_change,
        tol,
    })?;
    let frames = frames
        .into_iter()
        .map(|v| Field::from_parts(domain.clone(), v))
        .collect();
    Ok(PeriodicRegime {
        window: Trajectory::new(
            domain.clone(),
            dt,
            p as f64 * period,
            frames,
            MarchAxis::Time,
        )?,
        transient_periods: p,
        change,
        tol,
    })
}
