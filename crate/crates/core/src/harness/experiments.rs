//! The comparison experiments E1 to E4, the identity refinement runs and the dispersion
//! check.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz_maps::{
    delta_bump_at, npe_initial_data, physical_transverse_axes, westervelt_initial_data,
    westervelt_inverse, KzkAnsatz, NpeAnsatz,
};
use crate::error::{Error, Result};
use crate::full_models::ibvp::sponge_start_index;
use crate::full_models::{
    discrepancy_energy_within, extract_periodic_regime, solve_ibvp, solve_ivp, BoundaryData,
    IbvpOptions, PeriodicRegime, PeriodicRegimeOptions, SpongeConfig, StepperOptions, WaveModel,
};
use crate::numerics::field::{Field, MarchAxis, Trajectory};
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::norm::l2_norm_all;
use crate::numerics::spectral::{
    antiderivative_mean_zero, apply_symbol, is_nyquist, spectral_derivative,
};
use crate::params::ModelParams;
use crate::paraxial_models::{kzk_march, npe_march};
use crate::remainders::{identity_check, IdentityKind, IdentityReport, Manufactured};
use crate::series::ErrorSeries;

use super::config::{ExperimentConfig, ExperimentId};

/// Upper bound on stored frames per trajectory; the record interval grows to respect it.
pub const MAX_FRAMES: usize = 400;
/// Finest identity level.
pub const IDENTITY_TOP_LEVEL: usize = 256;
const MIN_IDENTITY_LEVEL: usize = 16;

/// An error series plus what the run resolved and measured on the way.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub experiment: ExperimentId,
    pub series: ErrorSeries,
    pub details: BTreeMap<String, serde_json::Value>,
}

impl Comparison {
    /// The number a sweep fits against eps: `max_t E` for E1 to E3, the error at the
    /// deepest probe (`z = z_probe`) for E4.
    pub fn metric(&self) -> f64 {
        match self.experiment {
            ExperimentId::E4KzkPeriodic => self.series.last().unwrap_or(0.0),
            _ => self.series.max(),
        }
    }
}

trait StageExt<T> {
    fn stage(self, name: &str, eps: f64) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, name: &str, eps: f64) -> Result<T> {
        self.map_err(|e| match e {
            Error::Stage { .. } | Error::Config(_) => e,
            other => other.at_stage(name, eps),
        })
    }
}

struct Details(BTreeMap<String, serde_json::Value>);

impl Details {
    fn new() -> Self {
        Details(BTreeMap::new())
    }

    fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("plain values serialize");
        self.0.insert(key.to_string(), v);
    }
}

/// Time stepping plan: `steps` steps of `dt`, recording every `every`-th.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Schedule {
    dt: f64,
    every: usize,
    steps: usize,
}

impl Schedule {
    fn new(horizon: f64, dt: f64) -> Self {
        let raw = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
        let every = raw.div_ceil(MAX_FRAMES).max(1);
        Schedule {
            dt,
            every,
            steps: raw.div_ceil(every) * every,
        }
    }

    fn horizon(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    fn spacing(&self) -> f64 {
        self.every as f64 * self.dt
    }

    fn frames(&self) -> usize {
        self.steps / self.every + 1
    }

    fn times(&self) -> Vec<f64> {
        (0..self.frames())
            .map(|i| i as f64 * self.spacing())
            .collect()
    }

    fn halved(&self) -> Schedule {
        Schedule {
            dt: 0.5 * self.dt,
            every: 2 * self.every,
            steps: 2 * self.steps,
        }
    }

    fn stepper(&self) -> StepperOptions {
        StepperOptions {
            nonlinear: true,
            record_every: self.every,
        }
    }
}

/// `(4 fine - coarse) / 3` frame by frame: cancels the `dt^2` term of the time error.
fn extrapolate(coarse: &Trajectory, fine: &Trajectory) -> Result<Trajectory> {
    coarse.check_compatible(fine)?;
    coarse.zip_frames(fine, |c, f| f.zip_map(c, |f, c| (4.0 * f - c) / 3.0))
}

/// Energy normalization `eps^{(n-1)/4}`: the physical transverse box of the paraxial
/// experiments grows like `eps^{-1/2}` per axis, so raw energies pick up a factor
/// `eps^{-(n-1)/4}` that has nothing to do with the approximation error.
fn transverse_weight(grid: &GridSpec, eps: f64) -> f64 {
    if eps > 0.0 {
        eps.powf((grid.ndim() - 1) as f64 / 4.0)
    } else {
        1.0
    }
}

/// Bump-centre offsets drawn from the seed, as fractions of each extent.
fn bump_shift(seed: u64, ndim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..ndim).map(|_| rng.gen_range(-0.1..0.1)).collect()
}

fn perturbation(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    weight: f64,
    window: f64,
) -> Result<Option<Field>> {
    let delta = cfg.delta_at(cfg.params.eps);
    if delta == 0.0 {
        return Ok(None);
    }
    let shift = bump_shift(cfg.seed, grid.ndim());
    Ok(Some(delta_bump_at(grid, delta / weight, window, &shift)?))
}

fn perturbed(u0: &Field, bump: &Option<Field>) -> Result<Field> {
    match bump {
        Some(b) => u0.add(b),
        None => Ok(u0.clone()),
    }
}

fn scaled_series(mut s: ErrorSeries, weight: f64, eps: f64, delta: f64) -> ErrorSeries {
    for e in &mut s.e {
        *e *= weight;
    }
    s.eps = eps;
    s.delta = delta;
    s
}

fn torus_grid(
    extent: f64,
    points: usize,
    trans_extent: f64,
    trans_points: usize,
) -> Result<GridSpec> {
    GridSpec::new(vec![
        AxisSpec::periodic(extent, points, AxisRole::Propagation),
        AxisSpec::periodic(trans_extent, trans_points, AxisRole::Transverse),
    ])
}

/// Two-harmonic profile with a transverse modulation, mean zero along axis 0.
fn profile(grid: &GridSpec, amp: f64) -> Field {
    let k = 2.0 * PI / grid.axis(0).extent;
    let ky = 2.0 * PI / grid.axis(1).extent;
    Field::from_fn(grid, |x| {
        amp * ((k * x[0]).sin() + 0.3 * (2.0 * k * x[0] + 0.7).cos())
            * (1.0 + 0.5 * (ky * x[1]).cos())
    })
}

fn solve_torus(
    model: WaveModel,
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    sched: Schedule,
    richardson: bool,
) -> Result<Trajectory> {
    let coarse = solve_ivp(
        model,
        params,
        u0,
        u1,
        sched.dt,
        sched.horizon(),
        sched.stepper(),
    )?;
    if !richardson {
        return Ok(coarse);
    }
    let f = sched.halved();
    let fine = solve_ivp(model, params, u0, u1, f.dt, f.horizon(), f.stepper())?;
    extrapolate(&coarse, &fine)
}

fn common_details(cfg: &ExperimentConfig, sched: Schedule, richardson: bool) -> Details {
    let mut d = Details::new();
    d.set("experiment", cfg.experiment.name());
    d.set("params", cfg.params);
    d.set("dt", sched.dt);
    d.set("horizon", sched.horizon());
    d.set("record_interval", sched.spacing());
    d.set("richardson", richardson);
    d.set("delta", cfg.delta_at(cfg.params.eps));
    d.set("seed", cfg.seed);
    d
}

/// Runs comparison experiment E1, E2, E3 or E4 at `cfg.params.eps`.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<Comparison> {
    cfg.validate()?;
    let (series, details) = match cfg.experiment {
        ExperimentId::E1Npe => e1_npe(cfg)?,
        ExperimentId::E2Westervelt => e2_westervelt(cfg)?,
        ExperimentId::E3KzkIbvp => e3_kzk_ibvp(cfg)?,
        ExperimentId::E4KzkPeriodic => e4_kzk_periodic(cfg)?,
        other => {
            return Err(Error::Config(format!(
                "{other} is not a comparison experiment"
            )))
        }
    };
    Ok(Comparison {
        experiment: cfg.experiment,
        series,
        details: details.0,
    })
}

/// NPE against Kuznetsov on a torus. At `eps = 0` both sides are the linear wave equation
/// with the same data and the same solver.
fn e1_npe(cfg: &ExperimentConfig) -> Result<(ErrorSeries, Details)> {
    let p = cfg.params;
    let eps = p.eps;
    let g = &cfg.grid;
    let slow = torus_grid(
        g.extent.unwrap_or(2.0 * PI),
        g.points.unwrap_or(128),
        g.transverse_extent.unwrap_or(2.0 * PI),
        g.transverse_points.unwrap_or(64),
    )?;
    let xi0 = profile(&slow, cfg.amplitude.unwrap_or(0.005));
    let sched = Schedule::new(cfg.horizon.at(eps)?, cfg.dt.unwrap_or(0.01));
    let richardson = cfg.richardson.unwrap_or(true);
    let mut d = common_details(cfg, sched, richardson);
    let times = sched.times();

    let (phys, u0, u1, approx) = if eps == 0.0 {
        let u0 = antiderivative_mean_zero(&xi0, 0)?.scaled(-p.c / p.rho0);
        let u1 = xi0.scaled(p.c * p.c / p.rho0);
        let approx = solve_torus(WaveModel::Kuznetsov, &p, &u0, &u1, sched, richardson)
            .stage("linear reference solve", eps)?;
        (slow.clone(), u0, u1, approx)
    } else {
        let range = eps * sched.horizon();
        let dtau = cfg.dz.unwrap_or(range / 200.0);
        let traj = npe_march(&p, &xi0, dtau, range).stage("NPE march", eps)?;
        let ansatz = NpeAnsatz::new(&traj, &p).stage("NPE ansatz", eps)?;
        let mut axes = vec![slow.axis(0).clone()];
        axes.extend(physical_transverse_axes(&slow, eps));
        let phys = GridSpec::new(axes)?;
        let data = npe_initial_data(&xi0, &p, &phys).stage("NPE initial data", eps)?;
        let frames = times
            .iter()
            .map(|&t| ansatz.ubar(&phys, t))
            .collect::<Result<Vec<_>>>()
            .stage("NPE ansatz", eps)?;
        let approx = Trajectory::new(phys.clone(), sched.spacing(), 0.0, frames, MarchAxis::Time)?;
        d.set("npe_step", dtau);
        (phys, data.u0, data.u1, approx)
    };
    let weight = transverse_weight(&phys, eps);
    let bump = perturbation(cfg, &phys, weight, phys.axis(0).extent)?;
    let exact = solve_torus(
        WaveModel::Kuznetsov,
        &p,
        &perturbed(&u0, &bump)?,
        &u1,
        sched,
        richardson,
    )
    .stage("Kuznetsov solve", eps)?;
    let series =
        discrepancy_energy_within(&exact, &approx, None).stage("discrepancy energy", eps)?;
    d.set("grid", phys.shape());
    d.set("transverse_weight", weight);
    Ok((scaled_series(series, weight, eps, cfg.delta_at(eps)), d))
}

/// Westervelt against Kuznetsov on a torus, through `u = inverse(Pi)`.
fn e2_westervelt(cfg: &ExperimentConfig) -> Result<(ErrorSeries, Details)> {
    let p = cfg.params;
    let eps = p.eps;
    let g = &cfg.grid;
    let grid = torus_grid(
        g.extent.unwrap_or(2.0 * PI),
        g.points.unwrap_or(128),
        g.transverse_extent.unwrap_or(2.0 * PI),
        g.transverse_points.unwrap_or(64),
    )?;
    let u0 = profile(&grid, cfg.amplitude.unwrap_or(0.5));
    let u1 = spectral_derivative(&u0, 0, 1)?.scaled(-p.c);
    let sched = Schedule::new(cfg.horizon.at(eps)?, cfg.dt.unwrap_or(0.01));
    let richardson = cfg.richardson.unwrap_or(false);
    let mut d = common_details(cfg, sched, richardson);
    let bump = perturbation(cfg, &grid, 1.0, grid.axis(0).extent)?;
    let exact = solve_torus(
        WaveModel::Kuznetsov,
        &p,
        &perturbed(&u0, &bump)?,
        &u1,
        sched,
        richardson,
    )
    .stage("Kuznetsov solve", eps)?;
    let (pi0, pi1) = westervelt_initial_data(&u0, &u1, &p).stage("Westervelt data", eps)?;
    let pi = solve_torus(WaveModel::Westervelt, &p, &pi0, &pi1, sched, richardson)
        .stage("Westervelt solve", eps)?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let approx = westervelt_inverse(&pi, &p, tol).stage("Westervelt inversion", eps)?;
    let series =
        discrepancy_energy_within(&exact, &approx, None).stage("discrepancy energy", eps)?;
    d.set("grid", grid.shape());
    d.set("inverse_tol", tol);
    Ok((scaled_series(series, 1.0, eps, cfg.delta_at(eps)), d))
}

/// Slow and physical half-space grids shared by E3 and E4, with the samples per period
/// `m` of the coarse run and the refinement factor of the fine one.
struct HalfSpaceSetup {
    slow: GridSpec,
    phys: GridSpec,
    m: usize,
    refine: usize,
    sponge: SpongeConfig,
    dx: f64,
}

/// Default depth spacing of the half-space runs, in units of the carrier wavelength.
const HALF_SPACE_DX: f64 = 1.0 / 64.0;

fn half_space_setup(
    cfg: &ExperimentConfig,
    richardson: bool,
    default_period: f64,
    default_depth: f64,
    default_fraction: f64,
) -> Result<HalfSpaceSetup> {
    let eps = cfg.params.eps;
    if eps <= 0.0 {
        return Err(Error::Config(format!(
            "{} needs eps > 0 (the KZK map is singular at eps = 0)",
            cfg.experiment
        )));
    }
    let g = &cfg.grid;
    let period = g.extent.unwrap_or(default_period);
    let m = match cfg.dt {
        Some(dt) => {
            let m = (period / dt).round() as usize;
            if m == 0 || (m as f64 * dt - period).abs() > 1e-9 * period {
                return Err(Error::Config(format!(
                    "dt = {dt} must divide the period {period} of the boundary data"
                )));
            }
            m
        }
        None => g.points.unwrap_or(128),
    };
    let refine = if richardson { 2 } else { 1 };
    let slow = GridSpec::new(vec![
        AxisSpec::periodic(period, m * refine, AxisRole::TimeLike),
        AxisSpec::periodic(
            g.transverse_extent.unwrap_or(2.0 * PI),
            g.transverse_points.unwrap_or(16),
            AxisRole::Transverse,
        ),
    ])?;
    let depth = g.depth.unwrap_or(default_depth);
    let nx = g
        .depth_points
        .unwrap_or((depth / (HALF_SPACE_DX * period)).round() as usize + 1);
    let mut axes = vec![AxisSpec::bounded(depth, nx, AxisRole::Propagation)];
    axes.extend(physical_transverse_axes(&slow, eps));
    let phys = GridSpec::new(axes)?;
    Ok(HalfSpaceSetup {
        dx: phys.axis(0).spacing(),
        slow,
        phys,
        m,
        refine,
        sponge: SpongeConfig {
            fraction: cfg.sponge_fraction.unwrap_or(default_fraction),
            strength: None,
        },
    })
}

/// KZK march with one depth step per physical grid spacing, so every depth node is a frame.
fn kzk_setup(cfg: &ExperimentConfig, hs: &HalfSpaceSetup) -> Result<(Trajectory, KzkAnsatz)> {
    let p = cfg.params;
    let eps = p.eps;
    let tau = hs.slow.axis(0);
    let ky = 2.0 * PI / hs.slow.axis(1).extent;
    let w = 2.0 * PI / tau.extent;
    let amp = cfg.amplitude.unwrap_or(1e-3);
    let i0 = Field::from_fn(&hs.slow, |x| {
        amp * (w * x[0]).sin() * (1.0 + 0.5 * (ky * x[1]).cos())
    });
    let dz = cfg.dz.unwrap_or(eps * hs.dx);
    let traj = kzk_march(&p, &i0, dz, eps * hs.phys.axis(0).extent).stage("KZK march", eps)?;
    let ansatz = KzkAnsatz::new(&traj, &p).stage("KZK ansatz", eps)?;
    Ok((traj, ansatz))
}

/// Default sponge fraction of E3.
const E3_SPONGE_FRACTION: f64 = 0.2;
/// Default boundary period of E3. A long carrier keeps the viscous attenuation over the
/// measured window (rate `nu omega^2 / 2 c^3` in `z = eps x1`) negligible, so runs at
/// different `eps` see the same field.
const E3_PERIOD: f64 = 2.0 * PI;
/// Free depth, in wavelengths, that E3 keeps around the perturbation beyond the `2 c T`
/// needed for causality.
const E3_MARGIN: f64 = 4.0;

/// KZK against Kuznetsov on the truncated half-space, with the boundary trace and initial
/// data taken from the KZK solution.
///
/// Energies are measured on `[0, x_s - c T]`, where `x_s` is the sponge start: no signal
/// from the sponge (which damps the initial data inside it, and so sends waves back) can
/// reach that window before `T`. The perturbation sits in `[0, x_s - 2 c T]` so that its
/// right-going half stays inside the window too.
fn e3_kzk_ibvp(cfg: &ExperimentConfig) -> Result<(ErrorSeries, Details)> {
    let p = cfg.params;
    let eps = p.eps;
    let richardson = cfg.richardson.unwrap_or(true);
    let horizon = cfg.horizon.at(eps.max(f64::MIN_POSITIVE))?;
    let period = cfg.grid.extent.unwrap_or(E3_PERIOD);
    let reach = p.c * horizon;
    let free = 2.0 * reach + E3_MARGIN * period;
    let fraction = cfg.sponge_fraction.unwrap_or(E3_SPONGE_FRACTION);
    let default_depth = (free / (1.0 - fraction) / period).ceil() * period;
    let hs = half_space_setup(
        cfg,
        richardson,
        E3_PERIOD,
        default_depth,
        E3_SPONGE_FRACTION,
    )?;
    let sponge_start = hs.sponge.start(hs.phys.axis(0).extent);
    let window = sponge_start - reach;
    if window <= 0.0 {
        return Err(Error::Config(format!(
            "depth {} is too short for T = {horizon}: the sponge starts at {sponge_start}, \
             within c T = {reach} of the boundary",
            hs.phys.axis(0).extent
        )));
    }
    let bump_window = if window > reach {
        window - reach
    } else {
        window
    };
    let (_, ansatz) = kzk_setup(cfg, &hs)?;
    let data = ansatz
        .initial_data(&hs.phys)
        .stage("KZK initial data", eps)?;
    let g_fine = data.g.clone().expect("half-space data carries a trace");
    let g = g_fine.decimated(hs.refine)?;
    let sched = Schedule::new(cfg.horizon.at(eps)?, hs.slow.axis(0).extent / hs.m as f64);
    let mut d = common_details(cfg, sched, richardson);
    let weight = transverse_weight(&hs.phys, eps);
    let bump = perturbation(cfg, &hs.phys, weight, bump_window)?;
    let u0 = perturbed(&data.u0, &bump)?;
    let run = |g: &BoundaryData, s: Schedule| {
        let opts = IbvpOptions {
            stepper: s.stepper(),
            sponge: hs.sponge,
        };
        solve_ibvp(
            WaveModel::Kuznetsov,
            &p,
            &u0,
            &data.u1,
            g,
            s.dt,
            s.horizon(),
            &opts,
        )
    };
    let coarse = run(&g, sched).stage("Kuznetsov half-space solve", eps)?;
    let exact = if richardson {
        let fine = run(&g_fine, sched.halved()).stage("Kuznetsov half-space solve", eps)?;
        extrapolate(&coarse, &fine)?
    } else {
        coarse
    };
    let frames = sched
        .times()
        .iter()
        .map(|&t| ansatz.ubar(&hs.phys, t))
        .collect::<Result<Vec<_>>>()
        .stage("KZK ansatz", eps)?;
    let approx = Trajectory::new(
        hs.phys.clone(),
        sched.spacing(),
        0.0,
        frames,
        MarchAxis::Time,
    )?;
    let cut = (window / hs.dx).floor() as usize + 1;
    let series =
        discrepancy_energy_within(&exact, &approx, Some(cut)).stage("discrepancy energy", eps)?;
    d.set("grid", hs.phys.shape());
    d.set("sponge_fraction", hs.sponge.fraction);
    d.set("measured_depth", hs.phys.axis(0).coordinates()[cut - 1]);
    d.set("bump_window", bump_window);
    d.set("transverse_weight", weight);
    d.set("remainder_weight", "eps^2");
    Ok((scaled_series(series, weight, eps, cfg.delta_at(eps)), d))
}

/// `I~ = (rho0/c^2) d_tau Phi` at depth row `row` (physical depth `x1`), where
/// `Phi(tau) = u(tau + x1/c)` is read off one period of the regime.
fn extracted_intensity(
    window: &Trajectory,
    row: usize,
    x1: f64,
    slow: &GridSpec,
    params: &ModelParams,
) -> Result<Field> {
    let stride = window.grid().stride(0);
    let values = window
        .frames()
        .iter()
        .flat_map(|f| f.values()[row * stride..(row + 1) * stride].to_vec())
        .collect();
    let phi = Field::new(slow.clone(), values)?;
    let n = slow.axis(0).points;
    let shift = x1 / params.c;
    let scale = params.rho0 / (params.c * params.c);
    apply_symbol(&phi, 0, |m, k| {
        if is_nyquist(m, n) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, scale * k) * Complex64::from_polar(1.0, k * shift)
        }
    })
}

/// Every `factor`-th sample along axis 0 of a field on a `(tau, y...)` grid.
fn decimate_tau(f: &Field, factor: usize, coarse: &GridSpec) -> Result<Field> {
    let stride = f.grid().stride(0);
    let values = (0..coarse.axis(0).points)
        .flat_map(|i| f.values()[i * factor * stride..(i * factor + 1) * stride].to_vec())
        .collect();
    Field::new(coarse.clone(), values)
}

/// KZK intensity against the intensity read off the periodic regime of the boundary-driven
/// Kuznetsov problem, at depths `z = z_probe m / 4`, `m = 1..4`.
fn e4_kzk_periodic(cfg: &ExperimentConfig) -> Result<(ErrorSeries, Details)> {
    let p = cfg.params;
    let eps = p.eps;
    if p.nu <= 0.0 {
        return Err(Error::Config("E4_kzk_periodic needs nu > 0".into()));
    }
    let richardson = cfg.richardson.unwrap_or(true);
    let hs = half_space_setup(
        cfg,
        richardson,
        1.0,
        8.0 * cfg.grid.extent.unwrap_or(1.0),
        0.5,
    )?;
    let (traj, ansatz) = kzk_setup(cfg, &hs)?;
    let z_probe = cfg.z_probe.unwrap_or(0.03);
    let cut = sponge_start_index(&hs.phys, &hs.sponge);
    let probes: Vec<usize> = (1..=4)
        .map(|m| {
            let x = z_probe * m as f64 / 4.0 / (eps * hs.dx);
            let j = x.round();
            if (x - j).abs() > 1e-6 || j as usize >= cut || j as usize >= traj.len() {
                return Err(Error::Config(format!(
                    "probe depth z = {} is not a grid node before the sponge (x1 / dx = {x})",
                    z_probe * m as f64 / 4.0
                )));
            }
            Ok(j as usize)
        })
        .collect::<Result<_>>()?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let opts = PeriodicRegimeOptions {
        ramp_periods: 4.0,
        max_periods: 400,
        sponge: hs.sponge,
        nonlinear: true,
    };
    let g_fine = ansatz
        .boundary(&hs.phys.axes()[1..])
        .stage("KZK boundary trace", eps)?;
    let regime = |g: &BoundaryData| -> Result<PeriodicRegime> {
        extract_periodic_regime(&p, &hs.phys, g, tol, &opts).stage("periodic regime", eps)
    };
    let coarse_grid = GridSpec::new(vec![
        AxisSpec::periodic(hs.slow.axis(0).extent, hs.m, AxisRole::TimeLike),
        hs.slow.axis(1).clone(),
    ])?;
    let fine_regime = if richardson {
        Some(regime(&g_fine)?)
    } else {
        None
    };
    let coarse_regime = regime(&g_fine.decimated(hs.refine)?)?;
    let mut e = Vec::with_capacity(probes.len());
    let mut z = Vec::with_capacity(probes.len());
    for &j in &probes {
        let x1 = j as f64 * hs.dx;
        let mut tilde = extracted_intensity(&coarse_regime.window, j, x1, &coarse_grid, &p)?;
        if let Some(fr) = &fine_regime {
            let fine = extracted_intensity(&fr.window, j, x1, &hs.slow, &p)?;
            let fine = decimate_tau(&fine, hs.refine, &coarse_grid)?;
            tilde = fine.zip_map(&tilde, |f, c| (4.0 * f - c) / 3.0)?;
        }
        let intensity = decimate_tau(traj.frame(j), hs.refine, &coarse_grid)?;
        e.push(l2_norm_all(&intensity.sub(&tilde)?));
        z.push(traj.position(j));
    }
    let mut d = common_details(
        cfg,
        Schedule::new(1.0, hs.slow.axis(0).extent / hs.m as f64),
        richardson,
    );
    d.0.remove("horizon");
    d.0.remove("record_interval");
    d.set("grid", hs.phys.shape());
    d.set("sponge_fraction", hs.sponge.fraction);
    d.set("z_probe", z_probe);
    d.set("regime_tol", tol);
    d.set("transient_periods", coarse_regime.transient_periods);
    d.set("regime_change", coarse_regime.change);
    if let Some(fr) = &fine_regime {
        d.set("transient_periods_fine", fr.transient_periods);
        d.set("regime_change_fine", fr.change);
    }
    d.set("remainder_weight", "eps");
    let mut series = ErrorSeries::new(z, e, eps, 0.0)?;
    series.shape = coarse_grid.shape();
    Ok((series, d))
}

/// Levels doubling up to [`IDENTITY_TOP_LEVEL`]: `count = 3` gives 64, 128, 256.
pub fn identity_levels(count: usize) -> Result<Vec<usize>> {
    let max = (IDENTITY_TOP_LEVEL / MIN_IDENTITY_LEVEL).ilog2() as usize + 1;
    if !(3..=max).contains(&count) {
        return Err(Error::Config(format!(
            "--levels must lie in 3..={max}, got {count}"
        )));
    }
    Ok((0..count).rev().map(|i| IDENTITY_TOP_LEVEL >> i).collect())
}

/// Identity refinement study on the standard manufactured field of `kind`, with
/// `top / 2` transverse points on the paraxial kinds.
pub fn run_identity(
    kind: IdentityKind,
    params: &ModelParams,
    levels: &[usize],
) -> Result<IdentityReport> {
    let trans = levels.iter().copied().max().unwrap_or(IDENTITY_TOP_LEVEL) / 2;
    let kzk = |a: &[f64]| (2.0 * PI * a[0]).sin() * (-a[1]).exp() * a[2].cos();
    let npe = |a: &[f64]| (2.0 * PI * a[1]).sin() * a[0].cos() * (1.0 + 0.5 * a[2].cos());
    let wes = |a: &[f64]| a[0].sin() * a[1].sin();
    let field = match kind {
        IdentityKind::Kzk => Manufactured {
            field: &kzk,
            period: 1.0,
            transverse: vec![(2.0 * PI, trans)],
            anchor: 0.0,
        },
        IdentityKind::Npe => Manufactured {
            field: &npe,
            period: 1.0,
            transverse: vec![(2.0 * PI, trans)],
            anchor: 0.2,
        },
        IdentityKind::Wes | IdentityKind::WesKuz => Manufactured {
            field: &wes,
            period: 2.0 * PI,
            transverse: vec![],
            anchor: 0.3,
        },
    };
    identity_check(kind, &field, params, levels)
}

/// One row of the dispersion check: a Fourier mode's measured and predicted root of
/// `l^2 + visc eps k^2 l + c^2 k^2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionRow {
    pub mode: u32,
    pub measured_rate: f64,
    pub predicted_rate: f64,
    pub measured_frequency: f64,
    pub predicted_frequency: f64,
    /// `|measured - predicted| / |predicted|` of the decay rate.
    pub rate_error: f64,
}

/// Modes whose decay is measured by [`run_dispersion`].
pub const DISPERSION_MODES: [u32; 3] = [1, 2, 3];

/// Evolves single cosine modes under the linear Kuznetsov equation and fits the
/// two-term recurrence `a[n+1] = p a[n] + q a[n-1]` to the modal amplitude, whose roots
/// are `exp(l dt)`.
pub fn run_dispersion(cfg: &ExperimentConfig) -> Result<Vec<DispersionRow>> {
    let p = cfg.params;
    if p.eps <= 0.0 || p.nu <= 0.0 {
        return Err(Error::Config(
            "the dispersion check needs eps > 0 and nu > 0".into(),
        ));
    }
    let g = &cfg.grid;
    let grid = torus_grid(
        g.extent.unwrap_or(2.0 * PI),
        g.points.unwrap_or(16),
        g.transverse_extent.unwrap_or(2.0 * PI),
        g.transverse_points.unwrap_or(8),
    )?;
    let dt = cfg.dt.unwrap_or(1e-3);
    let horizon = cfg.horizon.at(p.eps)?;
    let base = 2.0 * PI / grid.axis(0).extent;
    let opts = StepperOptions {
        nonlinear: false,
        record_every: 1,
    };
    DISPERSION_MODES
        .iter()
        .map(|&mode| {
            let k = base * mode as f64;
            let u0 = Field::from_fn(&grid, |x| (k * x[0]).cos());
            let traj = solve_ivp(
                WaveModel::Kuznetsov,
                &p,
                &u0,
                &Field::zeros(&grid),
                dt,
                horizon,
                opts,
            )
            .stage("dispersion solve", p.eps)?;
            let weights: Vec<f64> = u0.values().to_vec();
            let norm: f64 = weights.iter().map(|w| w * w).sum();
            let modal: Vec<f64> = traj
                .frames()
                .iter()
                .map(|f| {
                    f.values()
                        .iter()
                        .zip(&weights)
                        .map(|(v, w)| v * w)
                        .sum::<f64>()
                        / norm
                })
                .collect();
            let root = recurrence_root(&modal)?;
            let z = root.ln() / dt;
            let b = p.visc() * p.eps * k * k;
            let predicted = (Complex64::new(-b, 0.0)
                + Complex64::new(b * b - 4.0 * p.c * p.c * k * k, 0.0).sqrt())
                / 2.0;
            Ok(DispersionRow {
                mode,
                measured_rate: z.re,
                predicted_rate: predicted.re,
                measured_frequency: z.im.abs(),
                predicted_frequency: predicted.im.abs(),
                rate_error: (z.re - predicted.re).abs() / predicted.re.abs(),
            })
        })
        .collect()
}

/// Root of larger argument of `z^2 = p z + q`, with `(p, q)` fitted by least squares.
fn recurrence_root(a: &[f64]) -> Result<Complex64> {
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for w in a.windows(3) {
        s11 += w[1] * w[1];
        s12 += w[1] * w[0];
        s22 += w[0] * w[0];
        r1 += w[2] * w[1];
        r2 += w[2] * w[0];
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 0.0) {
        return Err(Error::FitInput("modal series is degenerate".into()));
    }
    let pp = (r1 * s22 - r2 * s12) / det;
    let qq = (s11 * r2 - s12 * r1) / det;
    let disc = Complex64::new(pp * pp + 4.0 * qq, 0.0).sqrt();
    Ok((Complex64::new(pp, 0.0) + disc) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Horizon;

    #[test]
    fn schedule_records_at_most_max_frames_and_covers_the_horizon() {
        let s = Schedule::new(10.0, 0.01);
        assert!(s.frames() <= MAX_FRAMES + 1);
        assert!(s.horizon() >= 10.0 - 1e-12);
        assert_eq!(s.steps % s.every, 0);
        let h = s.halved();
        assert_eq!(h.spacing(), s.spacing());
        assert_eq!(h.frames(), s.frames());
    }

    #[test]
    fn identity_levels_end_at_the_top_level() {
        assert_eq!(identity_levels(3).unwrap(), vec![64, 128, 256]);
        assert_eq!(identity_levels(5).unwrap(), vec![16, 32, 64, 128, 256]);
        assert!(identity_levels(2).is_err());
        assert!(identity_levels(6).is_err());
    }

    fn small_e2(eps: f64, delta: f64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentId::E2Westervelt);
        cfg.params.eps = eps;
        cfg.params.nu = 0.0;
        cfg.grid.points = Some(32);
        cfg.grid.transverse_points = Some(8);
        cfg.horizon = Horizon::Fixed(2.0);
        cfg.delta = crate::harness::config::Mismatch::Fixed(delta);
        cfg
    }

    #[test]
    fn westervelt_comparison_at_eps_zero_is_exact() {
        let run = run_comparison(&small_e2(0.0, 0.0)).unwrap();
        assert!(run.series.max() <= 1e-10, "max E = {}", run.series.max());
    }

    #[test]
    fn perturbation_energy_is_conserved_in_the_linear_limit() {
        let delta = 1e-3;
        let run = run_comparison(&small_e2(0.0, delta)).unwrap();
        let e0 = run.series.e[0];
        assert!((e0 - delta).abs() <= 0.02 * delta, "E(0) = {e0}");
        assert!(run.series.max() <= 3.0 * delta);
    }

    #[test]
    fn npe_comparison_at_eps_zero_is_exact() {
        let mut cfg = ExperimentConfig::new(ExperimentId::E1Npe);
        cfg.params.eps = 0.0;
        cfg.grid.points = Some(32);
        cfg.grid.transverse_points = Some(8);
        cfg.horizon = Horizon::Fixed(1.0);
        let run = run_comparison(&cfg).unwrap();
        assert!(run.series.e.iter().all(|&e| e <= 1e-10));
    }

    #[test]
    fn paraxial_half_space_runs_reject_eps_zero_and_inviscid_e4() {
        let mut cfg = ExperimentConfig::new(ExperimentId::E3KzkIbvp);
        cfg.params.eps = 0.0;
        assert!(matches!(run_comparison(&cfg), Err(Error::Config(_))));
        let mut cfg = ExperimentConfig::new(ExperimentId::E4KzkPeriodic);
        cfg.params.nu = 0.0;
        assert!(matches!(run_comparison(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn recurrence_recovers_a_damped_oscillation() {
        let (rate, freq, dt) = (-0.05, 2.0, 0.01);
        let a: Vec<f64> = (0..500)
            .map(|n| {
                let t = n as f64 * dt;
                (rate * t).exp() * (freq * t).cos()
            })
            .collect();
        let z = recurrence_root(&a).unwrap().ln() / dt;
        assert!((z.re - rate).abs() < 1e-8 && (z.im.abs() - freq).abs() < 1e-8);
    }
}
