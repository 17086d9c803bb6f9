//! Whole runs as the CLI exposes them: compute, write outputs, write the manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::full_models::{discrepancy_energy_within, solve_ivp, StepperOptions, WaveModel};
use crate::numerics::field::Field;
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::snapshot::write_snapshot;
use crate::numerics::spectral::spectral_derivative;
use crate::params::ModelParams;
use crate::paraxial_models::{kzk_march_with, npe_march_with, MarchOptions};
use crate::remainders::{IdentityKind, IdentityReport};
use crate::series::ErrorSeries;

use super::config::{ExperimentConfig, ModelKind};
use super::experiments::{
    identity_levels, run_comparison, run_dispersion, run_identity, MAX_FRAMES,
};
use super::io::{eps_label, write_error_series, Manifest, RunDir};
use super::sweep::run_sweep;

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn profile_grid(
    cfg: &ExperimentConfig,
    extent: f64,
    points: usize,
    trans_points: usize,
) -> Result<GridSpec> {
    let g = &cfg.grid;
    GridSpec::new(vec![
        AxisSpec::periodic(
            g.extent.unwrap_or(extent),
            g.points.unwrap_or(points),
            AxisRole::Propagation,
        ),
        AxisSpec::periodic(
            g.transverse_extent.unwrap_or(2.0 * PI),
            g.transverse_points.unwrap_or(trans_points),
            AxisRole::Transverse,
        ),
    ])
}

fn wave_profile(grid: &GridSpec, amp: f64) -> Field {
    let k = 2.0 * PI / grid.axis(0).extent;
    let ky = 2.0 * PI / grid.axis(1).extent;
    Field::from_fn(grid, |x| {
        amp * (k * x[0]).sin() * (1.0 + 0.5 * (ky * x[1]).cos())
    })
}

/// Integrates one model from a standard profile and writes its energy (or, for the
/// marches, L2-norm) history and the final state.
pub fn simulate(cfg: &ExperimentConfig, model: ModelKind) -> Result<PathBuf> {
    let started = Instant::now();
    let p = cfg.params;
    let horizon = cfg.horizon.at(p.eps)?;
    let mut run = RunDir::create(&cfg.output_root(), &format!("simulate_{}", model.name()))?;
    let mut manifest = Manifest::new(format!("simulate {}", model.name()), &cfg.echo);
    let (series, last, stamp) = match model {
        ModelKind::Kuznetsov | ModelKind::Westervelt => {
            let grid = profile_grid(cfg, 2.0 * PI, 128, 64)?;
            let u0 = wave_profile(&grid, cfg.amplitude.unwrap_or(0.5));
            let u1 = spectral_derivative(&u0, 0, 1)?.scaled(-p.c);
            let dt = cfg.dt.unwrap_or(0.01);
            let raw = (horizon / dt).ceil() as usize;
            let every = raw.div_ceil(MAX_FRAMES).max(1);
            let wave = if model == ModelKind::Kuznetsov {
                WaveModel::Kuznetsov
            } else {
                WaveModel::Westervelt
            };
            let opts = StepperOptions {
                nonlinear: true,
                record_every: every,
            };
            let traj = solve_ivp(wave, &p, &u0, &u1, dt, horizon, opts)
                .map_err(|e| e.at_stage("simulate", p.eps))?;
            let zero = traj.map_frames(|f| Ok(Field::zeros(f.grid())))?;
            let mut energy = discrepancy_energy_within(&traj, &zero, None)?;
            energy.eps = p.eps;
            manifest.detail("dt", dt)?;
            manifest.detail("grid", grid.shape())?;
            let stamp = traj.end();
            (energy, traj.last().clone(), stamp)
        }
        ModelKind::Kzk | ModelKind::Npe => {
            let (period, amp) = if model == ModelKind::Kzk {
                (1.0, 1e-3)
            } else {
                (2.0 * PI, 5e-3)
            };
            let grid = profile_grid(cfg, period, 128, 64)?;
            let q0 = wave_profile(&grid, cfg.amplitude.unwrap_or(amp));
            let step = cfg.dz.unwrap_or(horizon / 1000.0);
            let opts = MarchOptions::default();
            let r = if model == ModelKind::Kzk {
                kzk_march_with(&p, &q0, step, horizon, &opts)
            } else {
                npe_march_with(&p, &q0, step, horizon, &opts)
            }
            .map_err(|e| e.at_stage("simulate", p.eps))?;
            let t: Vec<f64> = (0..r.norms.len()).map(|i| i as f64 * step).collect();
            let series = ErrorSeries::new(t, r.norms.clone(), p.eps, 0.0)?;
            manifest.detail("march_step", step)?;
            manifest.detail("grid", grid.shape())?;
            let stamp = r.trajectory.end();
            (series, r.trajectory.last().clone(), stamp)
        }
    };
    write_error_series(&run.output("history.csv"), &series)?;
    write_snapshot(&run.output("final.nlac"), &last, stamp)?;
    manifest.detail("model", model.name())?;
    manifest.detail("params", p)?;
    run.finish(manifest, started)
}

/// One comparison run: `series.csv` plus the manifest.
pub fn compare(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let started = Instant::now();
    let name = format!("compare_{}_{}", cfg.experiment, eps_label(cfg.params.eps));
    let result = run_comparison(cfg)?;
    let mut run = RunDir::create(&cfg.output_root(), &name)?;
    write_error_series(&run.output("series.csv"), &result.series)?;
    let mut manifest = Manifest::new(format!("compare {}", cfg.experiment), &cfg.echo);
    manifest.details = result.details;
    manifest.detail("max_E", result.series.max())?;
    run.finish(manifest, started)
}

#[derive(Serialize)]
struct IdentityRow {
    kind: &'static str,
    points: usize,
    step: f64,
    max_defect: f64,
    l2_defect: f64,
    order: Option<f64>,
}

/// Default parameters of the identity runs: `eps = 0.1` for the paraxial kinds, `0.05`
/// for the Westervelt kinds.
pub fn identity_params(kind: IdentityKind) -> ModelParams {
    let eps = match kind {
        IdentityKind::Kzk | IdentityKind::Npe => 0.1,
        IdentityKind::Wes | IdentityKind::WesKuz => 0.05,
    };
    ModelParams {
        c: 1.0,
        rho0: 1.0,
        nu: 0.1,
        gamma: 1.4,
        eps,
    }
}

/// Identity refinement study; writes `identity_<kind>.csv`, one row per level.
pub fn identity(
    kind: IdentityKind,
    levels: usize,
    params: &ModelParams,
    out_root: &Path,
    echo: &[(String, String)],
) -> Result<(PathBuf, IdentityReport)> {
    let started = Instant::now();
    let lv = identity_levels(levels)?;
    let report = run_identity(kind, params, &lv)?;
    let mut run = RunDir::create(out_root, &format!("identity_{}", kind.name()))?;
    let rows: Vec<IdentityRow> = report
        .levels
        .iter()
        .map(|l| IdentityRow {
            kind: kind.name(),
            points: l.points,
            step: l.step,
            max_defect: l.max_defect,
            l2_defect: l.l2_defect,
            order: report.order,
        })
        .collect();
    write_rows(&run.output(format!("identity_{}.csv", kind.name())), &rows)?;
    let mut manifest = Manifest::new(format!("identity {} --levels {levels}", kind.name()), echo);
    manifest.detail("params", params)?;
    manifest.detail("order", report.order)?;
    manifest.detail("grid", report.grid.shape())?;
    let path = run.finish(manifest, started)?;
    Ok((path, report))
}

#[derive(Serialize)]
struct SweepRow {
    eps: f64,
    metric: f64,
    delta: f64,
    file: String,
}

/// Runs the eps sweep and writes one series per eps, `summary.csv` and the manifest.
pub fn sweep(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let started = Instant::now();
    let result = run_sweep(cfg)?;
    let mut run = RunDir::create(&cfg.output_root(), &format!("sweep_{}", cfg.experiment))?;
    let mut rows = Vec::new();
    let mut manifest = Manifest::new(format!("sweep {}", cfg.experiment), &cfg.echo);
    for pt in &result.points {
        let file = format!("series_{}.csv", eps_label(pt.eps));
        write_error_series(&run.output(&file), &pt.run.series)?;
        rows.push(SweepRow {
            eps: pt.eps,
            metric: pt.run.metric(),
            delta: pt.run.series.delta,
            file,
        });
        manifest.detail(eps_label(pt.eps), &pt.run.details)?;
    }
    write_rows(&run.output("summary.csv"), &rows)?;
    manifest.detail("order_fit", result.order)?;
    manifest.detail("workers", cfg.workers)?;
    run.finish(manifest, started)
}

/// Modal decay check; writes `dispersion.csv`.
pub fn dispersion(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let started = Instant::now();
    let rows = run_dispersion(cfg)?;
    let mut run = RunDir::create(&cfg.output_root(), "dispersion")?;
    write_rows(&run.output("dispersion.csv"), &rows)?;
    let mut manifest = Manifest::new("dispersion", &cfg.echo);
    manifest.detail("params", cfg.params)?;
    let worst = rows.iter().map(|r| r.rate_error).fold(0.0, f64::max);
    manifest.detail("max_rate_error", worst)?;
    run.finish(manifest, started)
}

/// Process exit code for a failed run: 3 for solver aborts, 1 for output failures, 2 for
/// invalid input.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_solver_abort() => 3,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 2,
    }
}
