//! Remainder evaluators and model operators against symbolic reference values.
//!
//! The tables in `tests/data` are exact pointwise values produced by
//! `tests/data/generate_reference.py`. Each test samples the same closed-form field on a
//! short trajectory and compares the middle frame.

use std::f64::consts::PI;
use std::path::Path;

use nlac_core::full_models::{apply_kuznetsov_operator, apply_westervelt_operator};
use nlac_core::paraxial_models::{apply_kzk_operator, apply_npe_operator};
use nlac_core::remainders::{eval_r_kuz_kzk, eval_r_kuz_npe, eval_r_kuz_wes, eval_r_wes_kuz};
use nlac_core::{AxisRole, AxisSpec, Field, GridSpec, MarchAxis, ModelParams, Trajectory};

const FRAMES: usize = 21;
const MID: usize = FRAMES / 2;
/// Relative to the table's largest magnitude.
const TOL: f64 = 1e-6;

fn params() -> ModelParams {
    ModelParams::new(1.5, 1.2, 0.1, 1.4, 0.1).unwrap()
}

struct Row {
    coords: Vec<f64>,
    value: f64,
}

fn load(name: &str) -> Vec<Row> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    rdr.records()
        .map(|r| {
            let vals: Vec<f64> = r.unwrap().iter().map(|s| s.parse().unwrap()).collect();
            let (value, coords) = vals.split_last().unwrap();
            Row {
                coords: coords.to_vec(),
                value: *value,
            }
        })
        .collect()
}

/// Trajectory of `f(march, x...)` with `FRAMES` frames centred on `centre`.
fn sampled(
    grid: &GridSpec,
    centre: f64,
    step: f64,
    axis: MarchAxis,
    f: impl Fn(f64, &[f64]) -> f64,
) -> Trajectory {
    let start = centre - MID as f64 * step;
    let frames = (0..FRAMES)
        .map(|k| {
            let s = start + k as f64 * step;
            Field::from_fn(grid, |x| f(s, x))
        })
        .collect();
    Trajectory::new(grid.clone(), step, start, frames, axis).unwrap()
}

/// Compares `field` at the table nodes; `spatial` picks the columns that index the grid.
fn compare(name: &str, field: &Field, spatial: &[usize]) {
    let rows = load(name);
    let grid = field.grid();
    let scale = rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    let mut worst = 0.0_f64;
    for row in &rows {
        let mut flat = 0;
        for (axis, &col) in spatial.iter().enumerate() {
            let idx = (row.coords[col] / grid.axis(axis).spacing()).round() as usize;
            flat += idx * grid.stride(axis);
        }
        worst = worst.max((field.values()[flat] - row.value).abs());
    }
    assert!(
        worst <= TOL * scale,
        "{name}: max deviation {worst:e} against scale {scale:e}"
    );
}

fn paraxial_grid(first: f64) -> GridSpec {
    GridSpec::new(vec![
        AxisSpec::periodic(first, 16, AxisRole::Propagation),
        AxisSpec::periodic(2.0 * PI, 8, AxisRole::Transverse),
    ])
    .unwrap()
}

fn wave_grid() -> GridSpec {
    GridSpec::new(vec![
        AxisSpec::periodic(2.0 * PI, 16, AxisRole::Propagation),
        AxisSpec::periodic(2.0 * PI, 8, AxisRole::Transverse),
    ])
    .unwrap()
}

/// `sin(2 pi tau) e^{-z} cos y`, marched in `z`.
fn kzk_field() -> Trajectory {
    sampled(&paraxial_grid(1.0), 0.5, 0.01, MarchAxis::Depth, |z, x| {
        (2.0 * PI * x[0]).sin() * (-z).exp() * x[1].cos()
    })
}

fn npe_potential() -> Trajectory {
    sampled(
        &paraxial_grid(1.0),
        0.3,
        0.01,
        MarchAxis::SlowTime,
        |tau, x| {
            let (z, y) = (x[0], x[1]);
            (2.0 * PI * z).sin() * tau.cos() * (1.0 + 0.5 * y.cos())
                + 0.3 * (4.0 * PI * z).cos() * (2.0 * tau).sin() * y.sin()
        },
    )
}

fn wave_field() -> Trajectory {
    sampled(&wave_grid(), 0.7, 0.005, MarchAxis::Time, |t, x| {
        t.sin() * x[0].sin() + 0.3 * (2.0 * t).cos() * x[0].cos() * x[1].cos()
    })
}

#[test]
fn kzk_remainder_matches_reference() {
    let r = eval_r_kuz_kzk(&kzk_field(), &params()).unwrap();
    compare("r_kuz_kzk.csv", r.frame(MID), &[0, 2]);
}

#[test]
fn kzk_operator_matches_reference() {
    let r = apply_kzk_operator(&kzk_field(), &params()).unwrap();
    compare("kzk_operator.csv", r.frame(MID), &[0, 2]);
}

#[test]
fn npe_remainder_matches_reference() {
    let r = eval_r_kuz_npe(&npe_potential(), &params()).unwrap();
    compare("r_kuz_npe.csv", r.frame(MID), &[1, 2]);
}

#[test]
fn npe_operator_matches_reference() {
    let xi = sampled(
        &paraxial_grid(1.0),
        0.3,
        0.01,
        MarchAxis::SlowTime,
        |tau, x| (2.0 * PI * x[0]).sin() * (-tau).exp() * x[1].cos(),
    );
    let r = apply_npe_operator(&xi, &params()).unwrap();
    compare("npe_operator.csv", r.frame(MID), &[1, 2]);
}

#[test]
fn wave_operators_match_reference() {
    let u = wave_field();
    let kuz = apply_kuznetsov_operator(&u, &params()).unwrap();
    compare("kuznetsov_operator.csv", kuz.frame(MID), &[1, 2]);
    let wes = apply_westervelt_operator(&u, &params()).unwrap();
    compare("westervelt_operator.csv", wes.frame(MID), &[1, 2]);
}

#[test]
fn westervelt_remainders_match_reference() {
    let u = wave_field();
    let r = eval_r_kuz_wes(&u, &params()).unwrap();
    compare("r_kuz_wes.csv", r.frame(MID), &[1, 2]);
    let split = eval_r_wes_kuz(&u, &params()).unwrap();
    compare("r_wes_kuz_r1.csv", split.r1.frame(MID), &[1, 2]);
    compare(
        "r_wes_kuz_correction.csv",
        split.correction.frame(MID),
        &[1, 2],
    );
}
