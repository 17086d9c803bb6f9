use super::*;
use crate::error::Error;
use crate::numerics::fd::fd_derivative;
use crate::numerics::field::{MarchAxis, Trajectory};
use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
use crate::numerics::norm::l2_norm_all;
use crate::params::ModelParams;
use crate::paraxial_models::kzk_march;
use std::f64::consts::PI;

const L: f64 = 1.0;

fn params(eps: f64) -> ModelParams {
    ModelParams::new(1.5, 1.2, 0.1, 1.4, eps).unwrap()
}

fn slow_grid(n: usize, m: usize) -> GridSpec {
    GridSpec::new(vec![
        AxisSpec::periodic(L, n, AxisRole::TimeLike),
        AxisSpec::periodic(2.0 * PI, m, AxisRole::Transverse),
    ])
    .unwrap()
}

fn half_space(p: &ModelParams, depth: f64, n: usize, m: usize) -> GridSpec {
    GridSpec::new(vec![
        AxisSpec::bounded(depth, n, AxisRole::Propagation),
        AxisSpec::periodic(2.0 * PI / p.eps.sqrt(), m, AxisRole::Transverse),
    ])
    .unwrap()
}

fn frozen(field: &Field, frames: usize, dz: f64) -> Trajectory {
    Trajectory::new(
        field.grid().clone(),
        dz,
        0.0,
        vec![field.clone(); frames],
        MarchAxis::Depth,
    )
    .unwrap()
}

fn profile(y: f64) -> f64 {
    1.0 + 0.5 * y.cos()
}

#[test]
fn zero_solution_gives_zero() {
    let p = params(0.04);
    let z = Field::zeros(&slow_grid(16, 8));
    let set = kzk_initial_data(&frozen(&z, 5, 0.1), &p, &half_space(&p, 2.0, 17, 8)).unwrap();
    assert_eq!(set.u0.max_abs(), 0.0);
    assert_eq!(set.u1.max_abs(), 0.0);
    assert!(set.g.unwrap().is_zero());
    let npe_grid = GridSpec::new(vec![
        AxisSpec::periodic(L, 16, AxisRole::Propagation),
        AxisSpec::periodic(2.0 * PI / 0.2, 8, AxisRole::Transverse),
    ])
    .unwrap();
    let set = npe_initial_data(&z, &p, &npe_grid).unwrap();
    assert_eq!(set.u0.max_abs() + set.u1.max_abs(), 0.0);
}

#[test]
fn frozen_harmonic_potential() {
    let p = params(0.04);
    let a = 0.01;
    let i0 = Field::from_fn(&slow_grid(32, 8), |x| a * (2.0 * PI * x[0] / L).sin());
    let traj = frozen(&i0, 11, 0.01);
    let target = half_space(&p, 2.0, 41, 16);
    let k = p.c * p.c / p.rho0;
    for t in [0.0, 0.3, 1.7] {
        let u = build_ubar_from_kzk(&traj, &p, &target, t).unwrap();
        let exact = Field::from_fn(&target, |x| {
            -a * k * L / (2.0 * PI) * (2.0 * PI * (t - x[0] / p.c) / L).cos()
        });
        assert!(u.sub(&exact).unwrap().max_abs() < 1e-13);
    }
    assert!(matches!(
        build_ubar_from_kzk(&traj, &p, &half_space(&p, 3.0, 41, 16), 0.0),
        Err(Error::OutOfRange { .. })
    ));
}

fn beam(g: &GridSpec) -> Field {
    Field::from_fn(g, |x| {
        3e-4 * ((2.0 * PI * x[0] / L).sin() + 0.4 * (4.0 * PI * x[0] / L).cos()) * profile(x[1])
    })
}

#[test]
fn composition_is_periodic_in_time() {
    let p = params(0.04);
    let traj = kzk_march(&p, &beam(&slow_grid(32, 16)), 0.005, 0.1).unwrap();
    let ans = KzkAnsatz::new(&traj, &p).unwrap();
    let target = half_space(&p, 2.0, 33, 12);
    for t in [0.0, 0.37] {
        let a = ans.ubar(&target, t).unwrap();
        let b = ans.ubar(&target, t + L).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() <= 1e-10);
    }
}

#[test]
fn boundary_trace_closed_form() {
    let p = params(0.01);
    let i0 = Field::from_fn(&slow_grid(32, 8), |x| {
        (2.0 * PI * x[0] / L).sin() * profile(x[1])
    });
    let g = kzk_boundary_g(&i0, &p).unwrap();
    let k = p.c * p.c / p.rho0;
    let s = p.eps.sqrt();
    let exact = Field::from_fn(g.samples().grid(), |x| {
        -k * L / (2.0 * PI) * (2.0 * PI * x[0] / L).cos() * profile(s * x[1])
    });
    assert!(g.samples().sub(&exact).unwrap().max_abs() < 1e-13);
    assert!(crate::numerics::spectral::max_line_mean(g.samples(), 0) <= 1e-12);
    assert!(kzk_boundary_g(&i0.map(|v| v + 0.1), &p).is_err());
}

#[test]
fn initial_data_is_consistent() {
    let p = params(0.04);
    let traj = kzk_march(&p, &beam(&slow_grid(64, 16)), 0.002, 0.2).unwrap();
    let ans = KzkAnsatz::new(&traj, &p).unwrap();
    let target = half_space(&p, 4.0, 81, 16);
    let set = ans.initial_data(&target).unwrap();
    let g = set.g.as_ref().unwrap();
    let slice = target.stride(0);
    let (rate, _) = g.rate_at_start().unwrap();
    for j in 0..slice {
        assert!((set.u0.values()[j] - g.slice(0)[j]).abs() <= 1e-12);
        assert!((set.u1.values()[j] - rate[j]).abs() <= 1e-12);
    }
    // u1 against a centred difference of ubar in t
    let mut errs = vec![];
    for h in [1e-2, 5e-3] {
        let fd = ans
            .ubar(&target, h)
            .unwrap()
            .sub(&ans.ubar(&target, -h).unwrap())
            .unwrap()
            .scaled(0.5 / h);
        errs.push(l2_norm_all(&fd.sub(&set.u1).unwrap()) / l2_norm_all(&set.u1));
    }
    assert!(errs[1] < 1e-3 && errs[0] / errs[1] > 3.5, "{errs:?}");
}

#[test]
fn chain_rule_in_depth() {
    // for z-independent I, d_x1 ubar = -(1/c) d_t ubar
    let p = params(0.04);
    let i0 = Field::from_fn(&slow_grid(32, 8), |x| {
        0.01 * (2.0 * PI * x[0] / L).sin() * profile(x[1])
    });
    let ans = KzkAnsatz::new(&frozen(&i0, 11, 0.02), &p).unwrap();
    let target = half_space(&p, 2.0, 161, 8);
    let u = ans.ubar(&target, 0.2).unwrap();
    let ut = ans.ubar_t(&target, 0.2).unwrap();
    let dx = fd_derivative(&u, 0, 1).unwrap();
    let err = dx.zip_map(&ut, |a, b| a + b / p.c).unwrap().max_abs() / ut.max_abs();
    assert!(err < 1e-5, "{err:e}");
}

fn npe_target(p: &ModelParams, n: usize) -> GridSpec {
    GridSpec::new(vec![
        AxisSpec::periodic(L, n, AxisRole::Propagation),
        AxisSpec::periodic(2.0 * PI / p.eps.sqrt(), 8, AxisRole::Transverse),
    ])
    .unwrap()
}

#[test]
fn npe_data_closed_forms() {
    let xi0 = Field::from_fn(&slow_grid(32, 8), |x| {
        0.01 * (2.0 * PI * x[0] / L).sin() * profile(x[1])
    });
    let mut ratios = vec![];
    for eps in [0.02, 0.01] {
        let p = params(eps);
        let target = npe_target(&p, 32);
        let set = npe_initial_data(&xi0, &p, &target).unwrap();
        let s = eps.sqrt();
        let exact = Field::from_fn(&target, |x| {
            0.01 * p.c / p.rho0 * L / (2.0 * PI) * (2.0 * PI * x[0] / L).cos() * profile(s * x[1])
        });
        assert!(set.u0.sub(&exact).unwrap().max_abs() < 1e-13);
        let lead = Field::from_fn(&target, |x| {
            0.01 * p.c * p.c / p.rho0 * (2.0 * PI * x[0] / L).sin() * profile(s * x[1])
        });
        ratios.push(l2_norm_all(&set.u1.sub(&lead).unwrap()) / l2_norm_all(&lead) / eps);
    }
    // u1 - (c^2/rho0) xi0 is exactly linear in eps
    assert!((ratios[0] / ratios[1] - 1.0).abs() < 1e-10, "{ratios:?}");
    let p = params(0.02);
    let bad = GridSpec::new(vec![
        AxisSpec::periodic(2.0 * L, 32, AxisRole::Propagation),
        AxisSpec::periodic(10.0, 8, AxisRole::Transverse),
    ])
    .unwrap();
    assert!(npe_initial_data(&xi0, &p, &bad).is_err());
}

fn time_grid() -> GridSpec {
    GridSpec::new(vec![AxisSpec::periodic(
        2.0 * PI,
        16,
        AxisRole::Propagation,
    )])
    .unwrap()
}

fn ramp_traj(f: impl Fn(f64) -> f64) -> Trajectory {
    let g = time_grid();
    let dt = 0.01;
    let frames = (0..12)
        .map(|i| Field::from_fn(&g, |_| f(i as f64 * dt)))
        .collect();
    Trajectory::new(g, dt, 0.0, frames, MarchAxis::Time).unwrap()
}

#[test]
fn westervelt_linear_ramp() {
    let p = params(0.1);
    let k = p.eps / (p.c * p.c);
    let u = ramp_traj(|t| t);
    let pi = westervelt_forward(&u, &p).unwrap();
    let exact = ramp_traj(|t| t + k * t);
    for (a, b) in pi.frames().iter().zip(exact.frames()) {
        assert!(a.sub(b).unwrap().max_abs() < 1e-13);
    }
    let back = westervelt_inverse(&exact, &p, 1e-13).unwrap();
    for (a, b) in back.frames().iter().zip(u.frames()) {
        assert!(a.sub(b).unwrap().max_abs() < 1e-12);
    }
    let p0 = params(0.0);
    let same = westervelt_forward(&u, &p0).unwrap();
    assert_eq!(same.frames(), u.frames());
}

#[test]
fn westervelt_round_trip_and_gate() {
    let p = params(0.05);
    let g = time_grid();
    let dt = 0.02;
    let frames: Vec<Field> = (0..40)
        .map(|i| Field::from_fn(&g, |x| 0.5 * (x[0] - i as f64 * dt).sin()))
        .collect();
    let pi = Trajectory::new(g.clone(), dt, 0.0, frames, MarchAxis::Time).unwrap();
    let tol = 1e-12;
    let u = westervelt_inverse(&pi, &p, tol).unwrap();
    let again = westervelt_forward(&u, &p).unwrap();
    let scale = pi.frames().iter().map(l2_norm_all).fold(0.0, f64::max);
    // the defining relation holds to the iteration tolerance
    let k = p.eps / (p.c * p.c);
    let ut = crate::numerics::fd::time_derivative_series(&u, 1).unwrap();
    for i in 0..pi.len() {
        let rel = u
            .frame(i)
            .zip_map(ut.frame(i), |a, b| a + k * a * b)
            .unwrap();
        assert!(
            l2_norm_all(&rel.sub(pi.frame(i)).unwrap())
                <= 2.0 * tol * scale * (pi.len() as f64).sqrt()
        );
    }
    // the forward map differentiates u^2 rather than forming u u_t, so the round trip
    // closes to the finite-difference truncation error
    for (a, b) in again.frames().iter().zip(pi.frames()) {
        assert!(l2_norm_all(&a.sub(b).unwrap()) <= 1e-7 * scale);
    }
    let big = pi.map_frames(|f| Ok(f.scaled(40.0))).unwrap();
    assert!(matches!(
        westervelt_inverse(&big, &p, tol),
        Err(Error::InversionFailure(_))
    ));
}

#[test]
fn westervelt_initial_data_examples() {
    let g = time_grid();
    let u0 = Field::from_fn(&g, |x| x[0].sin());
    let z = Field::zeros(&g);
    let p = ModelParams::new(1.0, 1.0, 0.0, 1.4, 0.1).unwrap();
    let (pi0, pi1) = westervelt_initial_data(&u0, &z, &p).unwrap();
    assert!(pi0.sub(&u0).unwrap().max_abs() < 1e-15);
    let exact = Field::from_fn(&g, |x| -0.1 * x[0].sin().powi(2));
    assert!(pi1.sub(&exact).unwrap().max_abs() < 1e-13);
    let (a, b) = westervelt_initial_data(&u0, &u0, &params(0.0)).unwrap();
    assert_eq!((a.values(), b.values()), (u0.values(), u0.values()));
    let huge = u0.map(|v| 30.0 + v);
    assert!(matches!(
        westervelt_initial_data(
            &u0,
            &huge,
            &ModelParams::new(1.0, 1.0, 0.0, 1.4, 0.4).unwrap()
        ),
        Err(Error::Degeneracy { .. })
    ));
}

#[test]
fn bump_has_requested_energy() {
    let p = params(0.04);
    for grid in [half_space(&p, 10.0, 161, 32), npe_target(&p, 64)] {
        let b = delta_bump(&grid, 0.02).unwrap();
        let e = initial_energy(&b, &Field::zeros(&grid)).unwrap();
        assert!((e - 0.02).abs() < 1e-14);
        assert!(
            crate::numerics::spectral::max_line_mean(&b, 0) < 1e-10
                || grid.axis(0).kind == crate::numerics::grid::AxisKind::Bounded
        );
        assert!(b.values()[..grid.stride(0)].iter().all(|v| v.abs() < 1e-12));
    }
}
