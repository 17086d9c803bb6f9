use proptest::prelude::*;

use nlac_core::numerics::{
    antiderivative_mean_zero, fd_derivative, l2_norm_all, spectral_derivative, AxisRole, AxisSpec,
    Field, GridSpec,
};

/// A band-limited field on `n x m` points: random modes below each axis' Nyquist.
fn band_limited(n: usize, m: usize, lx: f64, ly: f64, coef: &[f64], mean: f64) -> Field {
    let grid = GridSpec::new(vec![
        AxisSpec::periodic(lx, n, AxisRole::TimeLike),
        AxisSpec::periodic(ly, m, AxisRole::Transverse),
    ])
    .unwrap();
    let kx = 2.0 * std::f64::consts::PI / lx;
    let ky = 2.0 * std::f64::consts::PI / ly;
    let terms: Vec<(f64, f64, f64, f64)> = coef
        .chunks_exact(4)
        .map(|c| {
            let p = 1 + (c[0].abs() * 1e3) as usize % (n / 2 - 1);
            let q = (c[1].abs() * 1e3) as usize % (m / 2);
            (p as f64 * kx, q as f64 * ky, c[2], c[3])
        })
        .collect();
    Field::from_fn(&grid, |x| {
        mean + terms
            .iter()
            .map(|(a, b, amp, ph)| amp * (a * x[0] + ph).cos() * (b * x[1]).cos())
            .sum::<f64>()
    })
}

fn sizes() -> impl Strategy<Value = (usize, usize, f64, f64)> {
    (
        prop::sample::select(vec![8usize, 16, 32, 48, 64]),
        prop::sample::select(vec![8usize, 12, 16]),
        0.5f64..20.0,
        0.5f64..20.0,
    )
}

fn rel(a: &Field, b: &Field) -> f64 {
    l2_norm_all(&a.sub(b).unwrap()) / l2_norm_all(b).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_inverts_antiderivative(
        (n, m, lx, ly) in sizes(),
        coef in prop::collection::vec(-1.0f64..1.0, 4..24),
    ) {
        let f = band_limited(n, m, lx, ly, &coef, 0.0);
        let g = antiderivative_mean_zero(&f, 0).unwrap();
        let back = spectral_derivative(&g, 0, 1).unwrap();
        prop_assert!(rel(&back, &f) <= 1e-12);
        let mean = g.values().iter().sum::<f64>() / g.values().len() as f64;
        prop_assert!(mean.abs() <= 1e-12 * l2_norm_all(&f).max(1e-300));
        // the largest inverse wavenumber bounds the operator norm
        prop_assert!(l2_norm_all(&g) <= lx / (2.0 * std::f64::consts::PI) * l2_norm_all(&f) * (1.0 + 1e-12));
    }

    #[test]
    fn antiderivative_rejects_nonzero_mean(
        (n, m, lx, ly) in sizes(),
        coef in prop::collection::vec(-1.0f64..1.0, 4..12),
        mean in 0.01f64..1.0,
    ) {
        let f = band_limited(n, m, lx, ly, &coef, mean);
        prop_assert!(antiderivative_mean_zero(&f, 0).is_err());
    }

    #[test]
    fn parseval((n, m, lx, ly) in sizes(), coef in prop::collection::vec(-1.0f64..1.0, 4..24)) {
        let f = band_limited(n, m, lx, ly, &coef, 0.3);
        let phys = l2_norm_all(&f);
        let modal = nlac_core::numerics::l2_norm_modes(&f).unwrap();
        prop_assert!((phys - modal).abs() <= 1e-12 * phys.max(1e-300));
    }

    #[test]
    fn derivatives_are_linear(
        (n, m, lx, ly) in sizes(),
        c1 in prop::collection::vec(-1.0f64..1.0, 8),
        c2 in prop::collection::vec(-1.0f64..1.0, 8),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        order in 1u32..4,
    ) {
        let f = band_limited(n, m, lx, ly, &c1, 0.0);
        let g = band_limited(n, m, lx, ly, &c2, 0.0);
        let combo = f.zip_map(&g, |x, y| a * x + b * y).unwrap();
        for axis in 0..2 {
            let lhs = spectral_derivative(&combo, axis, order).unwrap();
            let df = spectral_derivative(&f, axis, order).unwrap();
            let dg = spectral_derivative(&g, axis, order).unwrap();
            let rhs = df.zip_map(&dg, |x, y| a * x + b * y).unwrap();
            let scale = a.abs() * l2_norm_all(&df) + b.abs() * l2_norm_all(&dg);
            prop_assert!(l2_norm_all(&lhs.sub(&rhs).unwrap()) <= 1e-13 * scale.max(1e-300));
        }
        let lhs = antiderivative_mean_zero(&combo, 0).unwrap();
        let rhs = antiderivative_mean_zero(&f, 0).unwrap()
            .zip_map(&antiderivative_mean_zero(&g, 0).unwrap(), |x, y| a * x + b * y).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-13 || l2_norm_all(&rhs) < 1e-12);
    }

    #[test]
    fn finite_differences_are_linear(
        c1 in prop::collection::vec(-1.0f64..1.0, 5..40),
        c2 in prop::collection::vec(-1.0f64..1.0, 5..40),
        a in -3.0f64..3.0,
        order in 1usize..4,
    ) {
        let n = c1.len().min(c2.len()).max(order + 5);
        let grid = GridSpec::new(vec![AxisSpec::bounded(1.0, n, AxisRole::Propagation)]).unwrap();
        let pad = |c: &[f64]| (0..n).map(|i| c.get(i).copied().unwrap_or(0.0)).collect::<Vec<_>>();
        let f = Field::new(grid.clone(), pad(&c1)).unwrap();
        let g = Field::new(grid.clone(), pad(&c2)).unwrap();
        let combo = f.zip_map(&g, |x, y| a * x + y).unwrap();
        let lhs = fd_derivative(&combo, 0, order).unwrap();
        let df = fd_derivative(&f, 0, order).unwrap();
        let dg = fd_derivative(&g, 0, order).unwrap();
        let rhs = df.zip_map(&dg, |x, y| a * x + y).unwrap();
        let scale = a.abs() * l2_norm_all(&df) + l2_norm_all(&dg);
        prop_assert!(l2_norm_all(&lhs.sub(&rhs).unwrap()) <= 1e-13 * scale.max(1e-300));
    }
}
