//! Quadrature norms.

use crate::error::{Error, Result};
use crate::numerics::field::Field;
use crate::numerics::grid::GridSpec;
use crate::numerics::spectral;

/// `sqrt(sum f^2 * prod_{a in axes} w_a)`: quadrature over the listed axes,
/// plain summation over the others.
pub fn l2_norm(f: &Field, axes: &[usize]) -> Result<f64> {
    let grid = f.grid();
    let mut weights = Vec::with_capacity(axes.len());
    for (i, &a) in axes.iter().enumerate() {
        grid.check_axis(a)?;
        if axes[..i].contains(&a) {
            return Err(Error::InvalidParameter(format!("axis {a} listed twice")));
        }
        weights.push((a, grid.axis(a).quadrature_weights()));
    }
    let mut sum = 0.0;
    for (flat, v) in f.values().iter().enumerate() {
        let mut w = 1.0;
        for (a, wa) in &weights {
            w *= wa[spectral::axis_index(grid, *a, flat)];
        }
        sum += w * v * v;
    }
    Ok(sum.sqrt())
}

/// L2 norm over every axis of the grid.
pub fn l2_norm_all(f: &Field) -> f64 {
    let axes: Vec<usize> = (0..f.grid().ndim()).collect();
    l2_norm(f, &axes).expect("all axes are valid")
}

/// Measure-normalized L2 norm (root mean square under the grid quadrature).
pub fn rms(f: &Field) -> f64 {
    l2_norm_all(f) / domain_measure(f.grid()).sqrt()
}

pub fn domain_measure(grid: &GridSpec) -> f64 {
    grid.axes().iter().map(|a| a.extent).product()
}

/// L2 norm computed from Fourier coefficients on a fully periodic grid.
pub fn l2_norm_modes(f: &Field) -> Result<f64> {
    hs_norm(f, 0.0)
}

/// `H^s` norm with weights `(1 + |k|^2)^s`; only defined on fully periodic grids.
pub fn hs_norm(f: &Field, s: f64) -> Result<f64> {
    let grid = f.grid();
    if let Some(axis) = grid.axes().iter().position(|a| !a.is_periodic()) {
        return Err(Error::UnsupportedAxis {
            axis,
            expected: "periodic",
            found: "bounded",
        });
    }
    let axes: Vec<usize> = (0..grid.ndim()).collect();
    let ks: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.wavenumbers()).collect();
    let data = spectral::forward(f.values(), grid, &axes);
    let n = grid.len() as f64;
    let mut sum = 0.0;
    for (flat, c) in data.iter().enumerate() {
        let mut k2 = 0.0;
        for (a, ka) in ks.iter().enumerate() {
            let k = ka[spectral::axis_index(grid, a, flat)];
            k2 += k * k;
        }
        sum += (1.0 + k2).powf(s) * c.norm_sqr();
    }
    Ok((sum * domain_measure(grid) / (n * n)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{AxisRole, AxisSpec};
    use std::f64::consts::PI;

    #[test]
    fn closed_form_norms() {
        let b = GridSpec::new(vec![AxisSpec::bounded(1.0, 11, AxisRole::Propagation)]).unwrap();
        assert!((l2_norm_all(&Field::from_fn(&b, |_| 1.0)) - 1.0).abs() < 1e-15);
        assert_eq!(l2_norm_all(&Field::zeros(&b)), 0.0);
        let p = GridSpec::new(vec![AxisSpec::periodic(
            2.0 * PI,
            32,
            AxisRole::Propagation,
        )])
        .unwrap();
        let s = Field::from_fn(&p, |x| x[0].sin());
        assert!((l2_norm_all(&s) - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn parseval_and_hs() {
        let g = GridSpec::new(vec![
            AxisSpec::periodic(2.0 * PI, 16, AxisRole::Propagation),
            AxisSpec::periodic(2.0 * PI, 8, AxisRole::Transverse),
        ])
        .unwrap();
        let f = Field::from_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos() + 0.3);
        let phys = l2_norm_all(&f);
        assert!((phys - l2_norm_modes(&f).unwrap()).abs() < 1e-12 * phys);
        // sin(2x)cos(y): |k|^2 = 5, L2^2 = pi^2; constant: 0.09 * 4 pi^2.
        let h1 = hs_norm(&f, 1.0).unwrap();
        let expect = (6.0 * PI * PI + 0.09 * 4.0 * PI * PI).sqrt();
        assert!((h1 - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn hs_rejects_bounded() {
        let g = GridSpec::new(vec![AxisSpec::bounded(1.0, 8, AxisRole::Propagation)]).unwrap();
        assert!(hs_norm(&Field::zeros(&g), 1.0).is_err());
    }

    #[test]
    fn partial_axes() {
        let g = GridSpec::new(vec![
            AxisSpec::periodic(2.0, 8, AxisRole::Propagation),
            AxisSpec::periodic(4.0, 8, AxisRole::Transverse),
        ])
        .unwrap();
        let f = Field::from_fn(&g, |_| 1.0);
        // weight 0.25 per sample on axis 0, 64 samples.
        assert!((l2_norm(&f, &[0]).unwrap() - 4.0).abs() < 1e-14);
        assert!(l2_norm(&f, &[0, 0]).is_err());
        assert!(l2_norm(&f, &[2]).is_err());
    }
}
