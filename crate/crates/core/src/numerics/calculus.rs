//! Axis-agnostic spatial derivatives: spectral on periodic axes, finite differences on bounded ones.

use crate::error::Result;
use crate::numerics::fd;
use crate::numerics::field::Field;
use crate::numerics::grid::AxisKind;
use crate::numerics::spectral;

pub fn derivative(f: &Field, axis: usize, order: usize) -> Result<Field> {
    match f.grid().check_axis(axis)?.kind {
        AxisKind::Periodic => spectral::spectral_derivative(f, axis, order as u32),
        AxisKind::Bounded => fd::fd_derivative(f, axis, order),
    }
}

/// Sum of second derivatives over `axes`.
pub fn laplacian(f: &Field, axes: &[usize]) -> Result<Field> {
    let (periodic, bounded): (Vec<usize>, Vec<usize>) = axes
        .iter()
        .partition(|&&a| f.grid().axis(a).kind == AxisKind::Periodic);
    let mut out = if periodic.is_empty() {
        Field::zeros(f.grid())
    } else {
        spectral::spectral_laplacian(f, &periodic)?
    };
    for a in bounded {
        out.axpy(1.0, &fd::fd_derivative(f, a, 2)?)?;
    }
    Ok(out)
}

/// First derivatives along each of `axes`.
pub fn gradient(f: &Field, axes: &[usize]) -> Result<Vec<Field>> {
    axes.iter().map(|&a| derivative(f, a, 1)).collect()
}

/// `sum_a d_a f * d_a g` over `axes`.
pub fn grad_dot(f: &Field, g: &Field, axes: &[usize]) -> Result<Field> {
    let mut out = Field::zeros(f.grid());
    for &a in axes {
        let df = derivative(f, a, 1)?;
        let dg = derivative(g, a, 1)?;
        out.axpy(1.0, &df.mul(&dg)?)?;
    }
    Ok(out)
}

pub fn all_axes(f: &Field) -> Vec<usize> {
    (0..f.grid().ndim()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};
    use std::f64::consts::PI;

    #[test]
    fn mixed_laplacian() {
        let g = GridSpec::new(vec![
            AxisSpec::bounded(1.0, 41, AxisRole::Propagation),
            AxisSpec::periodic(2.0 * PI, 16, AxisRole::Transverse),
        ])
        .unwrap();
        let f = Field::from_fn(&g, |x| x[0] * x[0] * x[1].cos());
        let lap = laplacian(&f, &[0, 1]).unwrap();
        let exact = Field::from_fn(&g, |x| (2.0 - x[0] * x[0]) * x[1].cos());
        assert!(lap.sub(&exact).unwrap().max_abs() < 1e-9);
        let gd = grad_dot(&f, &f, &[0, 1]).unwrap();
        let exact = Field::from_fn(&g, |x| {
            (2.0 * x[0] * x[1].cos()).powi(2) + (x[0] * x[0] * x[1].sin()).powi(2)
        });
        assert!(gd.sub(&exact).unwrap().max_abs() < 1e-9);
    }
}
