//! Fourier calculus on periodic axes.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numerics::field::Field;
use crate::numerics::grid::GridSpec;
use crate::numerics::norm::l2_norm_all;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized FFT of every line along `axis`.
pub fn fft_axis(data: &mut [Complex64], grid: &GridSpec, axis: usize, inverse: bool) {
    let n = grid.axis(axis).points;
    let stride = grid.stride(axis);
    let fft = plan(n, inverse);
    if stride == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    grid.for_each_line(axis, |base| {
        for (k, c) in line.iter_mut().enumerate() {
            *c = data[base + k * stride];
        }
        fft.process_with_scratch(&mut line, &mut scratch);
        for (k, c) in line.iter().enumerate() {
            data[base + k * stride] = *c;
        }
    });
}

/// Forward transform over `axes` (each must be periodic).
pub fn forward(values: &[f64], grid: &GridSpec, axes: &[usize]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for &a in axes {
        fft_axis(&mut data, grid, a, false);
    }
    data
}

/// Inverse of [`forward`], returning the real part.
pub fn inverse(mut data: Vec<Complex64>, grid: &GridSpec, axes: &[usize]) -> Vec<f64> {
    let mut scale = 1.0;
    for &a in axes {
        fft_axis(&mut data, grid, a, true);
        scale /= grid.axis(a).points as f64;
    }
    data.into_iter().map(|c| c.re * scale).collect()
}

/// Axis index of every flat sample, used to look up per-axis wavenumbers.
pub(crate) fn axis_index(grid: &GridSpec, axis: usize, flat: usize) -> usize {
    (flat / grid.stride(axis)) % grid.axis(axis).points
}

/// Whether mode `m` of an `n`-point axis is the unpaired Nyquist mode.
pub(crate) fn is_nyquist(m: usize, n: usize) -> bool {
    n % 2 == 0 && m == n / 2
}

/// Multiplies each Fourier coefficient along `axis` by `symbol(mode_index, k)`.
pub fn apply_symbol(
    f: &Field,
    axis: usize,
    symbol: impl Fn(usize, f64) -> Complex64,
) -> Result<Field> {
    let grid = f.grid();
    let spec = grid.require_periodic(axis)?;
    let ks = spec.wavenumbers();
    let n = spec.points;
    let stride = grid.stride(axis);
    let mult: Vec<Complex64> = (0..n).map(|m| symbol(m, ks[m])).collect();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_axis(&mut data, grid, axis, false);
    for (flat, c) in data.iter_mut().enumerate() {
        *c *= mult[(flat / stride) % n];
    }
    fft_axis(&mut data, grid, axis, true);
    let scale = 1.0 / n as f64;
    let values = data.into_iter().map(|c| c.re * scale).collect();
    Field::from_parts(grid.clone(), values).ensure_finite("spectral operator")
}

/// Symbol of `d^order/dx^order`; the Nyquist mode is dropped for odd orders.
pub(crate) fn derivative_symbol(m: usize, n: usize, k: f64, order: u32) -> Complex64 {
    if order % 2 == 1 && is_nyquist(m, n) {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, k).powu(order)
}

pub fn spectral_derivative(f: &Field, axis: usize, order: u32) -> Result<Field> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "spectral derivative order must be 1..=4, got {order}"
        )));
    }
    let n = f.grid().check_axis(axis)?.points;
    apply_symbol(f, axis, |m, k| derivative_symbol(m, n, k, order))
}

/// Largest |mean| over all lines along `axis`.
pub fn max_line_mean(f: &Field, axis: usize) -> f64 {
    let grid = f.grid();
    let n = grid.axis(axis).points;
    let stride = grid.stride(axis);
    let v = f.values();
    let mut worst: f64 = 0.0;
    grid.for_each_line(axis, |base| {
        let s: f64 = (0..n).map(|k| v[base + k * stride]).sum();
        worst = worst.max((s / n as f64).abs());
    });
    worst
}

/// Removes the mean of every line along `axis`, returning the largest correction.
pub fn project_mean_zero(f: &mut Field, axis: usize) -> f64 {
    let grid = f.grid().clone();
    let n = grid.axis(axis).points;
    let stride = grid.stride(axis);
    let v = f.values_mut();
    let mut worst: f64 = 0.0;
    grid.for_each_line(axis, |base| {
        let mean = (0..n).map(|k| v[base + k * stride]).sum::<f64>() / n as f64;
        for k in 0..n {
            v[base + k * stride] -= mean;
        }
        worst = worst.max(mean.abs());
    });
    worst
}

/// Relative tolerance on the line mean accepted by [`antiderivative_mean_zero`].
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// The periodic antiderivative with zero mean along `axis`.
///
/// Equal to `int_0^x f + int_0^L (l/L) f(l) dl`, which in Fourier space is `1/(ik)` on
/// every nonzero mode.
pub fn antiderivative_mean_zero(f: &Field, axis: usize) -> Result<Field> {
    let spec = f.grid().require_periodic(axis)?;
    let n = spec.points;
    let rms = l2_norm_all(f)
        / f.grid()
            .axes()
            .iter()
            .map(|a| a.extent)
            .product::<f64>()
            .sqrt();
    let mean = max_line_mean(f, axis);
    let limit = MEAN_ZERO_TOL * rms.max(f64::MIN_POSITIVE);
    if mean > limit {
        return Err(Error::MeanViolation { axis, mean, limit });
    }
    apply_symbol(f, axis, |m, k| {
        if m == 0 || is_nyquist(m, n) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / k)
        }
    })
}

/// Whether mode `m` of an `n`-point axis survives the 2/3 rule.
pub fn kept_by_two_thirds(m: usize, n: usize) -> bool {
    let signed = if m <= n / 2 { m } else { n - m };
    3 * signed < n
}

/// Zeroes the upper third of the modes on each listed axis.
pub fn dealias(f: &Field, axes: &[usize]) -> Result<Field> {
    let grid = f.grid();
    for &a in axes {
        grid.require_periodic(a)?;
    }
    if axes.is_empty() {
        return Ok(f.clone());
    }
    let mut data = forward(f.values(), grid, axes);
    dealias_spectrum(&mut data, grid, axes);
    Ok(Field::from_parts(grid.clone(), inverse(data, grid, axes)))
}

pub(crate) fn dealias_spectrum(data: &mut [Complex64], grid: &GridSpec, axes: &[usize]) {
    for &a in axes {
        let n = grid.axis(a).points;
        let stride = grid.stride(a);
        for (flat, c) in data.iter_mut().enumerate() {
            if !kept_by_two_thirds((flat / stride) % n, n) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Sum over the periodic axes of `d^2/dx^2`, via one forward/inverse transform pair.
pub fn spectral_laplacian(f: &Field, axes: &[usize]) -> Result<Field> {
    let grid = f.grid();
    let mut k2 = Vec::with_capacity(axes.len());
    for &a in axes {
        let ks = grid.require_periodic(a)?.wavenumbers();
        k2.push(ks.iter().map(|k| k * k).collect::<Vec<_>>());
    }
    let mut data = forward(f.values(), grid, axes);
    for (flat, c) in data.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, &a) in axes.iter().enumerate() {
            s += k2[j][axis_index(grid, a, flat)];
        }
        *c *= -s;
    }
    Ok(Field::from_parts(grid.clone(), inverse(data, grid, axes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::{AxisRole, AxisSpec};
    use std::f64::consts::PI;

    fn line(n: usize, l: f64) -> GridSpec {
        GridSpec::new(vec![AxisSpec::periodic(l, n, AxisRole::TimeLike)]).unwrap()
    }

    fn max_err(a: &Field, b: &Field) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn derivative_of_sine() {
        let g = line(32, 2.0 * PI);
        let f = Field::from_fn(&g, |x| x[0].sin());
        let d = spectral_derivative(&f, 0, 1).unwrap();
        assert!(max_err(&d, &Field::from_fn(&g, |x| x[0].cos())) < 1e-13);
        let f3 = Field::from_fn(&g, |x| (3.0 * x[0]).sin());
        let d2 = spectral_derivative(&f3, 0, 2).unwrap();
        assert!(max_err(&d2, &f3.scaled(-9.0)) < 1e-12);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = line(16, 2.0 * PI);
        let f = Field::from_fn(&g, |_| 3.5);
        assert!(spectral_derivative(&f, 0, 1).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn bounded_axis_is_rejected() {
        let g = GridSpec::new(vec![AxisSpec::bounded(1.0, 9, AxisRole::Propagation)]).unwrap();
        let f = Field::zeros(&g);
        assert!(matches!(
            spectral_derivative(&f, 0, 1),
            Err(Error::UnsupportedAxis { .. })
        ));
    }

    #[test]
    fn antiderivative_closed_forms() {
        let l = 3.0;
        let g = line(64, l);
        let w = 2.0 * PI / l;
        let s = Field::from_fn(&g, |x| (w * x[0]).sin());
        let c = Field::from_fn(&g, |x| (w * x[0]).cos());
        let a = antiderivative_mean_zero(&s, 0).unwrap();
        assert!(max_err(&a, &c.scaled(-1.0 / w)) < 1e-14);
        let b = antiderivative_mean_zero(&c, 0).unwrap();
        assert!(max_err(&b, &s.scaled(1.0 / w)) < 1e-14);
        assert_eq!(
            antiderivative_mean_zero(&Field::zeros(&g), 0)
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn antiderivative_matches_integral_formula() {
        // int_0^x f + int_0^L (l/L) f dl, evaluated by fine trapezoid quadrature.
        let l = 2.0;
        let g = line(32, l);
        let f = |x: f64| (PI * x).sin() + 0.5 * (3.0 * PI * x).cos();
        let field = Field::from_fn(&g, |x| f(x[0]));
        let a = antiderivative_mean_zero(&field, 0).unwrap();
        let quad = |lo: f64, hi: f64, h: &dyn Fn(f64) -> f64| {
            let m = 20000;
            let dx = (hi - lo) / m as f64;
            (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                    w * h(lo + i as f64 * dx)
                })
                .sum::<f64>()
                * dx
        };
        let shift = quad(0.0, l, &|s| s / l * f(s));
        for (i, x) in g.axis(0).coordinates().iter().enumerate() {
            let expect = quad(0.0, *x, &f) + shift;
            assert!((a.values()[i] - expect).abs() < 1e-7, "{i}");
        }
    }

    #[test]
    fn antiderivative_rejects_mean() {
        let g = line(16, 1.0);
        let f = Field::from_fn(&g, |x| 1.0 + (2.0 * PI * x[0]).sin());
        assert!(matches!(
            antiderivative_mean_zero(&f, 0),
            Err(Error::MeanViolation { .. })
        ));
    }

    #[test]
    fn dealias_rule() {
        let n = 24;
        let g = line(n, 2.0 * PI);
        let low = Field::from_fn(&g, |x| x[0].sin() + (5.0 * x[0]).cos());
        assert!(max_err(&dealias(&low, &[0]).unwrap(), &low) < 1e-14);
        let top = Field::from_fn(&g, |x| (12.0 * x[0]).cos());
        assert!(dealias(&top, &[0]).unwrap().max_abs() < 1e-14);
        let edge = Field::from_fn(&g, |x| (8.0 * x[0]).cos());
        assert!(dealias(&edge, &[0]).unwrap().max_abs() < 1e-14);
        let kept = Field::from_fn(&g, |x| (7.0 * x[0]).cos());
        assert!(max_err(&dealias(&kept, &[0]).unwrap(), &kept) < 1e-13);
    }

    #[test]
    fn laplacian_two_axes() {
        let g = GridSpec::new(vec![
            AxisSpec::periodic(2.0 * PI, 16, AxisRole::Propagation),
            AxisSpec::periodic(PI, 16, AxisRole::Transverse),
        ])
        .unwrap();
        let f = Field::from_fn(&g, |x| x[0].sin() * (2.0 * x[1]).cos());
        let lap = spectral_laplacian(&f, &[0, 1]).unwrap();
        assert!(max_err(&lap, &f.scaled(-5.0)) < 1e-12);
    }
}
