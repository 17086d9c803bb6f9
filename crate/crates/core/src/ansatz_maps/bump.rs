use crate::error::{Error, Result};
use crate::full_models::SpongeConfig;
use crate::numerics::calculus::{all_axes, gradient};
use crate::numerics::field::Field;
use crate::numerics::grid::{AxisKind, GridSpec};
use crate::numerics::spectral::project_mean_zero;

/// `sqrt(|u1|^2 + |grad u0|^2)` with the grid quadrature: the discrepancy energy at `t = 0`
/// of data `(u0, u1)` against zero.
pub fn initial_energy(u0: &Field, u1: &Field) -> Result<f64> {
    u0.check_same_grid(u1)?;
    let grid = u0.grid();
    let w = weights(grid);
    let mut s: f64 = u1.values().iter().zip(&w).map(|(v, w)| w * v * v).sum();
    for g in gradient(u0, &all_axes(u0))? {
        s += g
            .values()
            .iter()
            .zip(&w)
            .map(|(v, w)| w * v * v)
            .sum::<f64>();
    }
    Ok(s.sqrt())
}

fn weights(grid: &GridSpec) -> Vec<f64> {
    let per_axis: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.quadrature_weights()).collect();
    let mut idx = vec![0; grid.ndim()];
    (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            idx.iter().zip(&per_axis).map(|(&i, w)| w[i]).product()
        })
        .collect()
}

/// Mean-zero perturbation of the initial displacement with `E(0) = delta`.
///
/// The shape is an `x1`-derivative of a Gaussian centred in the first axis (in the
/// undamped part of a half-space), with widths of 1/16 of the first extent and 1/8 of the
/// transverse extents.
pub fn delta_bump(grid: &GridSpec, delta: f64) -> Result<Field> {
    let first = grid.axis(0);
    delta_bump_at(
        grid,
        delta,
        SpongeConfig::default().start(first.extent),
        &[],
    )
}

/// As [`delta_bump`] with the bump placed in `[0, window]` on a half-space (ignored on
/// periodic grids) and its centre moved by `shift[a]` times the extent (or window) of
/// axis `a`; missing entries mean no shift.
pub fn delta_bump_at(grid: &GridSpec, delta: f64, window: f64, shift: &[f64]) -> Result<Field> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    if shift.iter().any(|s| !(s.is_finite() && s.abs() < 0.5)) {
        return Err(Error::InvalidParameter(format!(
            "bump shifts must lie in (-0.5, 0.5), got {shift:?}"
        )));
    }
    let offset = |a: usize| shift.get(a).copied().unwrap_or(0.0);
    let first = grid.axis(0);
    let (center, width) = match first.kind {
        AxisKind::Periodic => ((0.5 + offset(0)) * first.extent, first.extent / 16.0),
        AxisKind::Bounded => {
            if !(window > 0.0 && window <= first.extent) {
                return Err(Error::InvalidParameter(format!(
                    "bump window {window} must lie in (0, {}]",
                    first.extent
                )));
            }
            ((0.5 + 0.5 * offset(0)) * window, window / 16.0)
        }
    };
    let trans: Vec<(f64, f64)> = grid.axes()[1..]
        .iter()
        .enumerate()
        .map(|(i, a)| ((0.5 + offset(i + 1)) * a.extent, a.extent / 8.0))
        .collect();
    let mut b = Field::from_fn(grid, |x| {
        let s = (x[0] - center) / width;
        let mut r2 = s * s;
        for (xi, (c, w)) in x[1..].iter().zip(&trans) {
            r2 += ((xi - c) / w).powi(2);
        }
        -s * (-r2).exp()
    });
    if first.kind == AxisKind::Periodic {
        project_mean_zero(&mut b, 0);
    }
    if delta == 0.0 {
        return Ok(Field::zeros(grid));
    }
    let e = initial_energy(&b, &Field::zeros(grid))?;
    Ok(b.scaled(delta / e))
}
