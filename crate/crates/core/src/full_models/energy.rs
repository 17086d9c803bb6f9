//! Discrepancy energy between two trajectories.

use crate::error::{Error, Result};
use crate::full_models::ibvp::{sponge_start_index, SpongeConfig};
use crate::numerics::calculus::{all_axes, gradient};
use crate::numerics::fd::time_derivative_series;
use crate::numerics::field::{Field, Trajectory};
use crate::numerics::grid::{AxisKind, GridSpec};
use crate::numerics::spectral::axis_index;
use crate::series::ErrorSeries;

/// Quadrature weights of `grid`, zeroed for depth indices at or beyond `cut`.
fn weights(grid: &GridSpec, cut: Option<usize>) -> Vec<f64> {
    let per_axis: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.quadrature_weights()).collect();
    (0..grid.len())
        .map(|flat| {
            if let Some(c) = cut {
                if axis_index(grid, 0, flat) >= c {
                    return 0.0;
                }
            }
            per_axis
                .iter()
                .enumerate()
                .map(|(a, w)| w[axis_index(grid, a, flat)])
                .product()
        })
        .collect()
}

fn weighted_sq(f: &Field, w: &[f64]) -> f64 {
    f.values().iter().zip(w).map(|(v, w)| w * v * v).sum()
}

/// `E(t_i) = sqrt(|(uA - uB)_t|^2 + |grad(uA - uB)|^2)` per frame.
///
/// On half-space grids (bounded first axis) the sponge region of the default
/// [`SpongeConfig`] is excluded.
pub fn discrepancy_energy(ua: &Trajectory, ub: &Trajectory) -> Result<ErrorSeries> {
    let cut = match ua.grid().axis(0).kind {
        AxisKind::Bounded => Some(sponge_start_index(ua.grid(), &SpongeConfig::default())),
        AxisKind::Periodic => None,
    };
    discrepancy_energy_within(ua, ub, cut)
}

/// As [`discrepancy_energy`], integrating only over depth indices below `depth_cut`.
pub fn discrepancy_energy_within(
    ua: &Trajectory,
    ub: &Trajectory,
    depth_cut: Option<usize>,
) -> Result<ErrorSeries> {
    ua.check_compatible(ub)?;
    if (ua.start() - ub.start()).abs() > 1e-9 * ua.step() {
        return Err(Error::GridMismatch(format!(
            "trajectories start at {} and {}",
            ua.start(),
            ub.start()
        )));
    }
    let diff = ua.zip_frames(ub, |a, b| a.sub(b))?;
    let rate = time_derivative_series(&diff, 1)?;
    let w = weights(diff.grid(), depth_cut);
    let axes = all_axes(diff.frame(0));
    let e = (0..diff.len())
        .map(|i| {
            let mut s = weighted_sq(rate.frame(i), &w);
            for g in gradient(diff.frame(i), &axes)? {
                s += weighted_sq(&g, &w);
            }
            Ok(s.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = ErrorSeries::new(diff.positions(), e, f64::NAN, 0.0)?;
    series.shape = diff.grid().shape();
    Ok(series)
}
