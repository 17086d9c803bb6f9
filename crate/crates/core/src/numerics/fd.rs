//! Fourth-order finite differences on bounded axes and along stored trajectories.

use crate::error::{Error, Result};
use crate::numerics::field::{Field, Trajectory};
use crate::numerics::grid::AxisKind;

/// Fornberg's recursion: weights for derivatives `0..=max_order` at `x0` on nodes `xs`.
/// Returns `w[d][j]`, the weight of node `j` in the `d`-th derivative.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Interior (central) stencil width for a fourth-order `order`-th derivative.
fn central_width(order: usize) -> usize {
    2 * order.div_ceil(2) + 3
}

/// One-sided stencil width for a fourth-order `order`-th derivative.
fn one_sided_width(order: usize) -> usize {
    order + 4
}

/// Minimum number of samples a fourth-order derivative of `order` needs.
pub fn min_points(order: usize) -> usize {
    one_sided_width(order).max(central_width(order))
}

/// Per-node stencils `(first node, weights)` for an `n`-point uniform line.
#[derive(Clone, Debug)]
pub struct Stencils {
    rows: Vec<(usize, Vec<f64>)>,
}

impl Stencils {
    pub fn bounded(n: usize, h: f64, order: usize) -> Result<Self> {
        let needed = min_points(order);
        if n < needed {
            return Err(Error::InsufficientSamples {
                what: "finite-difference line",
                needed,
                got: n,
            });
        }
        let cw = central_width(order);
        let half = cw / 2;
        let ow = one_sided_width(order);
        let scale = h.powi(order as i32);
        let central = weights_on(half as f64, cw, order, scale);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            if i >= half && i + half < n {
                rows.push((i - half, central.clone()));
            } else if i < half {
                rows.push((0, weights_on(i as f64, ow, order, scale)));
            } else {
                let first = n - ow;
                rows.push((first, weights_on((i - first) as f64, ow, order, scale)));
            }
        }
        Ok(Stencils { rows })
    }

    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        let (first, w) = &self.rows[i];
        (*first, w)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest offset between a node and any node its stencil touches.
    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, (first, w))| i.abs_diff(*first).max((first + w.len() - 1).abs_diff(i)))
            .max()
            .unwrap_or(0)
    }

    /// Applies the stencils to a strided line.
    pub fn apply_strided(&self, src: &[f64], base: usize, stride: usize, dst: &mut [f64]) {
        for (i, (first, w)) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * src[base + (first + j) * stride];
            }
            dst[base + i * stride] = acc;
        }
    }
}

fn weights_on(x0: f64, width: usize, order: usize, scale: f64) -> Vec<f64> {
    let xs: Vec<f64> = (0..width).map(|j| j as f64).collect();
    fornberg_weights(x0, &xs, order)[order]
        .iter()
        .map(|w| w / scale)
        .collect()
}

/// Fourth-order central stencil wrapped around a periodic line.
fn periodic_apply(
    order: usize,
    h: f64,
    src: &[f64],
    base: usize,
    stride: usize,
    n: usize,
    dst: &mut [f64],
) {
    let cw = central_width(order);
    let half = cw / 2;
    let w = weights_on(half as f64, cw, order, h.powi(order as i32));
    for i in 0..n {
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            let k = (i + n + j - half) % n;
            acc += wj * src[base + k * stride];
        }
        dst[base + i * stride] = acc;
    }
}

/// Fourth-order derivative along a bounded axis; central inside, one-sided at the ends.
pub fn fd_derivative(f: &Field, axis: usize, order: usize) -> Result<Field> {
    let grid = f.grid();
    let spec = grid.require_bounded(axis)?;
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference order must be 1..=3, got {order}"
        )));
    }
    let st = Stencils::bounded(spec.points, spec.spacing(), order)?;
    let stride = grid.stride(axis);
    let mut out = vec![0.0; grid.len()];
    grid.for_each_line(axis, |base| {
        st.apply_strided(f.values(), base, stride, &mut out)
    });
    Field::from_parts(grid.clone(), out).ensure_finite("fd_derivative")
}

/// Fourth-order finite difference along any axis: wrapped on periodic axes.
pub fn fd_derivative_any(f: &Field, axis: usize, order: usize) -> Result<Field> {
    let grid = f.grid();
    let spec = grid.check_axis(axis)?;
    match spec.kind {
        AxisKind::Bounded => fd_derivative(f, axis, order),
        AxisKind::Periodic => {
            let n = spec.points;
            let h = spec.spacing();
            let stride = grid.stride(axis);
            let mut out = vec![0.0; grid.len()];
            grid.for_each_line(axis, |base| {
                periodic_apply(order, h, f.values(), base, stride, n, &mut out)
            });
            Field::from_parts(grid.clone(), out).ensure_finite("fd_derivative")
        }
    }
}

/// Fourth-order derivative of a trajectory along its march variable.
pub fn time_derivative_series(traj: &Trajectory, order: usize) -> Result<Trajectory> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "time-derivative order must be 1..=3, got {order}"
        )));
    }
    let n = traj.len();
    let needed = (order + 4).max(min_points(order));
    if n < needed {
        return Err(Error::InsufficientSamples {
            what: "trajectory frames",
            needed,
            got: n,
        });
    }
    let st = Stencils::bounded(n, traj.step(), order)?;
    let npts = traj.grid().len();
    let frames = (0..n)
        .map(|i| {
            let (first, w) = st.row(i);
            let mut acc = vec![0.0; npts];
            for (j, wj) in w.iter().enumerate() {
                for (a, v) in acc.iter_mut().zip(traj.frame(first + j).values()) {
                    *a += wj * v;
                }
            }
            Field::from_parts(traj.grid().clone(), acc).ensure_finite("time_derivative_series")
        })
        .collect::<Result<Vec<_>>>()?;
    traj.with_frames(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::field::MarchAxis;
    use crate::numerics::grid::{AxisRole, AxisSpec, GridSpec};

    fn bounded(n: usize, l: f64) -> GridSpec {
        GridSpec::new(vec![AxisSpec::bounded(l, n, AxisRole::Propagation)]).unwrap()
    }

    #[test]
    fn fornberg_reproduces_textbook_weights() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg_weights(0.0, &xs, 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((w[1][j] - d1[j]).abs() < 1e-14);
            assert!((w[2][j] - d2[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn quadratic_second_derivative_is_exact() {
        let g = bounded(9, 1.0);
        let f = Field::from_fn(&g, |x| x[0] * x[0]);
        let d = fd_derivative(&f, 0, 2).unwrap();
        assert!(d.values().iter().all(|v| (v - 2.0).abs() <= 1e-10));
    }

    #[test]
    fn ramp_slope() {
        let g = bounded(5, 1.0);
        let f = Field::from_fn(&g, |x| 3.0 * x[0] - 1.0);
        let d = fd_derivative(&f, 0, 1).unwrap();
        assert!(d.values().iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn fourth_order_refinement() {
        let err = |n: usize| {
            let g = bounded(n, 1.0);
            let d = fd_derivative(&Field::from_fn(&g, |x| x[0].sin()), 0, 1).unwrap();
            d.sub(&Field::from_fn(&g, |x| x[0].cos()))
                .unwrap()
                .max_abs()
        };
        let ratio = err(21) / err(41);
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
    }

    #[test]
    fn too_few_points() {
        let g = bounded(5, 1.0);
        assert!(matches!(
            fd_derivative(&Field::zeros(&g), 0, 2),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    fn series(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> Trajectory {
        let g = GridSpec::new(vec![AxisSpec::periodic(1.0, 8, AxisRole::Propagation)]).unwrap();
        let frames = (0..n)
            .map(|i| Field::from_fn(&g, |_| f(i as f64 * dt)))
            .collect();
        Trajectory::new(g, dt, 0.0, frames, MarchAxis::Time).unwrap()
    }

    #[test]
    fn cubic_third_derivative() {
        let t = series(12, 0.1, |t| t * t * t);
        let d = time_derivative_series(&t, 3).unwrap();
        for f in d.frames() {
            assert!(f.values().iter().all(|v| (v - 6.0).abs() <= 1e-8));
        }
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let d = time_derivative_series(&series(6, 0.3, |_| 2.0), 1).unwrap();
        assert!(d.frames().iter().all(|f| f.max_abs() < 1e-13));
    }

    #[test]
    fn second_derivative_converges_at_fourth_order() {
        let err = |dt: f64| {
            let n = (1.0 / dt).round() as usize + 1;
            let d = time_derivative_series(&series(n, dt, f64::sin), 2).unwrap();
            d.frames()
                .iter()
                .enumerate()
                .map(|(i, f)| (f.values()[0] + (i as f64 * dt).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(0.05) / err(0.025);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn insufficient_frames() {
        assert!(time_derivative_series(&series(6, 0.1, |t| t), 3).is_err());
    }

    #[test]
    fn periodic_wrap() {
        let g = GridSpec::new(vec![AxisSpec::periodic(
            2.0 * std::f64::consts::PI,
            64,
            AxisRole::TimeLike,
        )])
        .unwrap();
        let d = fd_derivative_any(&Field::from_fn(&g, |x| x[0].sin()), 0, 1).unwrap();
        assert!(
            d.sub(&Field::from_fn(&g, |x| x[0].cos()))
                .unwrap()
                .max_abs()
                < 1e-5
        );
    }
}
