//! Tensor-product grids with periodic and bounded axes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Minimum point count on a periodic axis.
pub const MIN_PERIODIC_POINTS: usize = 8;
/// Minimum point count on a bounded axis (one five-point stencil).
pub const MIN_BOUNDED_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum AxisKind {
    /// Uniform spacing `extent / points`, right endpoint excluded.
    Periodic,
    /// Uniform spacing `extent / (points - 1)`, both endpoints included.
    Bounded,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Periodic => "periodic",
            AxisKind::Bounded => "bounded",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            AxisKind::Periodic => 0,
            AxisKind::Bounded => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AxisKind::Periodic),
            1 => Some(AxisKind::Bounded),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum AxisRole {
    TimeLike,
    Propagation,
    Transverse,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub extent: f64,
    pub points: usize,
    pub role: AxisRole,
}

impl AxisSpec {
    pub fn periodic(extent: f64, points: usize, role: AxisRole) -> Self {
        AxisSpec {
            kind: AxisKind::Periodic,
            extent,
            points,
            role,
        }
    }

    pub fn bounded(extent: f64, points: usize, role: AxisRole) -> Self {
        AxisSpec {
            kind: AxisKind::Bounded,
            extent,
            points,
            role,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.kind == AxisKind::Periodic
    }

    pub fn spacing(&self) -> f64 {
        match self.kind {
            AxisKind::Periodic => self.extent / self.points as f64,
            AxisKind::Bounded => self.extent / (self.points - 1) as f64,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| i as f64 * h).collect()
    }

    /// Integer mode numbers in FFT order: 0, 1, .., N/2, -(N/2 - 1), .., -1 for even N.
    pub fn mode_numbers(&self) -> Vec<i64> {
        let n = self.points as i64;
        (0..n).map(|m| if m <= n / 2 { m } else { m - n }).collect()
    }

    /// Wavenumbers `2 pi m / extent` in FFT order. Only meaningful on periodic axes.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = 2.0 * PI / self.extent;
        self.mode_numbers()
            .into_iter()
            .map(|m| m as f64 * scale)
            .collect()
    }

    /// Quadrature weights: uniform on periodic axes, trapezoid on bounded axes.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.points];
        if self.kind == AxisKind::Bounded {
            w[0] *= 0.5;
            w[self.points - 1] *= 0.5;
        }
        w
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "axis {index}: extent must be positive, got {}",
                self.extent
            )));
        }
        let min = match self.kind {
            AxisKind::Periodic => MIN_PERIODIC_POINTS,
            AxisKind::Bounded => MIN_BOUNDED_POINTS,
        };
        if self.points < min {
            return Err(Error::InvalidGrid(format!(
                "axis {index}: {} axis needs at least {min} points, got {}",
                self.kind.name(),
                self.points
            )));
        }
        Ok(())
    }
}

/// Shape and geometry of a tensor-product grid. Samples are stored row-major,
/// the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GridSpec {
    axes: Vec<AxisSpec>,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 255 {
            return Err(Error::InvalidGrid(format!(
                "axis count must be in 1..=255, got {}",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            a.validate(i)?;
        }
        Ok(GridSpec { axes })
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &AxisSpec {
        &self.axes[i]
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance in the flat buffer between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.points).product()
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.axes.iter().all(AxisSpec::is_periodic)
    }

    pub fn check_axis(&self, axis: usize) -> Result<&AxisSpec> {
        self.axes.get(axis).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "axis {axis} out of range for a {}-d grid",
                self.ndim()
            ))
        })
    }

    pub fn require_periodic(&self, axis: usize) -> Result<&AxisSpec> {
        let a = self.check_axis(axis)?;
        if a.kind != AxisKind::Periodic {
            return Err(Error::UnsupportedAxis {
                axis,
                expected: "periodic",
                found: a.kind.name(),
            });
        }
        Ok(a)
    }

    pub fn require_bounded(&self, axis: usize) -> Result<&AxisSpec> {
        let a = self.check_axis(axis)?;
        if a.kind != AxisKind::Bounded {
            return Err(Error::UnsupportedAxis {
                axis,
                expected: "bounded",
                found: a.kind.name(),
            });
        }
        Ok(a)
    }

    /// Multi-index of a flat offset.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = flat % a.points;
            flat /= a.points;
        }
    }

    /// Invokes `f(base)` for the first element of every 1-d line along `axis`;
    /// the line's elements are `base + k * stride(axis)`.
    pub fn for_each_line(&self, axis: usize, mut f: impl FnMut(usize)) {
        let n = self.axes[axis].points;
        let inner = self.stride(axis);
        let outer: usize = self.axes[..axis].iter().map(|a| a.points).product();
        for o in 0..outer {
            for i in 0..inner {
                f(o * n * inner + i);
            }
        }
    }
}

/// A grid with materialized coordinates and cached wavenumbers.
#[derive(Clone, Debug)]
pub struct Grid {
    pub spec: GridSpec,
    pub coordinates: Vec<Vec<f64>>,
    /// `Some` for periodic axes, in FFT order.
    pub wavenumbers: Vec<Option<Vec<f64>>>,
}

pub fn make_grid(spec: &GridSpec) -> Result<Grid> {
    let spec = GridSpec::new(spec.axes.clone())?;
    let coordinates = spec.axes.iter().map(AxisSpec::coordinates).collect();
    let wavenumbers = spec
        .axes
        .iter()
        .map(|a| a.is_periodic().then(|| a.wavenumbers()))
        .collect();
    Ok(Grid {
        spec,
        coordinates,
        wavenumbers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_coordinates_exclude_endpoint() {
        let spec =
            GridSpec::new(vec![AxisSpec::periodic(2.0 * PI, 8, AxisRole::Propagation)]).unwrap();
        let g = make_grid(&spec).unwrap();
        for (i, x) in g.coordinates[0].iter().enumerate() {
            assert!((x - i as f64 * PI / 4.0).abs() < 1e-15);
        }
        assert!((g.coordinates[0][7] - 7.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn bounded_coordinates_include_endpoints() {
        let spec = GridSpec::new(vec![AxisSpec::bounded(1.0, 5, AxisRole::Propagation)]).unwrap();
        let g = make_grid(&spec).unwrap();
        assert_eq!(g.coordinates[0], vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(g.wavenumbers[0].is_none());
    }

    #[test]
    fn integer_wavenumbers_on_two_pi() {
        let spec =
            GridSpec::new(vec![AxisSpec::periodic(2.0 * PI, 8, AxisRole::Propagation)]).unwrap();
        let g = make_grid(&spec).unwrap();
        let mut k: Vec<i64> = g.wavenumbers[0]
            .as_ref()
            .unwrap()
            .iter()
            .map(|k| k.round() as i64)
            .collect();
        k.sort();
        assert_eq!(k, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(GridSpec::new(vec![AxisSpec::periodic(0.0, 16, AxisRole::Transverse)]).is_err());
        assert!(GridSpec::new(vec![AxisSpec::periodic(-1.0, 16, AxisRole::Transverse)]).is_err());
        assert!(GridSpec::new(vec![AxisSpec::periodic(1.0, 7, AxisRole::Transverse)]).is_err());
        assert!(GridSpec::new(vec![AxisSpec::bounded(1.0, 4, AxisRole::Transverse)]).is_err());
        assert!(GridSpec::new(vec![]).is_err());
    }

    #[test]
    fn line_iteration_covers_every_sample_once() {
        let spec = GridSpec::new(vec![
            AxisSpec::periodic(1.0, 8, AxisRole::Propagation),
            AxisSpec::bounded(1.0, 6, AxisRole::Transverse),
            AxisSpec::periodic(1.0, 10, AxisRole::Transverse),
        ])
        .unwrap();
        for axis in 0..3 {
            let mut seen = vec![0u8; spec.len()];
            let s = spec.stride(axis);
            spec.for_each_line(axis, |base| {
                for k in 0..spec.axis(axis).points {
                    seen[base + k * s] += 1;
                }
            });
            assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
