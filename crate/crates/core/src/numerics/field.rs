//! Sampled scalar fields and stored trajectories.

use crate::error::{Error, Result};
use crate::numerics::grid::GridSpec;

/// Real samples on a grid, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Field::new"));
        }
        Ok(Field { grid, values })
    }

    /// Builds a field without re-checking finiteness; the caller guarantees the length.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Field {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f` at every grid point; `f` receives the coordinates in axis order.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let coords: Vec<Vec<f64>> = grid.axes().iter().map(|a| a.coordinates()).collect();
        let mut idx = vec![0usize; grid.ndim()];
        let mut x = vec![0.0; grid.ndim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (d, &i) in idx.iter().enumerate() {
                    x[d] = coords[d][i];
                }
                f(&x)
            })
            .collect();
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field::from_parts(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scaled(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Field) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "shapes {:?} and {:?}",
                self.grid.shape(),
                other.grid.shape()
            )));
        }
        Ok(())
    }
}

/// Which variable a trajectory is ordered by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarchAxis {
    Time,
    Depth,
    SlowTime,
}

impl MarchAxis {
    pub fn label(self) -> &'static str {
        match self {
            MarchAxis::Time => "t",
            MarchAxis::Depth => "z",
            MarchAxis::SlowTime => "tau",
        }
    }
}

/// Frames sampled at `start + i * step`, all on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    grid: GridSpec,
    step: f64,
    start: f64,
    frames: Vec<Field>,
    march_axis: MarchAxis,
}

impl Trajectory {
    pub fn new(
        grid: GridSpec,
        step: f64,
        start: f64,
        frames: Vec<Field>,
        march_axis: MarchAxis,
    ) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trajectory step must be positive, got {step}"
            )));
        }
        if frames.is_empty() {
            return Err(Error::InsufficientSamples {
                what: "trajectory frames",
                needed: 1,
                got: 0,
            });
        }
        if let Some(f) = frames.iter().find(|f| f.grid() != &grid) {
            return Err(Error::GridMismatch(format!(
                "frame shape {:?} differs from trajectory shape {:?}",
                f.grid().shape(),
                grid.shape()
            )));
        }
        Ok(Trajectory {
            grid,
            step,
            start,
            frames,
            march_axis,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn march_axis(&self) -> MarchAxis {
        self.march_axis
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Field> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, i: usize) -> &Field {
        &self.frames[i]
    }

    pub fn last(&self) -> &Field {
        self.frames
            .last()
            .expect("trajectory has at least one frame")
    }

    pub fn position(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.frames.len()).map(|i| self.position(i)).collect()
    }

    /// Last march position covered.
    pub fn end(&self) -> f64 {
        self.position(self.frames.len() - 1)
    }

    /// Same sampling, new frames (e.g. the output of a per-frame operator).
    pub fn with_frames(&self, frames: Vec<Field>) -> Result<Trajectory> {
        let grid = frames
            .first()
            .map(|f| f.grid().clone())
            .unwrap_or_else(|| self.grid.clone());
        Trajectory::new(grid, self.step, self.start, frames, self.march_axis)
    }

    pub fn map_frames(&self, mut f: impl FnMut(&Field) -> Result<Field>) -> Result<Trajectory> {
        let frames = self.frames.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        self.with_frames(frames)
    }

    pub fn zip_frames(
        &self,
        other: &Trajectory,
        mut f: impl FnMut(&Field, &Field) -> Result<Field>,
    ) -> Result<Trajectory> {
        self.check_compatible(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        self.with_frames(frames)
    }

    /// Frames `range` as a new trajectory with the start shifted accordingly.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<Trajectory> {
        if range.start >= range.end || range.end > self.frames.len() {
            return Err(Error::InvalidParameter(format!(
                "window {range:?} out of 0..{}",
                self.frames.len()
            )));
        }
        Trajectory::new(
            self.grid.clone(),
            self.step,
            self.position(range.start),
            self.frames[range].to_vec(),
            self.march_axis,
        )
    }

    pub fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "trajectory shapes {:?} and {:?}",
                self.grid.shape(),
                other.grid.shape()
            )));
        }
        if self.frames.len() != other.frames.len() {
            return Err(Error::GridMismatch(format!(
                "{} frames vs {} frames",
                self.frames.len(),
                other.frames.len()
            )));
        }
        let tol = 1e-12 * self.step.abs().max(other.step.abs());
        if (self.step - other.step).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "steps {} and {} differ",
                self.step, other.step
            )));
        }
        Ok(())
    }
}
