//! Interpolation used to compose march solutions with the ansatz coordinate maps:
//! trigonometric on periodic axes, natural cubic splines along the march axis.

use crate::error::{Error, Result};
use crate::numerics::grid::AxisSpec;

/// Weights `w_j` with `f(s) = sum_j w_j f_j` for the band-limited interpolant of samples on
/// a periodic axis. For even `n` the Nyquist mode is taken as a cosine.
pub(crate) fn trig_weights(axis: &AxisSpec, s: f64) -> Vec<f64> {
    let n = axis.points;
    let h = axis.spacing();
    let base = 2.0 * std::f64::consts::PI / axis.extent;
    let kmax = (n - 1) / 2;
    (0..n)
        .map(|j| {
            let d = base * (s - j as f64 * h);
            let mut w = 1.0;
            for k in 1..=kmax {
                w += 2.0 * (k as f64 * d).cos();
            }
            if n % 2 == 0 {
                w += ((n / 2) as f64 * d).cos();
            }
            w / n as f64
        })
        .collect()
}

/// Row-major `targets.len() x axis.points` matrix of [`trig_weights`]. Targets landing on a
/// sample (to 1e-12 of the spacing) get an exact unit row.
pub(crate) fn trig_matrix(axis: &AxisSpec, targets: &[f64]) -> Vec<Vec<f64>> {
    let h = axis.spacing();
    let n = axis.points;
    targets
        .iter()
        .map(|&s| {
            let r = (s / h).rem_euclid(n as f64);
            let j = r.round();
            if (r - j).abs() < 1e-12 {
                let mut row = vec![0.0; n];
                row[j as usize % n] = 1.0;
                row
            } else {
                trig_weights(axis, s)
            }
        })
        .collect()
}

/// Natural cubic spline through the frames of a trajectory, per sample.
pub(crate) struct FrameSpline {
    start: f64,
    step: f64,
    values: Vec<Vec<f64>>,
    /// Second derivatives at the knots.
    curvature: Vec<Vec<f64>>,
}

impl FrameSpline {
    pub fn new(frames: Vec<Vec<f64>>, start: f64, step: f64) -> Result<Self> {
        let n = frames.len();
        if n < 2 {
            return Err(Error::InsufficientSamples {
                what: "spline knots",
                needed: 2,
                got: n,
            });
        }
        let len = frames[0].len();
        let mut curvature = vec![vec![0.0; len]; n];
        if n > 2 {
            // Thomas algorithm on M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}) / h^2,
            // shared across samples since the matrix does not depend on them
            let m = n - 2;
            let mut cp = vec![0.0; m];
            let mut denom = vec![0.0; m];
            for i in 0..m {
                let d = 4.0 - if i > 0 { cp[i - 1] } else { 0.0 };
                denom[i] = d;
                cp[i] = 1.0 / d;
            }
            let scale = 6.0 / (step * step);
            let mut rhs = vec![0.0; m];
            for s in 0..len {
                for i in 0..m {
                    let r = scale * (frames[i][s] - 2.0 * frames[i + 1][s] + frames[i + 2][s]);
                    rhs[i] = (r - if i > 0 { rhs[i - 1] } else { 0.0 }) / denom[i];
                }
                for i in (0..m).rev() {
                    let next = if i + 1 < m { curvature[i + 2][s] } else { 0.0 };
                    curvature[i + 1][s] = rhs[i] - cp[i] * next;
                }
            }
        }
        Ok(FrameSpline {
            start,
            step,
            values: frames,
            curvature,
        })
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn check_range(&self, z: f64) -> Result<()> {
        let tol = 1e-9 * self.step;
        if z < self.start - tol || z > self.end() + tol {
            return Err(Error::OutOfRange {
                requested: z,
                available: self.end(),
            });
        }
        Ok(())
    }

    /// Interpolated sample vector at `z`.
    pub fn eval(&self, z: f64) -> Result<Vec<f64>> {
        self.check_range(z)?;
        let n = self.values.len();
        let r = ((z - self.start) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (r.floor() as usize).min(n - 2);
        let b = r - i as f64;
        if b.abs() < 1e-12 {
            return Ok(self.values[i].clone());
        }
        if (1.0 - b).abs() < 1e-12 {
            return Ok(self.values[i + 1].clone());
        }
        let a = 1.0 - b;
        let h2 = self.step * self.step / 6.0;
        let ca = (a * a * a - a) * h2;
        let cb = (b * b * b - b) * h2;
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        let (m0, m1) = (&self.curvature[i], &self.curvature[i + 1]);
        Ok((0..y0.len())
            .map(|s| a * y0[s] + b * y1[s] + ca * m0[s] + cb * m1[s])
            .collect())
    }
}

/// Applies one interpolation matrix per transverse axis to a slice laid out row-major over
/// the transverse axes with sizes `sizes`.
pub(crate) fn resample_tensor(data: &[f64], sizes: &[usize], mats: &[Vec<Vec<f64>>]) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut shape = sizes.to_vec();
    for (ax, mat) in mats.iter().enumerate() {
        let n_in = shape[ax];
        let n_out = mat.len();
        let outer: usize = shape[..ax].iter().product();
        let inner: usize = shape[ax + 1..].iter().product();
        let mut out = vec![0.0; outer * n_out * inner];
        for o in 0..outer {
            for (r, row) in mat.iter().enumerate() {
                let dst = &mut out[(o * n_out + r) * inner..(o * n_out + r + 1) * inner];
                for (j, w) in row.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let src = &cur[(o * n_in + j) * inner..(o * n_in + j + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        cur = out;
        shape[ax] = n_out;
    }
    cur
}
