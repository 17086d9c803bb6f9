//! Sampled discrepancy series shared by the models and the harness.

use crate::error::{Error, Result};

/// `E(t)` samples with the run's `eps` and `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSeries {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
    pub eps: f64,
    pub delta: f64,
    /// Point counts of the grid the series was measured on, if known.
    pub shape: Vec<usize>,
}

impl ErrorSeries {
    pub fn new(t: Vec<f64>, e: Vec<f64>, eps: f64, delta: f64) -> Result<Self> {
        let s = ErrorSeries {
            t,
            e,
            eps,
            delta,
            shape: Vec::new(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.len() != self.e.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times but {} values",
                self.t.len(),
                self.e.len()
            )));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "times must be strictly increasing".into(),
            ));
        }
        if self.e.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidParameter(
                "error values must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.e.iter().copied().fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<f64> {
        self.e.last().copied()
    }
}
