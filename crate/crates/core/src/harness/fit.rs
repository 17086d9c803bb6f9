//! Envelope and log-log order fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::ErrorSeries;

/// Fewest usable samples for an envelope fit.
pub const MIN_ENVELOPE_SAMPLES: usize = 10;
/// Fewest `(eps, err)` pairs for an order fit.
pub const MIN_ORDER_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "fit", rename_all = "snake_case")]
pub enum FitResult {
    /// `E(t) ~ c1 (eps^2 t + delta) exp(c2 eps t)`.
    Envelope {
        c1: f64,
        c2: f64,
        /// RMS of the log residuals.
        residual: f64,
        /// The series was identically zero; `c1 = c2 = 0`.
        exact_match: bool,
    },
    /// `log err = intercept + slope log eps`.
    Order {
        slope: f64,
        intercept: f64,
        residual: f64,
    },
}

impl FitResult {
    pub fn residual(&self) -> f64 {
        match *self {
            FitResult::Envelope { residual, .. } | FitResult::Order { residual, .. } => residual,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match *self {
            FitResult::Order { slope, .. } => Some(slope),
            FitResult::Envelope { .. } => None,
        }
    }

    /// The fitted envelope at `t`.
    pub fn envelope_at(&self, t: f64, eps: f64, delta: f64) -> Option<f64> {
        match *self {
            FitResult::Envelope { c1, c2, .. } => {
                Some(c1 * (eps * eps * t + delta) * (c2 * eps * t).exp())
            }
            FitResult::Order { .. } => None,
        }
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
    (s / n.max(1) as f64).sqrt()
}

/// Fits `log E = log c1 + log(eps^2 t + delta) + c2 eps t` by least squares. `delta` enters
/// linearly so that `c1 = 1` matches a start at `E(0) = delta`. `c2` is left free: a
/// negative value means the series grows slower than the bound allows.
///
/// Samples with `E = 0` or `eps^2 t + delta = 0` carry no log information and are skipped.
pub fn fit_envelope(series: &ErrorSeries, eps: f64, delta: f64) -> Result<FitResult> {
    series.validate()?;
    if !(eps.is_finite() && eps >= 0.0 && delta.is_finite() && delta >= 0.0) {
        return Err(Error::FitInput(format!(
            "eps and delta must be non-negative, got {eps}, {delta}"
        )));
    }
    if series.len() < MIN_ENVELOPE_SAMPLES {
        return Err(Error::InsufficientSamples {
            what: "envelope samples",
            needed: MIN_ENVELOPE_SAMPLES,
            got: series.len(),
        });
    }
    if series.e.iter().all(|&e| e == 0.0) {
        return Ok(FitResult::Envelope {
            c1: 0.0,
            c2: 0.0,
            residual: 0.0,
            exact_match: true,
        });
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&t, &e) in series.t.iter().zip(&series.e) {
        let base = eps * eps * t + delta;
        if e > 0.0 && base > 0.0 {
            x.push(eps * t);
            y.push(e.ln() - base.ln());
        }
    }
    if x.len() < MIN_ENVELOPE_SAMPLES {
        return Err(Error::FitInput(format!(
            "only {} of {} samples have E > 0 and eps^2 t + delta > 0",
            x.len(),
            series.len()
        )));
    }
    let (a, c2) = line_fit(&x, &y);
    let residual = rms(x.iter().zip(&y).map(|(xi, yi)| yi - a - c2 * xi));
    Ok(FitResult::Envelope {
        c1: a.exp(),
        c2,
        residual,
        exact_match: false,
    })
}

/// Log-log regression of `err` against `eps`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < MIN_ORDER_POINTS {
        return Err(Error::InsufficientSamples {
            what: "(eps, err) pairs",
            needed: MIN_ORDER_POINTS,
            got: points.len(),
        });
    }
    if let Some(&(e, r)) = points
        .iter()
        .find(|(e, r)| !(e.is_finite() && *e > 0.0 && r.is_finite() && *r > 0.0))
    {
        return Err(Error::FitInput(format!(
            "order fits need positive eps and err, got ({e}, {r})"
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    if x.iter().all(|v| *v == x[0]) {
        return Err(Error::FitInput(
            "order fits need distinct eps values".into(),
        ));
    }
    let (intercept, slope) = line_fit(&x, &y);
    let residual = rms(x.iter().zip(&y).map(|(xi, yi)| yi - intercept - slope * xi));
    Ok(FitResult::Order {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(eps: f64, delta: f64, f: impl Fn(f64) -> f64) -> ErrorSeries {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.5).collect();
        let e = t.iter().map(|&t| f(t)).collect();
        ErrorSeries::new(t, e, eps, delta).unwrap()
    }

    #[test]
    fn envelope_recovers_synthetic_constants() {
        let (eps, delta) = (0.05, 0.02);
        let s = synthetic(eps, delta, |t| {
            2.0 * (eps * eps * t + delta) * (0.3 * eps * t).exp()
        });
        let FitResult::Envelope {
            c1,
            c2,
            residual,
            exact_match,
        } = fit_envelope(&s, eps, delta).unwrap()
        else {
            panic!("wrong fit kind")
        };
        assert!((c1 - 2.0).abs() <= 0.02, "c1 = {c1}");
        assert!((c2 - 0.3).abs() <= 0.015, "c2 = {c2}");
        assert!(residual < 1e-10 && !exact_match);
    }

    #[test]
    fn linear_growth_without_delta_has_no_exponent() {
        let eps = 0.02;
        let s = synthetic(eps, 0.0, |t| 7.0 * eps * eps * t);
        let fit = fit_envelope(&s, eps, 0.0).unwrap();
        let FitResult::Envelope { c1, c2, .. } = fit else {
            panic!()
        };
        assert!(c2.abs() <= 0.02, "c2 = {c2}");
        assert!((c1 - 7.0).abs() < 1e-9);
    }

    #[test]
    fn decaying_series_gets_a_negative_exponent() {
        let eps = 0.1;
        let s = synthetic(eps, 0.1, |t| (0.1 + eps * eps * t) * (-0.5 * eps * t).exp());
        let fit = fit_envelope(&s, eps, 0.1).unwrap();
        let FitResult::Envelope { c1, c2, .. } = fit else {
            panic!()
        };
        assert!(
            (c2 + 0.5).abs() < 1e-9 && (c1 - 1.0).abs() < 1e-9,
            "{fit:?}"
        );
        assert!((fit.envelope_at(0.0, eps, 0.1).unwrap() - 0.1).abs() < 1e-10);
    }

    #[test]
    fn zero_series_is_an_exact_match() {
        let s = synthetic(0.0, 0.0, |_| 0.0);
        let fit = fit_envelope(&s, 0.0, 0.0).unwrap();
        assert!(matches!(fit, FitResult::Envelope { exact_match: true, c1, .. } if c1 == 0.0));
    }

    #[test]
    fn envelope_needs_ten_samples() {
        let s = ErrorSeries::new((0..9).map(f64::from).collect(), vec![1.0; 9], 0.1, 0.0).unwrap();
        assert!(fit_envelope(&s, 0.1, 0.0).is_err());
    }

    #[test]
    fn order_of_power_laws() {
        let eps = [0.04, 0.02, 0.01];
        let sq: Vec<_> = eps.iter().map(|&e| (e, e * e)).collect();
        assert!((fit_order(&sq).unwrap().slope().unwrap() - 2.0).abs() < 1e-12);
        let lin: Vec<_> = eps.iter().map(|&e| (e, 3.0 * e)).collect();
        let fit = fit_order(&lin).unwrap();
        assert!((fit.slope().unwrap() - 1.0).abs() < 1e-12);
        assert!(
            matches!(fit, FitResult::Order { intercept, .. } if (intercept - 3f64.ln()).abs() < 1e-12)
        );
    }

    #[test]
    fn noisy_order_stays_within_a_tenth() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let pts: Vec<_> = [0.1, 0.05, 0.025]
                .iter()
                .map(|&e| (e, e * e * (1.0 + 0.05 * rng.gen_range(-1.0..1.0))))
                .collect();
            let s = fit_order(&pts).unwrap().slope().unwrap();
            assert!((s - 2.0).abs() <= 0.1, "slope {s}");
        }
    }

    #[test]
    fn order_rejects_bad_points() {
        assert!(fit_order(&[(0.1, 0.01), (0.05, 0.0), (0.02, 1e-4)]).is_err());
        assert!(fit_order(&[(0.1, 0.01), (0.05, 0.002)]).is_err());
        assert!(fit_order(&[(0.1, 0.01), (0.1, 0.02), (0.1, 0.03)]).is_err());
    }
}
