//! Physical constants and the small parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sound speed, density, viscosity, heat-capacity ratio and the Mach-number scale `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    pub rho0: f64,
    pub nu: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl ModelParams {
    pub fn new(c: f64, rho0: f64, nu: f64, gamma: f64, eps: f64) -> Result<Self> {
        let p = ModelParams {
            c,
            rho0,
            nu,
            gamma,
            eps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad("c must be positive, got c", self.c);
        }
        if !(self.rho0.is_finite() && self.rho0 > 0.0) {
            return bad("rho0 must be positive, got rho0", self.rho0);
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return bad("nu must be non-negative, got nu", self.nu);
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return bad("gamma must exceed 1, got gamma", self.gamma);
        }
        // eps = 0 is accepted: it is the linear limit used by coincidence checks.
        if !(self.eps.is_finite() && (0.0..0.5).contains(&self.eps)) {
            return bad("eps must lie in [0, 0.5), got eps", self.eps);
        }
        Ok(())
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    /// Kinematic viscosity `nu / rho0`.
    pub fn visc(&self) -> f64 {
        self.nu / self.rho0
    }

    /// Coefficient of `u_t u_tt` in the quasilinear Kuznetsov form.
    pub fn alpha(&self) -> f64 {
        (self.gamma - 1.0) / (self.c * self.c)
    }

    /// Coefficient of `grad u . grad u_t` in the quasilinear Kuznetsov form.
    pub fn beta(&self) -> f64 {
        2.0
    }

    /// Coefficient of `p_t p_tt` in the quasilinear Westervelt form.
    pub fn westervelt_alpha(&self) -> f64 {
        (self.gamma + 1.0) / (self.c * self.c)
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            c: 1.0,
            rho0: 1.0,
            nu: 0.1,
            gamma: 1.4,
            eps: 0.02,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_coefficients() {
        let p = ModelParams::new(3.0, 2.0, 0.5, 1.4, 0.1).unwrap();
        assert!((p.alpha() * p.c * p.c - 0.4).abs() < 1e-15);
        assert_eq!(p.beta(), 2.0);
        assert_eq!(p.visc(), 0.25);
        assert!(p.eps * p.visc() >= 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 1.4, 0.1).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 1.4, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 1.4, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.4, 0.5).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.4, f64::NAN).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1.4, 0.0).is_ok());
    }
}
