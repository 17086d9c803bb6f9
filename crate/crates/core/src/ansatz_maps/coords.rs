use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ParaxialKind {
    Kzk,
    Npe,
}

impl ParaxialKind {
    pub fn name(self) -> &'static str {
        match self {
            ParaxialKind::Kzk => "kzk",
            ParaxialKind::Npe => "npe",
        }
    }
}

/// Slow variables `(tau, z, y)` of a paraxial ansatz.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowPoint {
    pub tau: f64,
    pub z: f64,
    pub y: Vec<f64>,
}

/// Physical variables `(t, x1, x')`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalPoint {
    pub t: f64,
    pub x1: f64,
    pub transverse: Vec<f64>,
}

/// `d_phys = a * d_tau + b * d_z` for one physical derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainFactors {
    pub tau: f64,
    pub z: f64,
}

/// KZK: `tau = t - x1/c`, `z = eps x1`; NPE: `tau = eps t`, `z = x1 - c t`; both `y = sqrt(eps) x'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaxialMap {
    pub kind: ParaxialKind,
    pub eps: f64,
    pub c: f64,
}

impl ParaxialMap {
    pub fn new(kind: ParaxialKind, eps: f64, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {c}"
            )));
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "the paraxial maps need eps > 0, got {eps}"
            )));
        }
        Ok(ParaxialMap { kind, eps, c })
    }

    pub fn for_params(kind: ParaxialKind, params: &ModelParams) -> Result<Self> {
        ParaxialMap::new(kind, params.eps, params.c)
    }

    pub fn transverse_scale(&self) -> f64 {
        self.eps.sqrt()
    }

    pub fn forward(&self, p: &PhysicalPoint) -> SlowPoint {
        let s = self.transverse_scale();
        let y = p.transverse.iter().map(|x| s * x).collect();
        match self.kind {
            ParaxialKind::Kzk => SlowPoint {
                tau: p.t - p.x1 / self.c,
                z: self.eps * p.x1,
                y,
            },
            ParaxialKind::Npe => SlowPoint {
                tau: self.eps * p.t,
                z: p.x1 - self.c * p.t,
                y,
            },
        }
    }

    pub fn inverse(&self, q: &SlowPoint) -> PhysicalPoint {
        let s = self.transverse_scale();
        let transverse = q.y.iter().map(|y| y / s).collect();
        match self.kind {
            ParaxialKind::Kzk => {
                let x1 = q.z / self.eps;
                PhysicalPoint {
                    t: q.tau + x1 / self.c,
                    x1,
                    transverse,
                }
            }
            ParaxialKind::Npe => {
                let t = q.tau / self.eps;
                PhysicalPoint {
                    t,
                    x1: q.z + self.c * t,
                    transverse,
                }
            }
        }
    }

    /// Factors of `d_t` in terms of `d_tau`, `d_z`.
    pub fn d_t(&self) -> ChainFactors {
        match self.kind {
            ParaxialKind::Kzk => ChainFactors { tau: 1.0, z: 0.0 },
            ParaxialKind::Npe => ChainFactors {
                tau: self.eps,
                z: -self.c,
            },
        }
    }

    /// Factors of `d_x1` in terms of `d_tau`, `d_z`.
    pub fn d_x1(&self) -> ChainFactors {
        match self.kind {
            ParaxialKind::Kzk => ChainFactors {
                tau: -1.0 / self.c,
                z: self.eps,
            },
            ParaxialKind::Npe => ChainFactors { tau: 0.0, z: 1.0 },
        }
    }
}

/// Slow coordinates of `(t, x)` where `x[0]` is the propagation coordinate.
pub fn map_coordinates(map: &ParaxialMap, t: f64, x: &[f64]) -> SlowPoint {
    map.forward(&PhysicalPoint {
        t,
        x1: x[0],
        transverse: x[1..].to_vec(),
    })
}

pub fn unmap_coordinates(map: &ParaxialMap, q: &SlowPoint) -> (f64, Vec<f64>) {
    let p = map.inverse(q);
    let mut x = vec![p.x1];
    x.extend(p.transverse);
    (p.t, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn documented_points() {
        let kzk = ParaxialMap::new(ParaxialKind::Kzk, 0.01, 1.0).unwrap();
        let q = map_coordinates(&kzk, 1.0, &[1.0, 1.0]);
        assert!(q.tau.abs() < 1e-15 && (q.z - 0.01).abs() < 1e-15 && (q.y[0] - 0.1).abs() < 1e-15);
        let npe = ParaxialMap::new(ParaxialKind::Npe, 0.04, 2.0).unwrap();
        let q = map_coordinates(&npe, 0.5, &[1.0, 0.0]);
        assert!((q.tau - 0.02).abs() < 1e-15 && q.z.abs() < 1e-15 && q.y[0] == 0.0);
    }

    #[test]
    fn round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for kind in [ParaxialKind::Kzk, ParaxialKind::Npe] {
            let map =
                ParaxialMap::new(kind, rng.gen_range(0.001..0.3), rng.gen_range(0.5..3.0)).unwrap();
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let t = rng.gen_range(-5.0..5.0);
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let (t2, x2) = unmap_coordinates(&map, &map_coordinates(&map, t, &x));
                worst = worst.max((t - t2).abs());
                for (a, b) in x.iter().zip(&x2) {
                    worst = worst.max((a - b).abs());
                }
            }
            assert!(worst <= 1e-14, "{kind:?}: {worst:e}");
        }
    }
}
