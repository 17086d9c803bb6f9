//! Banded LU factorizations: unpivoted complex for the diagonally dominant implicit solves,
//! pivoted real for the rest.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            band: vec![Complex64::new(0.0, 0.0); n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.slot(i, j)
            .map(|s| self.band[s])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Adds `v` at `(i, j)`; panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.band[s] += v;
    }

    /// In-place LU factorization (unit lower triangle).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        for k in 0..n {
            let pivot = self.band[self.slot(k, k).unwrap()];
            if !(pivot.norm() > 1e-300) || !pivot.is_finite() {
                return Err(Error::NonFinite("banded factorization (zero pivot)"));
            }
            for i in k + 1..n.min(k + self.kl + 1) {
                let sik = self.slot(i, k).unwrap();
                let l = self.band[sik] / pivot;
                self.band[sik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n.min(k + self.ku + 1) {
                    let skj = self.slot(k, j).unwrap();
                    let sij = self.slot(i, j).unwrap();
                    let ukj = self.band[skj];
                    self.band[sij] -= l * ukj;
                }
            }
        }
        Ok(BandedLu { m: self })
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct BandedLu {
    m: BandedMatrix,
}

impl BandedLu {
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let m = &self.m;
        let n = m.n;
        for i in 0..n {
            let lo = i.saturating_sub(m.kl);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(lo) {
                s -= m.band[m.slot(i, j).unwrap()] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + m.ku + 1).min(n);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(hi).skip(i + 1) {
                s -= m.band[m.slot(i, j).unwrap()] * xj;
            }
            x[i] = s / m.band[m.slot(i, i).unwrap()];
        }
    }
}

/// Real banded matrix factored with partial pivoting, for systems that need not be
/// diagonally dominant.
#[derive(Clone, Debug)]
pub struct PivotedBanded {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i - kl ..= i + ku + kl` (room for pivoting fill).
    rows: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedBanded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        PivotedBanded {
            n,
            kl,
            ku,
            rows: vec![0.0; n * (2 * kl + ku + 1)],
            perm: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.width() + (j + self.kl - i)]
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        let w = self.width();
        &mut self.rows[i * w + (j + self.kl - i)]
    }

    /// Adds `v` at `(i, j)`; `j` must lie within `kl` below and `ku` above the diagonal.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the band"
        );
        *self.at(i, j) += v;
    }

    /// Gaussian elimination with row pivoting inside the band.
    pub fn factor(mut self) -> Result<Self> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut perm = Vec::with_capacity(n);
        for k in 0..n {
            let last = n.min(k + kl + 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in k + 1..last {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 1e-300) || !best.is_finite() {
                return Err(Error::NonFinite("banded factorization (singular matrix)"));
            }
            perm.push(p);
            let hi = n.min(k + ku + kl + 1);
            if p != k {
                for j in k..hi {
                    let a = *self.at(k, j);
                    let b = *self.at(p, j);
                    *self.at(k, j) = b;
                    *self.at(p, j) = a;
                }
            }
            let pivot = *self.at(k, k);
            for i in k + 1..last {
                let l = *self.at(i, k) / pivot;
                *self.at(i, k) = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..hi {
                    let ukj = *self.at(k, j);
                    *self.at(i, j) -= l * ukj;
                }
            }
        }
        self.perm = perm;
        Ok(self)
    }

    /// Solves with the factors from [`PivotedBanded::factor`].
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        for k in 0..n {
            x.swap(k, self.perm[k]);
            let xk = x[k];
            for i in k + 1..n.min(k + kl + 1) {
                x[i] -= self.get(i, k) * xk;
            }
        }
        for i in (0..n).rev() {
            let hi = n.min(i + ku + kl + 1);
            let mut s = x[i];
            for j in i + 1..hi {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_pentadiagonal_system() {
        let n = 12;
        let mut a = BandedMatrix::zeros(n, 2, 3);
        for i in 0..n {
            a.add(i, i, Complex64::new(6.0, 0.5));
            if i >= 1 {
                a.add(i, i - 1, Complex64::new(-1.0, 0.0));
            }
            if i >= 2 {
                a.add(i, i - 2, Complex64::new(0.3, 0.0));
            }
            if i + 1 < n {
                a.add(i, i + 1, Complex64::new(-1.2, 0.0));
            }
            if i + 3 < n {
                a.add(i, i + 3, Complex64::new(0.1, -0.2));
            }
        }
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(i as f64 * 0.3 - 1.0, (i as f64).sin()))
            .collect();
        let b = a.mul_vec(&x);
        let lu = a.factor().unwrap();
        let mut y = b;
        lu.solve_in_place(&mut y);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = BandedMatrix::zeros(3, 1, 1);
        assert!(a.factor().is_err());
    }

    #[test]
    fn pivoted_solve_handles_a_zero_diagonal() {
        // [[0, 1, 0], [1, 0, 1], [0, 1, 2]] x = [1, 2, 4] has x = [0.5, 1, 1.5]
        let mut m = PivotedBanded::zeros(3, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 2, 1.0);
        m.add(2, 1, 1.0);
        m.add(2, 2, 2.0);
        let lu = m.factor().unwrap();
        let mut x = vec![1.0, 2.0, 4.0];
        lu.solve_in_place(&mut x);
        for (a, b) in x.iter().zip([0.5, 1.0, 1.5]) {
            assert!((a - b).abs() < 1e-14, "{x:?}");
        }
    }
}
