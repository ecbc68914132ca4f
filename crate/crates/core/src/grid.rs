//! Uniform periodic grid on `[0, 2π)` and Fourier spectral operators on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// `n` uniform samples `s_i = 2πi/n`; `n` even and at least 16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SGrid {
    n: usize,
}

impl SGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid size must be even and at least {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Signed wavenumber of DFT bin `j`, with the Nyquist bin mapped to `+n/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Real antisymmetric first-derivative matrix. The Nyquist mode is
    /// annihilated, which keeps `-i D` Hermitian and purely imaginary.
    pub fn first_derivative(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.spacing();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let k = i as i64 - j as i64;
                    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    d[i * n + j] = 0.5 * sign / (0.5 * k as f64 * h).tan();
                }
            }
        }
        d
    }

    /// Real symmetric second-derivative matrix; the Nyquist mode carries
    /// eigenvalue `-(n/2)^2`.
    pub fn second_derivative(&self) -> Vec<f64> {
        let n = self.n;
        let h = self.spacing();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = if i == j {
                    -PI * PI / (3.0 * h * h) - 1.0 / 6.0
                } else {
                    let k = i as i64 - j as i64;
                    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    -0.5 * sign / (0.5 * k as f64 * h).sin().powi(2)
                };
            }
        }
        d
    }

    /// Momentum operator `P = -i d/ds` (Nyquist mode annihilated).
    pub fn momentum(&self) -> CMatrix {
        let n = self.n;
        let d = self.first_derivative();
        CMatrix::from_fn(n, n, |i, j| C64::new(0.0, -d[i * n + j]))
    }

    /// Spectral derivative of periodic real samples.
    pub fn differentiate(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        let d = self.first_derivative();
        (0..self.n).map(|i| (0..self.n).map(|j| d[i * self.n + j] * f[j]).sum()).collect()
    }

    /// Coefficients `a_k` of `ψ(s) = Σ a_k e^{iks}/√(2π)` for samples `ψ(s_i)`,
    /// indexed by DFT bin (see [`SGrid::wavenumber`]).
    pub fn fourier_coefficients(&self, psi: &[C64]) -> Vec<C64> {
        assert_eq!(psi.len(), self.n);
        let norm = (2.0 * PI).sqrt() / self.n as f64;
        (0..self.n)
            .map(|j| {
                let k = self.wavenumber(j) as f64;
                psi.iter()
                    .enumerate()
                    .map(|(i, &z)| z * C64::from_polar(1.0, -k * self.point(i)))
                    .sum::<C64>()
                    * norm
            })
            .collect()
    }

    /// Coefficient of wavenumber `k` (|k| <= n/2).
    pub fn fourier_coefficient(&self, psi: &[C64], k: i64) -> C64 {
        let norm = (2.0 * PI).sqrt() / self.n as f64;
        psi.iter()
            .enumerate()
            .map(|(i, &z)| z * C64::from_polar(1.0, -(k as f64) * self.point(i)))
            .sum::<C64>()
            * norm
    }

    /// Plane wave `e^{iks}/√(2π)` sampled on the grid.
    pub fn plane_wave(&self, k: i64) -> Vec<C64> {
        let amp = 1.0 / (2.0 * PI).sqrt();
        (0..self.n).map(|i| C64::from_polar(amp, k as f64 * self.point(i))).collect()
    }

    /// `Σ conj(a_i) b_i · 2π/n`, the trapezoidal inner product.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        crate::linalg::dot(a, b) * self.spacing()
    }

    pub fn norm(&self, a: &[C64]) -> f64 {
        self.inner(a, a).re.sqrt()
    }

    /// Rescales `a` to unit grid norm.
    pub fn normalize(&self, a: &mut [C64]) {
        let nrm = self.norm(a);
        if nrm > 0.0 {
            a.iter_mut().for_each(|z| *z /= nrm);
        }
    }
}
