//! Dense complex linear algebra: a row-major matrix type, LU solves, a
//! Hermitian eigensolver (Householder tridiagonalization followed by
//! implicit-shift QL) and polar unitarization.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, |i, j| C64::new(f(i, j), 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: C64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += shift;
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// max |A_ij - conj(A_ji)|
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Determinant of a square matrix via LU.
    pub fn determinant(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for k in 0..n {
            let pivot = (k..n).max_by(|&x, &y| a[(x, k)].norm().total_cmp(&a[(y, k)].norm())).unwrap();
            if a[(pivot, k)].norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if pivot != k {
                a.swap_rows(pivot, k);
                det = -det;
            }
            let p = a[(k, k)];
            det *= p;
            for i in k + 1..n {
                let f = a[(i, k)] / p;
                for j in k..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = (k..n).max_by(|&x, &y| a[(x, k)].norm().total_cmp(&a[(y, k)].norm())).unwrap();
            if a[(pivot, k)].norm() <= 1e-14 * scale {
                return Err(Error::InvalidInput("singular linear system".into()));
            }
            a.swap_rows(pivot, k);
            b.swap(pivot, k);
            let p = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / p;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
                let t = b[k];
                b[i] -= f * t;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..n {
                acc -= a[(k, j)] * b[j];
            }
            b[k] = acc / a[(k, k)];
        }
        Ok(b)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// `sum conj(a_i) b_i`
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues,
/// eigenvectors stored as columns (possibly only the leading ones).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

const QL_MAX_SWEEPS: usize = 64;

/// Dense Hermitian eigensolver.
///
/// The matrix is reduced to Hermitian tridiagonal form by Householder
/// reflections, the complex off-diagonal is rotated onto the positive reals
/// with a diagonal unitary, and the resulting real symmetric tridiagonal
/// matrix is diagonalized with implicit-shift QL. Only the lower triangle is
/// read. Eigenvalues are returned in ascending order; equal eigenvalues keep
/// the order produced by QL, so output is deterministic for a given input.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    hermitian_eigen_lowest(a, a.rows())
}

/// All eigenvalues, but eigenvectors only for the `count` lowest.
pub fn hermitian_eigen_lowest(a: &CMatrix, count: usize) -> Result<HermitianEigen> {
    assert_eq!(a.rows(), a.cols(), "hermitian_eigen needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let mut work = CMatrix::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)].conj() });
    let mut q = CMatrix::identity(n);
    let zero = C64::new(0.0, 0.0);

    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| work[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = work[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;

        v.iter_mut().for_each(|z| *z = zero);
        for i in k + 1..n {
            v[i] = work[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = norm(&v[k + 1..]);
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v[k + 1..] {
            *z /= vnorm;
        }

        // A <- (I - 2vv†) A (I - 2vv†) = A - 2(v w† + w v†), w = Av - (v†Av) v
        for i in k..n {
            p[i] = (k + 1..n).map(|j| work[(i, j)] * v[j]).sum();
        }
        let kappa: C64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        for i in k..n {
            p[i] -= kappa * v[i];
        }
        for i in k..n {
            for j in k..n {
                let upd = v[i] * p[j].conj() + p[i] * v[j].conj();
                work[(i, j)] -= 2.0 * upd;
            }
        }
        // Q <- Q (I - 2vv†)
        for r in 0..n {
            let qv: C64 = (k + 1..n).map(|j| q[(r, j)] * v[j]).sum();
            for j in k + 1..n {
                q[(r, j)] -= 2.0 * qv * v[j].conj();
            }
        }
    }

    let mut diag: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for k in 0..n - 1 {
        let e = work[(k + 1, k)];
        let mag = e.norm();
        off[k] = mag;
        phases[k + 1] = if mag > 0.0 { e * phases[k] / mag } else { C64::new(1.0, 0.0) };
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut diag, &mut off, &mut z, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let count = count.min(n);
    let mut vectors = CMatrix::zeros(n, count);
    for r in 0..n {
        for (col, &src) in order.iter().take(count).enumerate() {
            let mut acc = zero;
            for l in 0..n {
                acc += q[(r, l)] * phases[l] * z[l * n + src];
            }
            vectors[(r, col)] = acc;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[k]` the coupling between rows k and k+1
/// (`e[n-1]` is ignored). `z` (row-major, n x n) accumulates the rotations.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::ConvergenceFailure { iterations: QL_MAX_SWEEPS });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk = &mut z[k * n..(k + 1) * n];
                        h = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * h;
                        zk[i] = c * zk[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Rotates the global phase of `v` so that its largest-magnitude component
/// is real and positive. Near-ties (relative 1e-9) go to the lowest index.
pub fn fix_phase(v: &mut [C64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let idx = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let rot = v[idx].conj() / v[idx].norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// Closest unitary to `w` (polar factor `W (W†W)^{-1/2}`) together with the
/// smallest singular value of `w`.
pub fn polar_unitary(w: &CMatrix) -> Result<(CMatrix, f64)> {
    let gram = &w.adjoint() * w;
    let eig = hermitian_eigen(&gram)?;
    let smallest = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    if smallest < 1e-8 {
        return Err(Error::NonUnitarizable { singular_value: smallest });
    }
    let n = gram.rows();
    let inv_sqrt = CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|l| eig.vectors[(i, l)] * eig.vectors[(j, l)].conj() / eig.values[l].sqrt())
            .sum()
    });
    Ok((w * &inv_sqrt, smallest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_is_its_own_spectrum() {
        let a = CMatrix::diagonal(&[3.0, -1.0, 2.0]);
        let eig = hermitian_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_has_unit_eigenvalues() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(0.0, -1.0);
        a[(1, 0)] = c(0.0, 1.0);
        let eig = hermitian_eigen(&a).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let v = eig.vectors.column(1);
        let av = a.matvec(&v);
        for (x, y) in av.iter().zip(&v) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn handles_block_diagonal_input() {
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 0)] = c(0.0, 0.5);
        a[(0, 1)] = c(0.0, -0.5);
        a[(1, 1)] = c(1.0, 0.0);
        a[(2, 2)] = c(1.0, 0.0);
        a[(3, 2)] = c(0.0, -0.5);
        a[(2, 3)] = c(0.0, 0.5);
        a[(3, 3)] = c(1.0, 0.0);
        let eig = hermitian_eigen(&a).unwrap();
        for (got, want) in eig.values.iter().zip([0.5, 0.5, 1.5, 1.5]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_recovers_known_vector() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, if i == j { 5.0 } else { 0.3 }));
        let x = vec![c(1.0, -1.0), c(0.5, 2.0), c(-3.0, 0.0)];
        let b = a.matvec(&x);
        let got = a.solve(&b).unwrap();
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = CMatrix::zeros(2, 2);
        assert!(a.solve(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn fix_phase_prefers_lowest_index_on_ties() {
        let mut v = vec![c(0.0, 1.0), c(-1.0, 0.0)];
        fix_phase(&mut v);
        assert_eq!(v[0], c(1.0, 0.0));
        assert!((v[1] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn polar_factor_of_scaled_unitary() {
        let theta = 0.3_f64;
        let mut u = CMatrix::zeros(2, 2);
        u[(0, 0)] = C64::from_polar(1.0, theta);
        u[(1, 1)] = C64::from_polar(1.0, -theta);
        let (p, smin) = polar_unitary(&u.scale(c(0.9, 0.0))).unwrap();
        assert!((smin - 0.9).abs() < 1e-14);
        assert!(p.max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn polar_rejects_singular() {
        let w = CMatrix::zeros(2, 2);
        assert!(matches!(polar_unitary(&w), Err(Error::NonUnitarizable { .. })));
    }

    #[test]
    fn determinant_of_triangular() {
        let a = CMatrix::from_fn(3, 3, |i, j| if j >= i { c(1.0 + i as f64, 0.5) } else { c(0.0, 0.0) });
        let want = c(1.0, 0.5) * c(2.0, 0.5) * c(3.0, 0.5);
        assert!((a.determinant() - want).norm() < 1e-12);
    }
}
