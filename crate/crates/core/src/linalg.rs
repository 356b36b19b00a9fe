// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra.
//!
//! Everything here is sized for the two-atom problem (at most 16×16, with
//! 64 as the hard ceiling for the eigensolver). Storage is row-major and
//! dense; products skip exact zeros in the left operand, which is where the
//! Hamiltonians and collapse operators are sparse.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Largest matrix the eigensolver accepts.
pub const MAX_EIG_DIM: usize = 64;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not Hermitian (max |M - M^H| = {0:e})")]
    NotHermitian(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("matrix dimension {0} exceeds the eigensolver limit of {MAX_EIG_DIM}")]
    TooLarge(usize),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// `e^{i phase}`.
#[inline]
pub fn phasor(phase: f64) -> Complex {
    Complex::from_polar(1.0, phase)
}

#[inline]
fn finite(z: &Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    data: Vec<Complex>,
}

impl CVector {
    pub fn new(data: Vec<Complex>) -> Result<Self> {
        if data.is_empty() {
            return Err(LinalgError::DimMismatch("empty vector".into()));
        }
        if !data.iter().all(finite) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_real(data: &[f64]) -> Result<Self> {
        Self::new(data.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![ZERO; dim] }
    }

    /// Standard basis vector `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.data.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(finite)
    }

    /// Unit vector in the same direction; the zero vector is returned as is.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(Complex::new(1.0 / n, 0.0))
    }

    /// Inner product `<self|other>` (antilinear in `self`).
    pub fn inner(&self, other: &CVector) -> Result<Complex> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimMismatch(format!(
                "inner product of {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self { data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CVector) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CVector) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: Complex, other: &CVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn zip_with(&self, other: &CVector, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimMismatch(format!(
                "vectors of dim {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &CVector) -> CMatrix {
        CMatrix::from_fn(self.dim(), other.dim(), |i, j| self.data[i] * other.data[j].conj())
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &CVector) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Self { data }
    }
}

impl Index<usize> for CVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.data[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex {
        &mut self.data[i]
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimMismatch("ragged or empty rows".into()));
        }
        let data: Vec<Complex> = rows.iter().flatten().copied().collect();
        if !data.iter().all(finite) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(entries: &[Complex]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[CVector]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, CVector::dim);
        if c == 0 || cols.iter().any(|v| v.dim() != r) {
            return Err(LinalgError::DimMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| cols[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector { data: (0..self.rows).map(|i| self[(i, j)]).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(finite)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self += s * other`, same shape required.
    pub fn axpy(&mut self, s: Complex, other: &CMatrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Complex, Complex) -> Complex) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.matmul_unchecked(other))
    }

    pub(crate) fn matmul_unchecked(&self, other: &CMatrix) -> Self {
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, p);
        for i in 0..n {
            let out_row = &mut out.data[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * p..(k + 1) * p];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.dim() {
            return Err(LinalgError::DimMismatch(format!(
                "{}x{} matrix times vector of dim {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(self.matvec_unchecked(v))
    }

    pub(crate) fn matvec_unchecked(&self, v: &CVector) -> CVector {
        let m = self.cols;
        let data = (0..self.rows)
            .map(|i| {
                self.data[i * m..(i + 1) * m]
                    .iter()
                    .zip(&v.data)
                    .filter(|(a, _)| **a != ZERO)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        CVector { data }
    }

    /// Kronecker product: `(A⊗B)[i*rB + k, j*cB + l] = A[i,j] B[k,l]`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let (rb, cb) = (other.rows, other.cols);
        Self::from_fn(self.rows * rb, self.cols * cb, |r, c| {
            self[(r / rb, c / cb)] * other[(r % rb, c % cb)]
        })
    }

    pub fn trace(&self) -> Complex {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest element of `|M - M^H|`; infinite for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() < tol
    }

    /// `(M + M^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `<u| M |v>`.
    pub fn sandwich(&self, u: &CVector, v: &CVector) -> Result<Complex> {
        u.inner(&self.matvec(v)?)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvectors inside a degenerate cluster form an arbitrary orthonormal
/// basis of that cluster.
pub fn hermitian_eig(m: &CMatrix, tol: f64) -> Result<Eigen> {
    if !m.is_square() {
        return Err(LinalgError::DimMismatch(format!("{}x{} is not square", m.rows, m.cols)));
    }
    if m.rows > MAX_EIG_DIM {
        return Err(LinalgError::TooLarge(m.rows));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect >= tol {
        return Err(LinalgError::NotHermitian(defect));
    }

    let n = m.rows;
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = Complex::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    let off = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged {
        if off(&a) <= JACOBI_OFF_TOL * scale {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Unitary U = D R with D = diag(1, e^{-i alpha}) on (p, q)
                // turning a_pq real, then a real Jacobi rotation R.
                let u_phase = (apq / mag).conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = Complex::new(c, 0.0);
                let u_pq = Complex::new(s, 0.0);
                let u_qp = u_phase * (-s);
                let u_qq = u_phase * c;

                // A <- A U (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                // A <- U^H A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
                // V <- V U
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence(sweeps));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    Ok(Eigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    })
}

/// Principal value of an angle in `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn residual(m: &CMatrix, e: &Eigen) -> f64 {
        e.values
            .iter()
            .zip(&e.vectors)
            .map(|(l, v)| m.matvec(v).unwrap().sub(&v.scale(c(*l, 0.0))).unwrap().norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_matrix() {
        let m = CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let e = hermitian_eig(&m, 1e-12).unwrap();
        assert_eq!(e.values, vec![0.0, 1.0]);
        assert!((e.vectors[0][0].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[1][1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = hermitian_eig(&m, 1e-12).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &e) < 1e-14);
    }

    #[test]
    fn complex_hermitian_residuals() {
        let m = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.3, -1.1), c(0.0, 0.5)],
            vec![c(0.3, 1.1), c(-1.0, 0.0), c(0.7, 0.2)],
            vec![c(0.0, -0.5), c(0.7, -0.2), c(0.4, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eig(&m, 1e-12).unwrap();
        assert!(residual(&m, &e) < 1e-12);
        let tr: f64 = e.values.iter().sum();
        assert!((tr - m.trace().re).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let ip = e.vectors[i].inner(&e.vectors[j]).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m, 1e-12), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(CVector::new(vec![c(f64::NAN, 0.0)]), Err(LinalgError::NonFinite));
        let rows = vec![vec![c(f64::INFINITY, 0.0)]];
        assert_eq!(CMatrix::from_rows(&rows), Err(LinalgError::NonFinite));
    }

    #[test]
    fn matvec_identity_and_zero() {
        let v = CVector::new(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, 3.0)]).unwrap();
        assert_eq!(CMatrix::identity(3).matvec(&v).unwrap(), v);
        assert_eq!(CMatrix::zeros(3, 3).matvec(&v).unwrap(), CVector::zeros(3));
        assert!(matches!(
            CMatrix::identity(2).matvec(&v),
            Err(LinalgError::DimMismatch(_))
        ));
    }

    #[test]
    fn kron_small_cases() {
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.kron(&i2), CMatrix::identity(4));
        let d = CMatrix::diag(&[c(2.0, 0.0), c(0.0, 3.0)]);
        let want = CMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0), c(0.0, 3.0), c(0.0, 3.0)]);
        assert_eq!(d.kron(&i2), want);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!(wrap_angle(0.0).abs() < 1e-15);
    }
}
