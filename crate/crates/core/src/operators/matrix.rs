//! Dense square complex matrices.
//!
//! Storage is row-major. The problem sizes here are small (tens of rows), so
//! the hot kernels are plain loops; nalgebra is used only for the
//! factorizations (Hermitian eigen, SVD, LU).

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ApsError, Result};

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Row-major data of length `n * n`.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(ApsError::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ApsError::NotSquare { rows: n, cols: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * d.len() + i] = x;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let d: Vec<C64> = d.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(ApsError::NonFinite { context: context.to_string() })
        }
    }

    pub fn ensure_dim(&self, n: usize) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(ApsError::DimensionMismatch { expected: n, found: self.n })
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: C64, x: &CMatrix) {
        debug_assert_eq!(self.n, x.n);
        for (a, &b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    pub fn add_diag(&mut self, c: C64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += c;
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.clone();
        m.add_diag(C64::new(c, 0.0));
        m
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rk = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(rk) {
                    *o += a * b;
                }
            }
        }
        CMatrix { n, data: out }
    }

    /// `self * diag(d)`
    pub fn mul_diag_right(&self, d: &[C64]) -> CMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| self.data[i * n + j] * d[j])
    }

    /// `diag(d) * self`
    pub fn mul_diag_left(&self, d: &[C64]) -> CMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| d[i] * self.data[i * n + j])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n, v.len(), "mul_vec dimension mismatch");
        let n = self.n;
        (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let n = self.n;
        (0..n).map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        if self.n == 1 {
            return self.data[0].norm();
        }
        self.to_nalgebra().singular_values().iter().cloned().fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|` entrywise.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                if (self.data[i * n + j] + self.data[j * n + i].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `(M + M^dagger) / 2`
    pub fn hermitian_part(&self) -> CMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5)
    }

    /// `(M - M^dagger) / (2i)`, Hermitian.
    pub fn anti_hermitian_part(&self) -> CMatrix {
        let n = self.n;
        let f = C64::new(0.0, -0.5);
        Self::from_fn(n, |i, j| (self.data[i * n + j] - self.data[j * n + i].conj()) * f)
    }

    pub fn hermitian_eigen(&self) -> HermitianEigen {
        HermitianEigen::new(self)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let inv = self
            .to_nalgebra()
            .try_inverse()
            .ok_or_else(|| ApsError::InvalidParameter("matrix is singular".into()))?;
        Ok(Self::from_nalgebra(&inv))
    }

    pub fn block_diag(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.n, other.n);
        let mut m = Self::zeros(a + b);
        for i in 0..a {
            for j in 0..a {
                m[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..b {
            for j in 0..b {
                m[(a + i, a + j)] = other[(i, j)];
            }
        }
        m
    }

    /// Rectangular block, row-major.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            for j in c0..c0 + cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(i, j)])
    }

    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect()
    }
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &a.matmul(b) - &b.matmul(a)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Ascending eigen-decomposition of a Hermitian matrix. Eigenvectors are the
/// columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        let n = h.dim();
        if n == 0 {
            return Self { values: vec![], vectors: CMatrix::zeros(0) };
        }
        let herm = h.hermitian_part();
        if n == 1 {
            return Self { values: vec![herm[(0, 0)].re], vectors: CMatrix::identity(1) };
        }
        let eig = nalgebra::SymmetricEigen::new(herm.to_nalgebra());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(lambda)) V^dagger`
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        self.vectors.mul_diag_right(&d).matmul(&self.vectors.adjoint())
    }

    /// `V^dagger M V`
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint().matmul(m).matmul(&self.vectors)
    }

    /// `V M V^dagger`
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.matmul(m).matmul(&self.vectors.adjoint())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().map(|z| -z).collect() }
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.n, rhs.n);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> =
            rows.into_iter().map(|r| r.into_iter().map(|[a, b]| C64::new(a, b)).collect()).collect();
        let m = CMatrix::from_rows(&rows).map_err(D::Error::custom)?;
        if !m.is_finite() {
            return Err(D::Error::custom("matrix has non-finite entries"));
        }
        Ok(m)
    }
}

/// Serde helper for complex vectors as `[[re, im], ...]`.
pub mod cvec_serde {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[a, b]| C64::new(a, b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cartesian_parts_recombine() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, -1.0)], vec![c(-3.0, 0.0), c(0.0, 4.0)]])
            .unwrap();
        let h = a.hermitian_part();
        let k = a.anti_hermitian_part();
        assert!(h.is_hermitian(0.0));
        assert!(k.is_hermitian(0.0));
        let back = &h + &k.scale(I);
        assert!((&back - &a).max_abs() < 1e-15);
    }

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let h = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0), c(0.3, 0.0)],
            vec![c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        let e = h.hermitian_eigen();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.apply(|x| c(x, 0.0));
        assert!((&back - &h).max_abs() < 1e-13);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let d = CMatrix::from_diag(&[c(0.0, -3.0), c(1.0, 0.0)]);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(CMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, -1.0)], vec![c(-3.0, 0.0), c(0.0, 4.0)]])
            .unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_of_triangular() {
        let a = CMatrix::from_real_rows(&[vec![2.0, 1.0], vec![0.0, 4.0]]).unwrap();
        let p = a.matmul(&a.inverse().unwrap());
        assert!((&p - &CMatrix::identity(2)).max_abs() < 1e-15);
    }
}
