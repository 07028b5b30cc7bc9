//! Dense complex square matrices.
//!
//! Everything in this crate lives in Hilbert spaces of dimension at most 8,
//! so a plain row-major `Vec<Complex64>` is all the storage we need. The
//! Hermitian eigensolver is delegated to `nalgebra`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for algebraic identities.
pub const TOL: f64 = 1e-10;
/// Absolute tolerance for eigendecomposition residuals.
pub const EIG_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense `dim × dim` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be positive".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::BadShape {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::BadShape {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![ONE; dim])
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diag(&diag)
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[Complex64], bra: &[Complex64]) -> Self {
        let dim = ket.len();
        assert_eq!(
            dim,
            bra.len(),
            "outer product of vectors with different lengths"
        );
        let mut data = Vec::with_capacity(dim * dim);
        for k in ket {
            for b in bra {
                data.push(k * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self::from_rows(&[vec![ZERO, -i], vec![i, ZERO]]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diag(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Kronecker product `self ⊗ other`; `self` is the left (slow) index.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for i in 0..na {
            for j in 0..na {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        out[(i * nb + k, j * nb + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            self.dim, other.dim,
            "comparing matrices of different dimension"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.dagger()).scale_real(0.5)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Traces out the left factor of a `dim_a · dim_b` bipartite operator.
    pub fn partial_trace_left(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != self.dim {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: self.dim,
            });
        }
        let mut out = Self::zeros(dim_b);
        for a in 0..dim_a {
            for k in 0..dim_b {
                for l in 0..dim_b {
                    out[(k, l)] += self[(a * dim_b + k, a * dim_b + l)];
                }
            }
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix. Eigenvalues are returned in
    /// ascending order with orthonormal eigenvectors in matching order.
    pub fn eigh(&self) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
        let dev = self.hermitian_deviation();
        if dev > EIG_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let n = self.dim;
        let m = DMatrix::from_row_slice(n, n, &self.hermitian_part().data);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        Ok((values, vectors))
    }

    /// `exp(factor · H)` for Hermitian `H`, via its eigendecomposition.
    pub fn exp_hermitian(&self, factor: Complex64) -> Result<Self> {
        let (values, vectors) = self.eigh()?;
        let mut out = Self::zeros(self.dim);
        for (lambda, v) in values.iter().zip(&vectors) {
            out = &out + &Self::outer(v, v).scale((factor * lambda).exp());
        }
        Ok(out)
    }

    /// General matrix exponential by scaling and squaring with a Taylor
    /// series on the scaled matrix.
    pub fn expm(&self) -> Self {
        let norm = self.norm_one();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale_real(0.5f64.powi(squarings as i32));
        let mut sum = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=30 {
            term = (&term * &scaled).scale_real(1.0 / k as f64);
            sum = &sum + &term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim, rhs.dim,
            "multiplying matrices of different dimension"
        );
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "adding matrices of different dimension");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.dim, rhs.dim,
            "subtracting matrices of different dimension"
        );
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `A ⊗ B` with the measured system as the left factor.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}
