//! Dense complex matrices for operators on at most three qubits.
//!
//! Everything in this crate lives in a Hilbert space of dimension 2, 4 or 8,
//! so a flat row-major `Vec<Complex64>` is all the storage we need.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance used when a constructor checks `A = A†`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Frobenius tolerance on `U†U − I` for propagators.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest supported dimension (three qubits).
pub const MAX_DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        ComplexMatrix::from_row_major(raw.dim, raw.entries)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        RawMatrix { dim: m.dim, entries: m.entries }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if matches!(dim, 1 | 2 | 4 | 8) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        check_dim(N).expect("unsupported literal dimension");
        Self { dim: N, entries: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    /// Like [`from_row_major`](Self::from_row_major) but also requires `A = A†`
    /// within [`HERMITIAN_TOL`].
    pub fn hermitian(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        let m = Self::from_row_major(dim, entries)?;
        m.ensure_hermitian(HERMITIAN_TOL)?;
        Ok(m)
    }

    pub fn diagonal(diag: &[Complex64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len());
        check_dim(diag.len())?;
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * diag.len() + i] = *d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::ShapeMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            Err(Error::NotHermitian { defect })
        } else {
            Ok(())
        }
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("same dim");
        (&gram - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    fn same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim == rhs.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { left: self.dim, right: rhs.dim })
        }
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.dim, rhs.dim, "dimension mismatch");
                ComplexMatrix {
                    dim: self.dim,
                    entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a $op b).collect(),
                }
            }
        }

        impl $trait for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("dimension mismatch")
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product `a ⊗ b`.
///
/// `(a⊗b)[i·b.dim + k][j·b.dim + l] = a[i][j]·b[k][l]`. Results larger than
/// [`MAX_DIM`] are rejected.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim * b.dim;
    if n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a.get(i, j);
            for k in 0..b.dim {
                for l in 0..b.dim {
                    out.entries[(i * b.dim + k) * n + j * b.dim + l] = aij * b.get(k, l);
                }
            }
        }
    }
    Ok(out)
}

/// `e^{−i h t}` for Hermitian `h`, via the eigendecomposition `h = V Λ V†`.
pub fn expm_hermitian_generator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    h.ensure_hermitian(1e-10)?;
    let n = h.dim;
    let eig = h.to_nalgebra().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n);
    for (m, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda * t);
        for i in 0..n {
            let vi = v[(i, m)] * phase;
            for j in 0..n {
                out.entries[i * n + j] += vi * v[(j, m)].conj();
            }
        }
    }
    Ok(out)
}

/// `min_{|φ|=1} ‖a − φ b‖_F`.
///
/// The optimal phase is `tr(b†a)/|tr(b†a)|`; the residual is then evaluated
/// directly rather than through `‖a‖² + ‖b‖² − 2|tr(a†b)|`, which cancels
/// catastrophically when `a ≈ φb`.
pub fn dist_up_to_global_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.same_dim(b)?;
    let overlap: Complex64 = b.entries.iter().zip(&a.entries).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// The global phase `φ` (unit modulus) that best aligns `b` onto `a`.
pub fn best_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    a.same_dim(b)?;
    let overlap: Complex64 = b.entries.iter().zip(&a.entries).map(|(x, y)| x.conj() * y).sum();
    Ok(if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE })
}

/// Single-qubit Pauli matrices and identity.
pub mod pauli2 {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }
}
