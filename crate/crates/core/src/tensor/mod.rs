//! 3×3 matrix algebra for the energy functionals.
//!
//! [`Matrix3`] is a plain row-major value type. Grid-based operators for
//! fields that depend on `z` only live in [`field`], the iterative polar
//! decomposition in [`polar`], and the randomized identity checks in
//! [`identities`].

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub mod field;
pub mod identities;
pub mod polar;

pub use field::{curl_from_z_derivative, derivative, second_derivative, grad_star, matrix_curl, matrix_curl_with, Boundary, MatrixField1D};
pub use identities::{matrix_identity_suite, IdentityCheck, IdentityReport, DEFAULT_SEED};
pub use polar::{polar_decompose, Polar};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix3(pub [[f64; 3]; 3]);

impl Matrix3 {
    pub const fn new(rows: [[f64; 3]; 3]) -> Self {
        Matrix3(rows)
    }

    /// Rejects NaN/Inf entries.
    pub fn checked(rows: [[f64; 3]; 3]) -> Result<Self> {
        let m = Matrix3(rows);
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonFinite("Matrix3"))
        }
    }

    pub const fn zeros() -> Self {
        Matrix3([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Matrix3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Matrix3::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Transposed cofactor matrix, so that `A · adj(A) = det(A) · 1`.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        Matrix3([
            [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
            [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
            [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
        ])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate() * (1.0 / d))
    }

    pub fn sym(&self) -> Self {
        (*self + self.transpose()) * 0.5
    }

    pub fn skew(&self) -> Self {
        (*self - self.transpose()) * 0.5
    }

    /// Trace-free part `M - tr(M) 1 / 3`.
    pub fn dev(&self) -> Self {
        *self - Matrix3::identity() * (self.trace() / 3.0)
    }

    /// Frobenius product `tr(A Bᵀ)`.
    pub fn frobenius(&self, other: &Matrix3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.frobenius(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Rotation by `phi` about the z-axis.
pub fn rotation_z(phi: f64) -> Matrix3 {
    let (s, c) = phi.sin_cos();
    Matrix3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// `d/dphi rotation_z(phi)`.
pub fn rotation_z_derivative(phi: f64) -> Matrix3 {
    let (s, c) = phi.sin_cos();
    Matrix3([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])
}

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(self, o: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl AddAssign for Matrix3 {
    fn add_assign(&mut self, o: Matrix3) {
        *self = *self + o;
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, o: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl Neg for Matrix3 {
    type Output = Matrix3;
    fn neg(self) -> Matrix3 {
        self * -1.0
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;
    fn mul(self, o: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum())
    }
}

impl Mul<f64> for Matrix3 {
    type Output = Matrix3;
    fn mul(self, s: f64) -> Matrix3 {
        Matrix3::from_fn(|i, j| self.0[i][j] * s)
    }
}
