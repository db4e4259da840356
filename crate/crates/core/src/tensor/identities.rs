//! Randomized numerical checks of the matrix-calculus identities used when
//! varying the energy functionals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::field::{grad_star_with, matrix_curl_with, Boundary, MatrixField1D};
use super::{polar_decompose, Matrix3};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 20_190_117;
pub const FD_STEP: f64 = 1e-6;
pub const TOLERANCE: f64 = 1e-6;
/// Periodic grid used for the curl-variation identities.
pub const CURL_GRID: usize = 16_384;
const CURL_MODES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub trials: usize,
    pub fd_step: f64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

/// Central-difference gradient of a scalar function of a matrix.
pub fn fd_gradient(f: impl Fn(&Matrix3) -> f64, x: &Matrix3, step: f64) -> Matrix3 {
    Matrix3::from_fn(|i, j| {
        let mut p = *x;
        let mut m = *x;
        p.0[i][j] += step;
        m.0[i][j] -= step;
        (f(&p) - f(&m)) / (2.0 * step)
    })
}

fn relative(fd: &Matrix3, exact: &Matrix3) -> f64 {
    (*fd - *exact).max_abs() / exact.max_abs().max(1.0)
}

fn random_matrix(rng: &mut impl Rng) -> Matrix3 {
    Matrix3::from_fn(|_, _| rng.random_range(-1.0..=1.0))
}

/// Rotation `exp(W)` for the skew matrix of `w` (Rodrigues).
pub fn rotation_from_vector(w: [f64; 3]) -> Matrix3 {
    let skew = Matrix3([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]);
    let angle = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if angle < 1e-12 {
        return Matrix3::identity() + skew;
    }
    let a = angle.sin() / angle;
    let b = (1.0 - angle.cos()) / (angle * angle);
    Matrix3::identity() + skew * a + skew * skew * b
}

/// `d/dF tr(R̄ᵀ polar(F)) = R Y (RᵀR̄ - R̄ᵀR) Y / det Y` with `Y = tr(U) 1 - U`.
pub fn polar_trace_gradient(f: &Matrix3, rbar: &Matrix3) -> Result<Matrix3> {
    let p = polar_decompose(f)?;
    let r = p.rotation;
    let y = Matrix3::identity() * p.stretch.trace() - p.stretch;
    let inner = r.transpose() * *rbar - rbar.transpose() * r;
    Ok(r * y * inner * y * (1.0 / y.det()))
}

struct Accumulator {
    name: &'static str,
    worst: f64,
    tolerance: f64,
}

impl Accumulator {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Accumulator { name, worst: 0.0, tolerance }
    }

    fn push(&mut self, r: f64) {
        // NaN must fail the check, so it is kept rather than ignored by max.
        if r.is_nan() || r > self.worst {
            self.worst = r;
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name,
            max_residual: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

// Smooth periodic matrix field on [0, 2π): low Fourier modes with random
// coefficients in [-1, 1].
struct PeriodicBasis {
    sin: Vec<Vec<f64>>,
    cos: Vec<Vec<f64>>,
    h: f64,
}

impl PeriodicBasis {
    fn new(n: usize) -> Self {
        let h = std::f64::consts::TAU / n as f64;
        let table = |f: fn(f64) -> f64| -> Vec<Vec<f64>> {
            (1..=CURL_MODES)
                .map(|k| (0..n).map(|i| f(k as f64 * i as f64 * h)).collect())
                .collect()
        };
        PeriodicBasis { sin: table(f64::sin), cos: table(f64::cos), h }
    }

    fn random_field(&self, rng: &mut impl Rng) -> Result<MatrixField1D> {
        let n = self.sin[0].len();
        let mut samples = vec![Matrix3::zeros(); n];
        for i in 0..3 {
            for j in 0..3 {
                let c0: f64 = rng.random_range(-1.0..=1.0);
                let coeffs: Vec<(f64, f64)> = (0..CURL_MODES)
                    .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
                    .collect();
                for (k, m) in samples.iter_mut().enumerate() {
                    m.0[i][j] = c0
                        + coeffs
                            .iter()
                            .enumerate()
                            .map(|(q, (a, b))| a * self.sin[q][k] + b * self.cos[q][k])
                            .sum::<f64>();
                }
            }
        }
        MatrixField1D::new(samples, self.h)
    }
}

/// Runs every identity over `trials` random draws from a seeded ChaCha8 stream.
pub fn matrix_identity_suite(trials: usize, seed: u64) -> Result<IdentityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = TOLERANCE;
    let mut tr_x = Accumulator::new("d tr(X) = I", tol);
    let mut tr_xa = Accumulator::new("d tr(XA) = A^T", tol);
    let mut tr_axb = Accumulator::new("d tr(AXB) = A^T B^T", tol);
    let mut tr_xxt = Accumulator::new("d tr(X X^T) = 2X", tol);
    let mut tr_axbx = Accumulator::new("d tr(AXBX) = A^T X^T B^T + B^T X^T A^T", tol);
    let mut tr_cube = Accumulator::new("d tr(X^3) = 3 (X^2)^T", tol);
    let mut polar = Accumulator::new("d/dF tr(Rbar^T polar F) = R Y (R^T Rbar - Rbar^T R) Y / det Y", tol);
    let mut curl_a1 = Accumulator::new("B : d(Curl R) = Curl B : dR", tol);
    let mut curl_a = Accumulator::new("tr(A) B : d(Curl R) = (tr(A) Curl B - B (grad tr A)*) : dR", tol);

    let basis = PeriodicBasis::new(CURL_GRID);

    for _ in 0..trials {
        let x = random_matrix(&mut rng);
        let a = random_matrix(&mut rng);
        let b = random_matrix(&mut rng);

        tr_x.push(relative(&fd_gradient(|m| m.trace(), &x, FD_STEP), &Matrix3::identity()));
        tr_xa.push(relative(&fd_gradient(|m| (*m * a).trace(), &x, FD_STEP), &a.transpose()));
        tr_axb.push(relative(
            &fd_gradient(|m| (a * *m * b).trace(), &x, FD_STEP),
            &(a.transpose() * b.transpose()),
        ));
        tr_xxt.push(relative(&fd_gradient(|m| (*m * m.transpose()).trace(), &x, FD_STEP), &(x * 2.0)));
        tr_axbx.push(relative(
            &fd_gradient(|m| (a * *m * b * *m).trace(), &x, FD_STEP),
            &(a.transpose() * x.transpose() * b.transpose() + b.transpose() * x.transpose() * a.transpose()),
        ));
        tr_cube.push(relative(
            &fd_gradient(|m| (*m * *m * *m).trace(), &x, FD_STEP),
            &((x * x).transpose() * 3.0),
        ));

        let f = Matrix3::identity() + random_matrix(&mut rng) * 0.3;
        let rbar = rotation_from_vector([
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ]);
        let exact = polar_trace_gradient(&f, &rbar)?;
        let fd = fd_gradient(
            |m| polar_decompose(m).map(|p| (rbar.transpose() * p.rotation).trace()).unwrap_or(f64::NAN),
            &f,
            FD_STEP,
        );
        polar.push(relative(&fd, &exact));

        let (r1, r2) = curl_variation_residuals(&basis, &mut rng)?;
        curl_a1.push(r1);
        curl_a.push(r2);
    }

    Ok(IdentityReport {
        seed,
        trials,
        fd_step: FD_STEP,
        checks: [tr_x, tr_xa, tr_axb, tr_xxt, tr_axbx, tr_cube, polar, curl_a1, curl_a]
            .into_iter()
            .map(Accumulator::finish)
            .collect(),
    })
}

// Relative residuals of the two curl-variation identities, each normalized
// by the Cauchy-Schwarz bound |left factor| |right factor| of its left side.
fn curl_variation_residuals(basis: &PeriodicBasis, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let b = basis.random_field(rng)?;
    let dr = basis.random_field(rng)?;
    let a = basis.random_field(rng)?;
    let per = Boundary::Periodic;

    let curl_dr = matrix_curl_with(&dr, per)?;
    let curl_b = matrix_curl_with(&b, per)?;
    let norm = |f: &MatrixField1D| f.inner(f).sqrt();

    let lhs1 = b.inner(&curl_dr);
    let rhs1 = curl_b.inner(&dr);
    let r1 = (lhs1 - rhs1).abs() / (norm(&b) * norm(&curl_dr));

    let tr_a: Vec<f64> = a.samples().iter().map(Matrix3::trace).collect();
    let star = grad_star_with(&tr_a, a.h(), per)?;
    let weighted = MatrixField1D::new(
        b.samples().iter().zip(&tr_a).map(|(m, t)| *m * *t).collect(),
        b.h(),
    )?;
    let lhs2 = weighted.inner(&curl_dr);
    let rhs_field = MatrixField1D::new(
        b.samples()
            .iter()
            .zip(curl_b.samples())
            .zip(star.samples())
            .zip(&tr_a)
            .map(|(((bm, cb), g), t)| *cb * *t - *bm * *g)
            .collect(),
        b.h(),
    )?;
    let rhs2 = rhs_field.inner(&dr);
    let r2 = (lhs2 - rhs2).abs() / (norm(&weighted) * norm(&curl_dr));
    Ok((r1, r2))
}
