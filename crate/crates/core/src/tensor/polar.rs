//! Polar decomposition `F = R U` by scaled Newton iteration on the rotation
//! factor.
//!
//! The iterate `X_{k+1} = (γ X_k + X_k^{-T} / γ) / 2` with the Frobenius
//! scaling `γ = sqrt(|X^{-1}| / |X|)` converges quadratically to `R`. The
//! loop stops once the update satisfies `|X_{k+1} - X_k| <= 1e-14 |X_{k+1}|`;
//! scaling is switched off after the update drops below 1e-2 so the final
//! steps are plain Newton steps.

use super::Matrix3;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const STOP_TOL: f64 = 1e-14;
const UNSCALED_BELOW: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub rotation: Matrix3,
    pub stretch: Matrix3,
    pub iterations: usize,
}

pub fn polar_decompose(f: &Matrix3) -> Result<Polar> {
    if !f.is_finite() {
        return Err(Error::NonFinite("polar_decompose input"));
    }
    let det = f.det();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDeterminant { det });
    }
    let mut x = *f;
    let mut scaled = true;
    for it in 1..=MAX_ITERATIONS {
        let inv_t = x
            .inverse()
            .ok_or(Error::NonPositiveDeterminant { det: x.det() })?
            .transpose();
        let gamma = if scaled { (inv_t.norm() / x.norm()).sqrt() } else { 1.0 };
        let next = (x * gamma + inv_t * (1.0 / gamma)) * 0.5;
        let delta = (next - x).norm();
        x = next;
        if delta <= STOP_TOL * x.norm() {
            let stretch = (x.transpose() * *f).sym();
            return Ok(Polar { rotation: x, stretch, iterations: it });
        }
        if delta < UNSCALED_BELOW {
            scaled = false;
        }
    }
    Err(Error::PolarNotConverged { iterations: MAX_ITERATIONS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rotation_z;
    use proptest::prelude::*;

    #[test]
    fn symmetric_input() {
        let f = Matrix3::diag(1.0, 1.0, 1.2);
        let p = polar_decompose(&f).unwrap();
        assert!((p.rotation - Matrix3::identity()).max_abs() < 1e-14);
        assert!((p.stretch - f).max_abs() < 1e-14);
    }

    #[test]
    fn pure_rotation() {
        let f = rotation_z(0.3);
        let p = polar_decompose(&f).unwrap();
        assert!((p.rotation - f).max_abs() < 1e-14);
        assert!((p.stretch - Matrix3::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn round_trip_known_factors() {
        let r = rotation_z(0.5);
        let u = Matrix3::diag(1.1, 0.9, 1.0);
        let p = polar_decompose(&(r * u)).unwrap();
        assert!((p.rotation - r).max_abs() < 1e-10);
        assert!((p.stretch - u).max_abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive_determinant() {
        assert!(matches!(
            polar_decompose(&Matrix3::diag(1.0, 1.0, -0.5)),
            Err(Error::NonPositiveDeterminant { .. })
        ));
        assert!(polar_decompose(&Matrix3::diag(1.0, 1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(entries in proptest::array::uniform9(-1.0f64..1.0), scale in 0.1f64..10.0) {
            let mut f = Matrix3::identity();
            for (k, e) in entries.iter().enumerate() {
                f.0[k / 3][k % 3] += 0.3 * e;
            }
            let f = f * scale;
            let p = polar_decompose(&f).unwrap();
            let r = p.rotation;
            prop_assert!((f - r * p.stretch).norm() <= 1e-12 * f.norm());
            prop_assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-13);
            prop_assert!((r.det() - 1.0).abs() < 1e-13);
            prop_assert_eq!(p.stretch, p.stretch.transpose());
            // Positive definite: leading principal minors.
            let s = &p.stretch.0;
            prop_assert!(s[0][0] > 0.0);
            prop_assert!(s[0][0] * s[1][1] - s[0][1] * s[1][0] > 0.0);
            prop_assert!(p.stretch.det() > 0.0);
        }
    }
}
