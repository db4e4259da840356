//! Matrix fields sampled on a uniform z-grid and the z-only differential
//! operators acting on them.

use serde::{Deserialize, Serialize};

use super::Matrix3;
use crate::error::{Error, Result};

/// Minimum number of samples for the second-order stencils.
pub const MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Second-order one-sided stencils at both ends.
    #[default]
    OneSided,
    /// Sample `n` wraps to sample `0`.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField1D {
    samples: Vec<Matrix3>,
    h: f64,
}

impl MatrixField1D {
    pub fn new(samples: Vec<Matrix3>, h: f64) -> Result<Self> {
        check_grid(samples.len(), h)?;
        if !samples.iter().all(Matrix3::is_finite) {
            return Err(Error::NonFinite("MatrixField1D"));
        }
        Ok(MatrixField1D { samples, h })
    }

    pub fn from_fn(n: usize, h: f64, f: impl Fn(usize) -> Matrix3) -> Result<Self> {
        MatrixField1D::new((0..n).map(f).collect(), h)
    }

    pub fn samples(&self) -> &[Matrix3] {
        &self.samples
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Entry `(i, j)` of every sample.
    pub fn component(&self, i: usize, j: usize) -> Vec<f64> {
        self.samples.iter().map(|m| m.0[i][j]).collect()
    }

    /// Grid inner product `h Σ A:B`.
    pub fn inner(&self, other: &MatrixField1D) -> f64 {
        self.h
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a.frobenius(b))
                .sum::<f64>()
    }

    pub fn map(&self, f: impl Fn(&Matrix3) -> Matrix3) -> MatrixField1D {
        MatrixField1D { samples: self.samples.iter().map(f).collect(), h: self.h }
    }

    pub fn zip_map(&self, other: &MatrixField1D, f: impl Fn(&Matrix3, &Matrix3) -> Matrix3) -> MatrixField1D {
        MatrixField1D {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| f(a, b)).collect(),
            h: self.h,
        }
    }
}

pub(crate) fn check_grid(n: usize, h: f64) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidGrid(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("spacing h = {h} must be positive")));
    }
    Ok(())
}

/// Second-order first derivative of uniformly spaced samples.
pub fn derivative(values: &[f64], h: f64, boundary: Boundary) -> Vec<f64> {
    let n = values.len();
    let inv = 0.5 / h;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv;
    }
    match boundary {
        Boundary::OneSided => {
            out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv;
            out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv;
        }
        Boundary::Periodic => {
            out[0] = (values[1] - values[n - 1]) * inv;
            out[n - 1] = (values[0] - values[n - 2]) * inv;
        }
    }
    out
}

/// Second-order second derivative; the one-sided end stencil uses four points.
pub fn second_derivative(values: &[f64], h: f64, boundary: Boundary) -> Vec<f64> {
    let n = values.len();
    let inv = 1.0 / (h * h);
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * inv;
    }
    match boundary {
        Boundary::OneSided => {
            out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) * inv;
            out[n - 1] =
                (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) * inv;
        }
        Boundary::Periodic => {
            out[0] = (values[1] - 2.0 * values[0] + values[n - 1]) * inv;
            out[n - 1] = (values[0] - 2.0 * values[n - 1] + values[n - 2]) * inv;
        }
    }
    out
}

/// `(Curl M)_ij = ε_jrs ∂_r M_is` with one-sided stencils at the ends.
pub fn matrix_curl(field: &MatrixField1D) -> Result<MatrixField1D> {
    matrix_curl_with(field, Boundary::OneSided)
}

/// Curl for fields depending on `z` only: column 1 is `-∂z` of column 2,
/// column 2 is `∂z` of column 1, column 3 vanishes.
pub fn matrix_curl_with(field: &MatrixField1D, boundary: Boundary) -> Result<MatrixField1D> {
    check_grid(field.len(), field.h)?;
    let mut dz = vec![Matrix3::zeros(); field.len()];
    for i in 0..3 {
        for j in 0..2 {
            let d = derivative(&field.component(i, j), field.h, boundary);
            for (m, v) in dz.iter_mut().zip(d) {
                m.0[i][j] = v;
            }
        }
    }
    Ok(MatrixField1D { samples: dz.iter().map(curl_from_z_derivative).collect(), h: field.h })
}

/// The ε contraction of the curl given `∂z M` at one point.
pub fn curl_from_z_derivative(dz: &Matrix3) -> Matrix3 {
    let mut c = Matrix3::zeros();
    for i in 0..3 {
        c.0[i][0] = -dz.0[i][1];
        c.0[i][1] = dz.0[i][0];
    }
    c
}

/// `(grad f)*_ik = ε_ijk ∂_j f`; only the (1,2)/(2,1) block survives.
pub fn grad_star(values: &[f64], h: f64) -> Result<MatrixField1D> {
    grad_star_with(values, h, Boundary::OneSided)
}

pub fn grad_star_with(values: &[f64], h: f64, boundary: Boundary) -> Result<MatrixField1D> {
    check_grid(values.len(), h)?;
    if !values.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("grad_star input"));
    }
    let d = derivative(values, h, boundary);
    let samples = d
        .iter()
        .map(|&g| {
            let mut m = Matrix3::zeros();
            m.0[0][1] = -g;
            m.0[1][0] = g;
            m
        })
        .collect();
    Ok(MatrixField1D { samples, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{levi_civita, rotation_z};
    use proptest::prelude::*;

    fn grid(n: usize, z0: f64, h: f64) -> Vec<f64> {
        (0..n).map(|i| z0 + i as f64 * h).collect()
    }

    // Brute-force ε contraction with an independent derivative of each entry.
    fn curl_oracle(field: &MatrixField1D) -> Vec<Matrix3> {
        let n = field.len();
        let mut dz = vec![Matrix3::zeros(); n];
        for i in 0..3 {
            for s in 0..3 {
                let d = derivative(&field.component(i, s), field.h(), Boundary::OneSided);
                for k in 0..n {
                    dz[k].0[i][s] = d[k];
                }
            }
        }
        dz.iter()
            .map(|d| Matrix3::from_fn(|i, j| (0..3).map(|s| levi_civita(j, 2, s) * d.0[i][s]).sum()))
            .collect()
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        let h = 0.1;
        let zs = grid(7, -0.3, h);
        let q: Vec<f64> = zs.iter().map(|z| 2.0 * z * z - z + 1.0).collect();
        let d = derivative(&q, h, Boundary::OneSided);
        let dd = second_derivative(&q, h, Boundary::OneSided);
        for (k, z) in zs.iter().enumerate() {
            assert!((d[k] - (4.0 * z - 1.0)).abs() < 1e-12);
            assert!((dd[k] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_short_fields() {
        assert!(MatrixField1D::new(vec![Matrix3::identity(); 4], 0.1).is_err());
        assert!(MatrixField1D::new(vec![Matrix3::identity(); 5], 0.0).is_err());
        assert!(grad_star(&[1.0; 4], 0.1).is_err());
    }

    #[test]
    fn constant_field_has_zero_curl() {
        let c = Matrix3([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
        let f = MatrixField1D::new(vec![c; 9], 0.1).unwrap();
        let curl = matrix_curl(&f).unwrap();
        assert!(curl.samples().iter().all(|m| m.max_abs() < 1e-12));
    }

    #[test]
    fn ramp_in_entry_12() {
        let zs = grid(11, -0.5, 0.1);
        let f = MatrixField1D::from_fn(11, 0.1, |k| {
            let mut m = Matrix3::zeros();
            m.0[0][1] = zs[k];
            m
        })
        .unwrap();
        let curl = matrix_curl(&f).unwrap();
        for (m, o) in curl.samples().iter().zip(curl_oracle(&f)) {
            let mut expected = Matrix3::zeros();
            expected.0[0][0] = -1.0;
            assert!((*m - expected).max_abs() < 1e-12);
            assert!((*m - o).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_curl_trace() {
        let h = 1e-3;
        let zs = grid(2001, -1.0, h);
        let phi = |z: f64| 0.8 * z.sin() + 0.3 * z * z;
        let dphi = |z: f64| 0.8 * z.cos() + 0.6 * z;
        let f = MatrixField1D::from_fn(zs.len(), h, |k| rotation_z(phi(zs[k]))).unwrap();
        let curl = matrix_curl(&f).unwrap();
        for (k, c) in curl.samples().iter().enumerate().skip(1).take(zs.len() - 2) {
            let tr = (f.samples()[k].transpose() * *c).trace();
            assert!((tr - 2.0 * dphi(zs[k])).abs() < 1e-5);
        }
        for (m, o) in curl.samples().iter().zip(curl_oracle(&f)) {
            assert!((*m - o).max_abs() < 1e-12);
        }
    }

    #[test]
    fn grad_star_examples() {
        let zs = grid(9, 0.0, 0.25);
        let g = grad_star(&[3.0; 9], 0.25).unwrap();
        assert!(g.samples().iter().all(|m| m.max_abs() == 0.0));
        let g = grad_star(&zs, 0.25).unwrap();
        for m in g.samples() {
            assert!((m.0[0][1] + 1.0).abs() < 1e-12 && (m.0[1][0] - 1.0).abs() < 1e-12);
            let mut rest = *m;
            rest.0[0][1] = 0.0;
            rest.0[1][0] = 0.0;
            assert_eq!(rest.max_abs(), 0.0);
        }
        let sq: Vec<f64> = zs.iter().map(|z| z * z).collect();
        let g = grad_star(&sq, 0.25).unwrap();
        for (m, z) in g.samples().iter().zip(&zs) {
            assert!((m.0[1][0] - 2.0 * z).abs() < 1e-12);
            assert!((m.0[0][1] + 2.0 * z).abs() < 1e-12);
        }
    }

    // Error of the curl against the analytic curl of a cubic, at two spacings.
    fn cubic_curl_error(n: usize) -> f64 {
        let h = 1.0 / (n - 1) as f64;
        let zs = grid(n, 0.0, h);
        let f = MatrixField1D::from_fn(n, h, |k| {
            let z = zs[k];
            Matrix3::from_fn(|i, j| (i + 2 * j) as f64 * z * z * z + (i as f64 - j as f64) * z)
        })
        .unwrap();
        let curl = matrix_curl(&f).unwrap();
        let exact = |z: f64| {
            let d = Matrix3::from_fn(|i, j| 3.0 * (i + 2 * j) as f64 * z * z + (i as f64 - j as f64));
            Matrix3::from_fn(|i, j| match j {
                0 => -d.0[i][1],
                1 => d.0[i][0],
                _ => 0.0,
            })
        };
        curl.samples().iter().zip(&zs).map(|(c, &z)| (*c - exact(z)).max_abs()).fold(0.0, f64::max)
    }

    #[test]
    fn curl_converges_second_order() {
        let ratio = cubic_curl_error(41) / cubic_curl_error(81);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn curl_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            let n = 12;
            let h = 0.1;
            let m1 = MatrixField1D::from_fn(n, h, |k| Matrix3::from_fn(|i, j| ((seed as usize + 7 * k + 3 * i + j) % 11) as f64 / 11.0)).unwrap();
            let m2 = MatrixField1D::from_fn(n, h, |k| Matrix3::from_fn(|i, j| ((seed as usize * 3 + k * k + i * j) % 13) as f64 / 13.0)).unwrap();
            let combo = m1.zip_map(&m2, |x, y| *x * a + *y * b);
            let lhs = matrix_curl(&combo).unwrap();
            let c1 = matrix_curl(&m1).unwrap();
            let c2 = matrix_curl(&m2).unwrap();
            for k in 0..n {
                let rhs = c1.samples()[k] * a + c2.samples()[k] * b;
                prop_assert!((lhs.samples()[k] - rhs).max_abs() < 1e-12);
            }
        }

        #[test]
        fn grad_star_is_skew(coeffs in proptest::collection::vec(-2.0f64..2.0, 8)) {
            let g = grad_star(&coeffs, 0.3).unwrap();
            for m in g.samples() {
                prop_assert_eq!(m.transpose(), -*m);
            }
        }
    }
}
