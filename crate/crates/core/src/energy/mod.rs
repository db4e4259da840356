//! Static and kinetic energies of the one-axis ansatz.
//!
//! Each potential energy is evaluated twice per grid point, once from its
//! definition and once from the expanded trace form, and the two must agree
//! before the trapezoidal integral is returned.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::MaterialParams;
use crate::tensor::{
    curl_from_z_derivative, derivative, matrix_curl, polar_decompose, rotation_z, rotation_z_derivative, Boundary,
    Matrix3, MatrixField1D,
};

pub mod reduced;
pub mod variation;

pub use variation::{variational_check, variational_check_with, ProbeField, ProbeResult, VariationStatus, VariationalOptions, VariationalReport};

/// Pointwise tolerance between a definition and its expanded form, relative
/// to the magnitude of the largest expanded term.
pub const DUAL_FORM_TOL: f64 = 1e-12;

/// Rotation angle and axial displacement sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzFields {
    pub z0: f64,
    pub h: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi_t: Option<Vec<f64>>,
    pub psi_t: Option<Vec<f64>>,
}

impl AnsatzFields {
    pub fn new(z0: f64, h: f64, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        let fields = AnsatzFields { z0, h, phi, psi, phi_t: None, psi_t: None };
        fields.validate()?;
        Ok(fields)
    }

    /// Samples `phi(z)` and `psi(z)` at `z0 + k h`.
    pub fn from_fn(z0: f64, h: f64, n: usize, phi: impl Fn(f64) -> f64, psi: impl Fn(f64) -> f64) -> Result<Self> {
        let zs: Vec<f64> = (0..n).map(|k| z0 + k as f64 * h).collect();
        AnsatzFields::new(z0, h, zs.iter().map(|&z| phi(z)).collect(), zs.iter().map(|&z| psi(z)).collect())
    }

    pub fn with_time_derivatives(mut self, phi_t: Vec<f64>, psi_t: Vec<f64>) -> Result<Self> {
        self.phi_t = Some(phi_t);
        self.psi_t = Some(psi_t);
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn z(&self, k: usize) -> f64 {
        self.z0 + k as f64 * self.h
    }

    fn validate(&self) -> Result<()> {
        crate::tensor::field::check_grid(self.phi.len(), self.h)?;
        if !self.z0.is_finite() {
            return Err(Error::NonFinite("z0"));
        }
        let n = self.phi.len();
        let arrays = [Some(&self.phi), Some(&self.psi), self.phi_t.as_ref(), self.psi_t.as_ref()];
        for (name, a) in ["phi", "psi", "phi_t", "psi_t"].into_iter().zip(arrays) {
            let Some(a) = a else { continue };
            if a.len() != n {
                return Err(Error::InvalidGrid(format!("{name} has {} samples, phi has {n}", a.len())));
            }
            if !a.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("ansatz field"));
            }
        }
        Ok(())
    }
}

/// How `Curl R̄` is formed from the sampled angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurlScheme {
    /// Finite-difference curl of the sampled rotation matrices.
    #[default]
    Stencil,
    /// `R̄'(φ) ∂zφ` with only `∂zφ` taken by finite differences. The curl
    /// keeps the exact structure `φ_z diag(1, 1, 0)` of `R̄ᵀ Curl R̄`.
    ChainRule,
}

/// Pointwise matrices derived from the fields.
#[derive(Debug, Clone)]
pub struct Kinematics {
    pub rbar: Vec<Matrix3>,
    pub deformation: Vec<Matrix3>,
    pub curl: Vec<Matrix3>,
    pub phi_z: Vec<f64>,
    pub psi_z: Vec<f64>,
}

pub fn kinematics(fields: &AnsatzFields, scheme: CurlScheme) -> Result<Kinematics> {
    fields.validate()?;
    let h = fields.h;
    let phi_z = derivative(&fields.phi, h, Boundary::OneSided);
    let psi_z = derivative(&fields.psi, h, Boundary::OneSided);
    let rbar: Vec<Matrix3> = fields.phi.iter().map(|&p| rotation_z(p)).collect();
    let deformation = psi_z.iter().map(|&p| Matrix3::diag(1.0, 1.0, 1.0 + p)).collect();
    let curl = match scheme {
        CurlScheme::Stencil => matrix_curl(&MatrixField1D::new(rbar.clone(), h)?)?.samples().to_vec(),
        CurlScheme::ChainRule => fields
            .phi
            .iter()
            .zip(&phi_z)
            .map(|(&p, &pz)| curl_from_z_derivative(&(rotation_z_derivative(p) * pz)))
            .collect(),
    };
    Ok(Kinematics { rbar, deformation, curl, phi_z, psi_z })
}

/// Trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// A value with the size of its largest contributing term.
#[derive(Debug, Clone, Copy)]
pub struct Expanded {
    pub value: f64,
    pub magnitude: f64,
}

impl Expanded {
    fn from_terms(terms: &[f64]) -> Self {
        Expanded {
            value: terms.iter().sum(),
            magnitude: terms.iter().fold(0.0, |m: f64, t| m.max(t.abs())),
        }
    }
}

pub fn elastic_density(p: &MaterialParams, rbar: &Matrix3, f: &Matrix3) -> f64 {
    let g = (rbar.transpose() * *f).sym() - Matrix3::identity();
    p.mu * g.norm_sq() + 0.5 * p.lambda * g.trace().powi(2)
}

pub fn elastic_density_expanded(p: &MaterialParams, rbar: &Matrix3, f: &Matrix3) -> Expanded {
    let rf = rbar.transpose() * *f;
    let tr = rf.trace();
    Expanded::from_terms(&[
        3.0 * p.mu + 4.5 * p.lambda,
        0.5 * p.mu * (rf * rf).trace(),
        0.5 * p.mu * (*f * f.transpose()).trace(),
        -(2.0 * p.mu + 3.0 * p.lambda) * tr,
        0.5 * p.lambda * tr * tr,
    ])
}

pub fn curvature_density(p: &MaterialParams, rbar: &Matrix3, curl: &Matrix3) -> f64 {
    let k = rbar.transpose() * *curl;
    p.kappa1 * k.sym().dev().norm_sq() + p.kappa2 * k.skew().norm_sq() + p.kappa3 * k.trace().powi(2)
}

pub fn curvature_density_expanded(p: &MaterialParams, rbar: &Matrix3, curl: &Matrix3) -> Expanded {
    let k = rbar.transpose() * *curl;
    Expanded::from_terms(&[
        0.5 * (p.kappa1 - p.kappa2) * (k * k).trace(),
        0.5 * (p.kappa1 + p.kappa2) * (curl.transpose() * *curl).trace(),
        -(p.kappa1 / 3.0 - p.kappa3) * k.trace().powi(2),
    ])
}

pub fn interaction_density(p: &MaterialParams, rbar: &Matrix3, f: &Matrix3, curl: &Matrix3) -> f64 {
    let k = rbar.transpose() * *curl;
    let rf = rbar.transpose() * *f;
    p.chi1 * k.trace() * rf.trace()
        + p.chi3 * k.sym().dev().frobenius(&(rf - Matrix3::identity()).sym().dev())
}

pub fn interaction_density_expanded(p: &MaterialParams, rbar: &Matrix3, f: &Matrix3, curl: &Matrix3) -> Expanded {
    let k = rbar.transpose() * *curl;
    let rf = rbar.transpose() * *f;
    Expanded::from_terms(&[
        (p.chi1 - p.chi3 / 3.0) * k.trace() * rf.trace(),
        0.5 * p.chi3 * (curl.transpose() * *f).trace(),
        0.5 * p.chi3 * (k * rf).trace(),
    ])
}

/// Coupling density from the definition and from `2 μc (3 - tr R̄ᵀR)`.
pub fn coupling_density(p: &MaterialParams, rbar: &Matrix3, f: &Matrix3) -> Result<(f64, Expanded)> {
    let r = polar_decompose(f)?.rotation;
    let rr = rbar.transpose() * r;
    let def = p.mu_c * (rr - Matrix3::identity()).norm_sq();
    let id = Expanded::from_terms(&[6.0 * p.mu_c, -2.0 * p.mu_c * rr.trace()]);
    Ok((def, id))
}

fn check_dual(functional: &'static str, index: usize, def: f64, exp: Expanded) -> Result<f64> {
    let residual = (def - exp.value).abs();
    if residual.is_nan() || residual > DUAL_FORM_TOL * exp.magnitude.max(1.0) {
        return Err(Error::FormulaMismatch { functional, index, residual });
    }
    Ok(def)
}

fn check_admissible(k: &Kinematics) -> Result<()> {
    for (index, &p) in k.psi_z.iter().enumerate() {
        if !(1.0 + p > 0.0) {
            return Err(Error::Inadmissible { index, value: 1.0 + p });
        }
    }
    Ok(())
}

/// Pointwise potential-energy densities with the dual-form checks applied.
#[derive(Debug, Clone, Default)]
pub struct Densities {
    pub elastic: Vec<f64>,
    pub curvature: Vec<f64>,
    pub interaction: Vec<f64>,
    pub coupling: Vec<f64>,
}

impl Densities {
    pub fn total(&self) -> Vec<f64> {
        (0..self.elastic.len())
            .map(|k| self.elastic[k] + self.curvature[k] + self.interaction[k] + self.coupling[k])
            .collect()
    }
}

pub fn densities(p: &MaterialParams, k: &Kinematics) -> Result<Densities> {
    check_admissible(k)?;
    let n = k.rbar.len();
    let mut d = Densities {
        elastic: Vec::with_capacity(n),
        curvature: Vec::with_capacity(n),
        interaction: Vec::with_capacity(n),
        coupling: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (r, f, c) = (&k.rbar[i], &k.deformation[i], &k.curl[i]);
        d.elastic.push(check_dual("elastic", i, elastic_density(p, r, f), elastic_density_expanded(p, r, f))?);
        d.curvature
            .push(check_dual("curvature", i, curvature_density(p, r, c), curvature_density_expanded(p, r, c))?);
        d.interaction.push(check_dual(
            "interaction",
            i,
            interaction_density(p, r, f, c),
            interaction_density_expanded(p, r, f, c),
        )?);
        let (def, id) = coupling_density(p, r, f)?;
        d.coupling.push(check_dual("coupling", i, def, id)?);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialEnergies {
    pub elastic: f64,
    pub curvature: f64,
    pub interaction: f64,
    pub coupling: f64,
}

impl PotentialEnergies {
    pub fn total(&self) -> f64 {
        self.elastic + self.curvature + self.interaction + self.coupling
    }
}

pub fn potential_energies(p: &MaterialParams, fields: &AnsatzFields, scheme: CurlScheme) -> Result<PotentialEnergies> {
    p.validate()?;
    let d = densities(p, &kinematics(fields, scheme)?)?;
    let h = fields.h;
    Ok(PotentialEnergies {
        elastic: trapezoid(&d.elastic, h),
        curvature: trapezoid(&d.curvature, h),
        interaction: trapezoid(&d.interaction, h),
        coupling: trapezoid(&d.coupling, h),
    })
}

fn integrate_checked(
    p: &MaterialParams,
    fields: &AnsatzFields,
    functional: &'static str,
    density: impl Fn(usize, &Kinematics) -> Result<f64>,
) -> Result<f64> {
    p.validate()?;
    let k = kinematics(fields, CurlScheme::Stencil)?;
    if functional == "coupling" {
        check_admissible(&k)?;
    }
    let values = (0..fields.len()).map(|i| density(i, &k)).collect::<Result<Vec<f64>>>();
    values.map(|v| trapezoid(&v, fields.h)).map_err(|e| match e {
        Error::NonFinite(_) => Error::NonFinite(functional),
        other => other,
    })
}

pub fn energy_elastic(p: &MaterialParams, fields: &AnsatzFields) -> Result<f64> {
    integrate_checked(p, fields, "elastic", |i, k| {
        let (r, f) = (&k.rbar[i], &k.deformation[i]);
        check_dual("elastic", i, elastic_density(p, r, f), elastic_density_expanded(p, r, f))
    })
}

pub fn energy_curvature(p: &MaterialParams, fields: &AnsatzFields) -> Result<f64> {
    integrate_checked(p, fields, "curvature", |i, k| {
        let (r, c) = (&k.rbar[i], &k.curl[i]);
        check_dual("curvature", i, curvature_density(p, r, c), curvature_density_expanded(p, r, c))
    })
}

pub fn energy_interaction(p: &MaterialParams, fields: &AnsatzFields) -> Result<f64> {
    integrate_checked(p, fields, "interaction", |i, k| {
        let (r, f, c) = (&k.rbar[i], &k.deformation[i], &k.curl[i]);
        check_dual("interaction", i, interaction_density(p, r, f, c), interaction_density_expanded(p, r, f, c))
    })
}

/// Requires `1 + ψ_z > 0` at every sample before any polar decomposition.
pub fn energy_coupling(p: &MaterialParams, fields: &AnsatzFields) -> Result<f64> {
    integrate_checked(p, fields, "coupling", |i, k| {
        let (def, id) = coupling_density(p, &k.rbar[i], &k.deformation[i])?;
        check_dual("coupling", i, def, id)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KineticEnergies {
    pub elastic: f64,
    pub rotational: f64,
}

/// `(ρ/2) ∫ ψ_t²` and `ρ_rot ∫ |∂t R̄|²`.
pub fn kinetic_energies(p: &MaterialParams, fields: &AnsatzFields) -> Result<KineticEnergies> {
    p.validate()?;
    fields.validate()?;
    let (Some(phi_t), Some(psi_t)) = (&fields.phi_t, &fields.psi_t) else {
        return Err(Error::MissingTimeDerivatives);
    };
    let elastic: Vec<f64> = psi_t.iter().map(|v| 0.5 * p.rho * v * v).collect();
    let mut rotational = Vec::with_capacity(fields.len());
    for (i, (&phi, &w)) in fields.phi.iter().zip(phi_t).enumerate() {
        let rate = (rotation_z_derivative(phi) * w).norm_sq();
        let reduced = 2.0 * w * w;
        if (rate - reduced).abs() > DUAL_FORM_TOL * reduced.max(1.0) {
            return Err(Error::FormulaMismatch { functional: "rotational kinetic", index: i, residual: rate - reduced });
        }
        rotational.push(p.rho_rot * rate);
    }
    Ok(KineticEnergies { elastic: trapezoid(&elastic, fields.h), rotational: trapezoid(&rotational, fields.h) })
}
