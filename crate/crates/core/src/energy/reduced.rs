//! Closed-form densities of the ansatz and the static parts of the two
//! reduced field equations.
//!
//! With `c = cos φ`, `φ_z` and `p = ψ_z` the potential density is
//!
//! ```text
//! W = 2μ(c-1)² + μp² + (λ/2)(2(c-1) + p)²      elastic
//!   + (2/3)(κ1 + 6κ3) φ_z²                     curvature
//!   + 2χ1 φ_z (2c + 1 + p) + (2χ3/3) φ_z (c - 1 - p)
//!   + 4μc (1 - c)                              coupling
//! ```
//!
//! and the kinetic density is `2 ρ_rot φ_t² + (ρ/2) ψ_t²`, so the
//! Euler–Lagrange equations read `4 ρ_rot φ_tt = -δW/δφ` and
//! `ρ ψ_tt = -δW/δψ`.

use crate::params::MaterialParams;

pub fn elastic(p: &MaterialParams, phi: f64, psi_z: f64) -> f64 {
    let cm = phi.cos() - 1.0;
    2.0 * p.mu * cm * cm + p.mu * psi_z * psi_z + 0.5 * p.lambda * (2.0 * cm + psi_z).powi(2)
}

pub fn curvature(p: &MaterialParams, phi_z: f64) -> f64 {
    2.0 / 3.0 * (p.kappa1 + 6.0 * p.kappa3) * phi_z * phi_z
}

pub fn interaction(p: &MaterialParams, phi: f64, phi_z: f64, psi_z: f64) -> f64 {
    let c = phi.cos();
    2.0 * p.chi1 * phi_z * (2.0 * c + 1.0 + psi_z) + 2.0 * p.chi3 / 3.0 * phi_z * (c - 1.0 - psi_z)
}

pub fn coupling(p: &MaterialParams, phi: f64) -> f64 {
    4.0 * p.mu_c * (1.0 - phi.cos())
}

pub fn potential(p: &MaterialParams, phi: f64, phi_z: f64, psi_z: f64) -> f64 {
    elastic(p, phi, psi_z) + curvature(p, phi_z) + interaction(p, phi, phi_z, psi_z) + coupling(p, phi)
}

pub fn kinetic(p: &MaterialParams, phi_t: f64, psi_t: f64) -> f64 {
    2.0 * p.rho_rot * phi_t * phi_t + 0.5 * p.rho * psi_t * psi_t
}

/// Pointwise field values with first and second space derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub phi: f64,
    pub phi_z: f64,
    pub phi_zz: f64,
    pub psi_z: f64,
    pub psi_zz: f64,
}

/// Static part of the rotational equation, `ρ_rot φ_tt = rotational_static`.
pub fn rotational_static(p: &MaterialParams, j: &Jet2) -> f64 {
    let s = j.phi.sin();
    -(p.lambda + p.mu + p.mu_c) * s + 0.5 * (p.lambda + p.mu) * (2.0 * j.phi).sin() + 0.5 * p.lambda * s * j.psi_z
        + (p.kappa1 / 3.0 + 2.0 * p.kappa3) * j.phi_zz
        + (p.chi1 / 2.0 - p.chi3 / 6.0) * j.psi_zz
}

/// Static part of the displacement equation, which reads
/// `displacement_static + ρ ψ_tt = 0`.
pub fn displacement_static(p: &MaterialParams, j: &Jet2) -> f64 {
    -p.lambda * (j.psi_zz - 2.0 * j.phi_z * j.phi.sin()) - 2.0 * p.mu * j.psi_zz
        + 2.0 / 3.0 * (p.chi3 - 3.0 * p.chi1) * j.phi_zz
}

/// `δW/δφ`, equal to `-4 rotational_static`.
pub fn variation_phi(p: &MaterialParams, j: &Jet2) -> f64 {
    -4.0 * rotational_static(p, j)
}

/// `δW/δψ`, equal to `displacement_static`.
pub fn variation_psi(p: &MaterialParams, j: &Jet2) -> f64 {
    displacement_static(p, j)
}
