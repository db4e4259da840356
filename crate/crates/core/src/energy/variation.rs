//! Discrete first variation of the total potential energy, compared with
//! the static parts of the reduced field equations.

use serde::Serialize;

use super::reduced::{variation_phi, variation_psi, Jet2};
use super::{potential_energies, trapezoid, AnsatzFields, CurlScheme};
use crate::error::{Error, Result};
use crate::params::MaterialParams;
use crate::tensor::{derivative, second_derivative, Boundary};

/// Fields must have decayed below this at both ends.
const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeField {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariationStatus {
    Pass,
    Fail,
    /// Discrepancy beyond ten times the tolerance.
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationalOptions {
    pub h_fd: f64,
    /// Standard deviation of the Gaussian probe bumps.
    pub probe_width: f64,
    pub probes_per_field: usize,
    pub tolerance: f64,
    /// Discrepancies below this count as agreement regardless of scale.
    pub abs_tolerance: f64,
    pub scheme: CurlScheme,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        VariationalOptions {
            h_fd: 1e-6,
            probe_width: 0.6,
            probes_per_field: 5,
            tolerance: 1e-4,
            abs_tolerance: 1e-9,
            scheme: CurlScheme::ChainRule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub field: ProbeField,
    pub center: f64,
    /// `dE/dε` by central differences in the probe amplitude.
    pub discrete: f64,
    /// Integral of the field-equation expression against the probe.
    pub analytic: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalReport {
    pub h: f64,
    pub h_fd: f64,
    pub scheme: CurlScheme,
    pub probes: Vec<ProbeResult>,
    /// Largest probe error over the largest probe value, per field.
    pub rel_phi: f64,
    pub rel_psi: f64,
    pub max_rel: f64,
    pub max_abs: f64,
    pub tolerance: f64,
    pub status: VariationStatus,
}

impl VariationalReport {
    pub fn passed(&self) -> bool {
        self.status == VariationStatus::Pass
    }
}

pub fn variational_check(p: &MaterialParams, fields: &AnsatzFields, h_fd: f64) -> Result<VariationalReport> {
    variational_check_with(p, fields, &VariationalOptions { h_fd, ..Default::default() })
}

pub fn variational_check_with(
    p: &MaterialParams,
    fields: &AnsatzFields,
    opts: &VariationalOptions,
) -> Result<VariationalReport> {
    p.validate()?;
    if !(1e-8..=1e-4).contains(&opts.h_fd) {
        return Err(Error::InvalidArgument(format!("h_fd = {} outside [1e-8, 1e-4]", opts.h_fd)));
    }
    if opts.probes_per_field < 1 || !(opts.probe_width > 0.0) {
        return Err(Error::InvalidArgument("need at least one probe of positive width".into()));
    }
    let n = fields.len();
    for (name, a) in [("phi", &fields.phi), ("psi", &fields.psi)] {
        if a[0].abs() > SUPPORT_TOL || a[n - 1].abs() > SUPPORT_TOL {
            return Err(Error::InvalidArgument(format!("{name} does not vanish at the grid ends")));
        }
    }
    let length = (n - 1) as f64 * fields.h;
    let margin = 0.25 * length;
    if (-(margin / opts.probe_width).powi(2) / 2.0).exp() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "domain of length {length} too short for probes of width {}",
            opts.probe_width
        )));
    }
    let centers: Vec<f64> = (0..opts.probes_per_field)
        .map(|i| {
            let frac = if opts.probes_per_field == 1 { 0.5 } else { i as f64 / (opts.probes_per_field - 1) as f64 };
            fields.z0 + margin + frac * (length - 2.0 * margin)
        })
        .collect();

    let h = fields.h;
    let b = Boundary::OneSided;
    let (phi_z, phi_zz) = (derivative(&fields.phi, h, b), second_derivative(&fields.phi, h, b));
    let (psi_z, psi_zz) = (derivative(&fields.psi, h, b), second_derivative(&fields.psi, h, b));
    let jets: Vec<Jet2> = (0..n)
        .map(|k| Jet2 { phi: fields.phi[k], phi_z: phi_z[k], phi_zz: phi_zz[k], psi_z: psi_z[k], psi_zz: psi_zz[k] })
        .collect();

    let energy = |f: &AnsatzFields| potential_energies(p, f, opts.scheme).map(|e| e.total());
    let mut probes = Vec::with_capacity(2 * centers.len());
    for field in [ProbeField::Phi, ProbeField::Psi] {
        for &center in &centers {
            let bump: Vec<f64> = (0..n)
                .map(|k| (-((fields.z(k) - center) / opts.probe_width).powi(2) / 2.0).exp())
                .collect();
            let shifted = |sign: f64| {
                let mut f = fields.clone();
                let target = match field {
                    ProbeField::Phi => &mut f.phi,
                    ProbeField::Psi => &mut f.psi,
                };
                for (v, g) in target.iter_mut().zip(&bump) {
                    *v += sign * opts.h_fd * g;
                }
                f
            };
            let discrete = (energy(&shifted(1.0))? - energy(&shifted(-1.0))?) / (2.0 * opts.h_fd);
            let integrand: Vec<f64> = jets
                .iter()
                .zip(&bump)
                .map(|(j, g)| {
                    g * match field {
                        ProbeField::Phi => variation_phi(p, j),
                        ProbeField::Psi => variation_psi(p, j),
                    }
                })
                .collect();
            let analytic = trapezoid(&integrand, h);
            probes.push(ProbeResult { field, center, discrete, analytic, abs_error: (discrete - analytic).abs() });
        }
    }

    let relative = |which: ProbeField| {
        let sel = probes.iter().filter(|r| r.field == which);
        let scale = sel.clone().fold(0.0, |m: f64, r| m.max(r.analytic.abs()));
        let err = sel.fold(0.0, |m: f64, r| m.max(r.abs_error));
        if err <= opts.abs_tolerance {
            0.0
        } else {
            err / scale
        }
    };
    let rel_phi = relative(ProbeField::Phi);
    let rel_psi = relative(ProbeField::Psi);
    let max_rel = rel_phi.max(rel_psi);
    let max_abs = probes.iter().fold(0.0, |m: f64, r| m.max(r.abs_error));
    let status = if max_rel.is_nan() || max_rel > 10.0 * opts.tolerance {
        VariationStatus::Diverged
    } else if max_rel > opts.tolerance {
        VariationStatus::Fail
    } else {
        VariationStatus::Pass
    };
    Ok(VariationalReport {
        h,
        h_fd: opts.h_fd,
        scheme: opts.scheme,
        probes,
        rel_phi,
        rel_psi,
        max_rel,
        max_abs,
        tolerance: opts.tolerance,
        status,
    })
}

/// Bump test fields on `[-half_width, half_width]` with spacing `h`.
pub fn bump_fields(h: f64, half_width: f64, phi_amp: f64, psi_amp: f64) -> Result<AnsatzFields> {
    let n = (2.0 * half_width / h).round() as usize + 1;
    AnsatzFields::from_fn(
        -half_width,
        h,
        n,
        |z| phi_amp * (-(z / 1.5).powi(2)).exp(),
        |z| psi_amp * (-((z - 0.5) / 1.2).powi(2)).exp(),
    )
}
