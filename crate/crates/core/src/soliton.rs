//! Travelling-wave kinks of the reduced system and their displacement
//! profiles.
//!
//! The rotation profile is written once against [`Real`], so evaluating it on
//! a [`Jet`] gives exact derivatives in the phase `θ = k (z - v t)`.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::dispersion::{self, KValue};
use crate::error::{Error, Result};
use crate::jet::{Jet, Real};
use crate::params::MaterialParams;
use crate::quad::adaptive_simpson;

const TWO_PI: f64 = 2.0 * PI;

/// Phase offset of the branch form, `ln(1/2)`.
pub const DELTA: f64 = -LN_2;

/// How far left of the centre (in units of `1/k`) the displacement quadrature
/// starts; the integrand there is below `e^-40`.
const QUAD_ANCHOR: f64 = 40.0;
const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `φ` rises from 0 to 2π.
    Kink,
    /// `φ` falls from 2π to 0.
    Antikink,
}

impl Branch {
    pub fn sign(self) -> i32 {
        match self {
            Branch::Kink => 1,
            Branch::Antikink => -1,
        }
    }
}

/// Which closed form a [`SolitonSolution`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// Smooth exact kink of the double sine-Gordon equation.
    Exact,
    /// Two arctan pieces joined at `e^{2θ} = 4`, a 0 → π → 0 profile.
    Paper,
    /// Linearised theory: `4 atan(e^{k0 θ + δ})` with `k0` in place of `k`.
    Linearised,
}

/// Exact kink `K(θ)` with `K(-∞) = 0`, `K(+∞) = 2π`, solving
/// `K'' = (1 - r) sin K + (r/2) sin 2K`, `r < 1`.
///
/// Uses `e^{-|θ|}` throughout and picks the cancellation-free branch of each
/// square-root difference.
pub fn kink_profile<T: Real>(theta: T, r: f64) -> T {
    let one = T::cst(1.0);
    let c = 0.25 * (1.0 - r);
    if theta.value() <= 0.0 {
        let u = theta.exp();
        let u2 = u * u;
        let a = u2.scale(c);
        let d = (one + u2.scale(0.5 * (1.0 + r)) + a * a).sqrt();
        // (√D + 1 - a)(√D + a - 1) = u²
        let w = if a.value() <= 1.0 { u / (d + one - a) } else { (d + a - one) / u };
        w.atan().scale(4.0)
    } else {
        let q = (-theta).exp();
        let q2 = q * q;
        let s0 = (q2 * q2 + q2.scale(0.5 * (1.0 + r)) + T::cst(c * c)).sqrt();
        // s0² - (q² - c)² = q²
        let den = if q2.value() <= c { s0 + T::cst(c) - q2 } else { q2 / (s0 + q2 - T::cst(c)) };
        T::cst(TWO_PI) - (q / den).atan().scale(4.0)
    }
}

/// `2 asin(X)`, the folded 0 → π → 0 form of [`kink_profile`].
pub fn arcsin_profile(theta: f64, r: f64) -> f64 {
    let c = 0.25 * (1.0 - r);
    let x = if theta <= 0.0 {
        let u = theta.exp();
        let u2 = u * u;
        u / (1.0 + 0.5 * (1.0 + r) * u2 + c * c * u2 * u2).sqrt()
    } else {
        let q = (-theta).exp();
        let q2 = q * q;
        q / (q2 * q2 + 0.5 * (1.0 + r) * q2 + c * c).sqrt()
    };
    2.0 * x.min(1.0).asin()
}

/// Piecewise arctan form: `4 atan(e^θ / 2)` below `θ = ln 2`,
/// `4 atan(2 e^{-θ})` above.
pub fn paper_profile<T: Real>(theta: T) -> T {
    if theta.value() < LN_2 {
        (theta + T::cst(DELTA)).exp().atan().scale(4.0)
    } else {
        (-theta - T::cst(DELTA)).exp().atan().scale(4.0)
    }
}

/// Sign of the active arctan piece at phase `theta`.
pub fn paper_piece(theta: f64) -> i32 {
    if theta < LN_2 { 1 } else { -1 }
}

/// Sine-Gordon kink `4 atan(e^{θ + δ})`, overflow-safe.
pub fn sine_gordon_kink<T: Real>(theta: T) -> T {
    if theta.value() <= LN_2 {
        (theta + T::cst(DELTA)).exp().atan().scale(4.0)
    } else {
        T::cst(TWO_PI) - (-theta - T::cst(DELTA)).exp().atan().scale(4.0)
    }
}

/// A travelling soliton of the reduced system at speed `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonSolution {
    pub params: MaterialParams,
    pub v: f64,
    /// `k(v)`, or `k0(v)` for the linearised form.
    pub k: f64,
    pub delta: f64,
    pub branch: Branch,
    pub m_sq: f64,
    pub b: f64,
    pub form: Form,
    /// `b / (m² + b)` for the exact form, 0 otherwise.
    pub r: f64,
    /// `v² - v_elas²`.
    pub gap: f64,
    pub m21: f64,
}

impl SolitonSolution {
    pub fn new(params: &MaterialParams, v: f64, branch: Branch, form: Form) -> Result<Self> {
        let d = dispersion::derive(params)?;
        let kv = match form {
            Form::Linearised => dispersion::k0(params, v)?,
            _ => dispersion::k_of_v(params, v)?,
        };
        let k = match kv {
            KValue::Defined { k } if k > 0.0 => k,
            KValue::Defined { .. } => {
                return Err(Error::NoKink(format!("k = 0 at v = {v}: zero-width limit, no localised profile")));
            }
            KValue::Pole { root } => {
                return Err(Error::Pole { speed: v, what: if root == dispersion::PoleRoot::V3 { "k(v) at v3" } else { "k(v) at v4" } });
            }
            KValue::Forbidden => return Err(forbidden(params, v, form)),
        };
        let b = dispersion::b_of_v(params, v)?;
        let r = match form {
            Form::Exact => {
                let mass = d.m_sq + b;
                if !(mass > 0.0) {
                    return Err(Error::NoKink(format!("m^2 + b = {mass} <= 0 at v = {v}")));
                }
                b / mass
            }
            _ => 0.0,
        };
        Ok(SolitonSolution {
            params: *params,
            v,
            k,
            delta: DELTA,
            branch,
            m_sq: d.m_sq,
            b,
            form,
            r,
            gap: v * v - d.v_elas * d.v_elas,
            m21: d.m[1][0],
        })
    }

    /// Replaces `k` with a prescribed wavenumber.
    pub fn with_k(mut self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
        }
        self.k = k;
        Ok(self)
    }

    pub fn theta(&self, z: f64, t: f64) -> f64 {
        self.k * (z - self.v * t)
    }

    /// Profile as a function of the phase.
    pub fn profile<T: Real>(&self, theta: T) -> T {
        let base = match self.form {
            Form::Exact => kink_profile(theta, self.r),
            Form::Linearised => sine_gordon_kink(theta),
            Form::Paper => return paper_profile(theta),
        };
        match self.branch {
            Branch::Kink => base,
            Branch::Antikink => T::cst(TWO_PI) - base,
        }
    }

    pub fn phi(&self, z: f64, t: f64) -> f64 {
        self.profile(self.theta(z, t))
    }

    /// `φ`, `∂zφ`, `∂zzφ`; time derivatives follow from `∂t = -v ∂z`.
    pub fn phi_jet(&self, z: f64, t: f64) -> Jet {
        let j = self.profile(Jet::var(self.theta(z, t)));
        Jet { v: j.v, d1: self.k * j.d1, d2: self.k * self.k * j.d2 }
    }

    /// Position of the `φ = π` crossing.
    pub fn center(&self, t: f64) -> f64 {
        let theta_c = match self.form {
            Form::Exact => (2.0 / (1.0 - self.r).sqrt()).ln(),
            _ => LN_2,
        };
        self.v * t + theta_c / self.k
    }

    /// Folded `2 asin(X)` at the same phase.
    pub fn phi_arcsin(&self, z: f64, t: f64) -> f64 {
        arcsin_profile(self.theta(z, t), self.r)
    }

    /// `φ_paper - 2 asin(X)`; zero exactly when `b = 0`.
    pub fn paper_deviation(&self, z: f64, t: f64) -> f64 {
        paper_profile(self.theta(z, t)) - self.phi_arcsin(z, t)
    }

    /// The same kink in rescaled variables `ẑ = z/s`, `v̂ = v/s`.
    pub fn rescaled(&self) -> Result<DsgKink> {
        let d = dispersion::derive(&self.params)?;
        let s_sq = d.v_rot * d.v_rot + d.m[0][1] * d.m[1][0] / self.gap;
        if !(s_sq > 0.0) {
            return Err(Error::Forbidden { speed: self.v, detail: format!("rescale factor squared {s_sq} <= 0") });
        }
        let s = s_sq.sqrt();
        DsgKink::new(self.m_sq, self.b, self.v / s).map(|k| DsgKink { scale: s, ..k })
    }

    /// `∂zψ` at phase-frame position `s = z - v t`.
    pub fn psi_slope(&self, s: f64, constant: IntegrationConstant) -> f64 {
        let j = self.phi_jet(s, 0.0);
        let p = &self.params;
        let cos_term = match constant {
            IntegrationConstant::Decaying => j.v.cos() - 1.0,
            IntegrationConstant::Prestrained => j.v.cos(),
        };
        (self.m21 * j.d1 + 2.0 * p.lambda / p.rho * cos_term) / self.gap
    }

    /// Uniform strain `2λ / (ρ (v² - v_elas²))` carried by the pre-strained
    /// displacement at both ends.
    pub fn background_strain(&self) -> f64 {
        2.0 * self.params.lambda / (self.params.rho * self.gap)
    }

    /// Linearised displacement `4 M21 / (v² - v_elas²) atan(e^{±(k θ) ± δ})`.
    pub fn psi_linearised(&self, z: f64, t: f64) -> f64 {
        let base = 0.25 * sine_gordon_kink(self.theta(z, t));
        let shape = match self.branch {
            Branch::Kink => base,
            Branch::Antikink => 0.5 * PI - base,
        };
        4.0 * self.m21 / self.gap * shape
    }
}

fn forbidden(p: &MaterialParams, v: f64, form: Form) -> Error {
    if form == Form::Linearised {
        return Error::Forbidden { speed: v, detail: "k0^2 < 0: no linearised soliton at this speed".into() };
    }
    let detail = match dispersion::classify(p) {
        Ok(rep) => {
            let lo = rep.allowed_intervals.iter().map(|i| i.hi).filter(|&h| h <= v).fold(0.0, f64::max);
            let hi = rep.allowed_intervals.iter().map(|i| i.lo).filter(|&l| l >= v).fold(f64::INFINITY, f64::min);
            format!("k^2 < 0: v lies in the forbidden interval ({lo:.6}, {hi:.6})")
        }
        Err(_) => "k^2 < 0".into(),
    };
    Error::Forbidden { speed: v, detail }
}

pub fn phi_exact(sol: &SolitonSolution, z: f64, t: f64) -> f64 {
    let exact = SolitonSolution { form: Form::Exact, ..*sol };
    exact.phi(z, t)
}

pub fn phi_paper_arctan(sol: &SolitonSolution, z: f64, t: f64) -> f64 {
    paper_profile(sol.theta(z, t))
}

pub fn phi_linearised(params: &MaterialParams, v: f64, z: f64, t: f64) -> Result<f64> {
    Ok(SolitonSolution::new(params, v, Branch::Kink, Form::Linearised)?.phi(z, t))
}

/// Kink of `φ_tt - φ_zz + m² sin φ + (b/2) sin 2φ = 0` moving at `v̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DsgKink {
    pub m_sq: f64,
    pub b: f64,
    pub v_hat: f64,
    /// `sqrt((m² + b) / (1 - v̂²))`.
    pub kappa: f64,
    pub r: f64,
    /// Length scale between original and rescaled coordinates (1 if built
    /// directly).
    pub scale: f64,
}

/// Residuals of the two conditions on `u = e^{κ(ẑ - v̂ t)}`, divided by
/// `(m² + b) u` and `(m² + b) u²` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentConditions {
    pub linear: f64,
    /// `u_t² + u_z² + (m² + b) u²`.
    pub quadratic_printed: f64,
    /// `u_t² - u_z² + (m² + b) u²`.
    pub quadratic_corrected: f64,
}

impl DsgKink {
    pub fn new(m_sq: f64, b: f64, v_hat: f64) -> Result<Self> {
        let mass = m_sq + b;
        if !(mass > 0.0) {
            return Err(Error::NoKink(format!("m^2 + b = {mass} <= 0")));
        }
        if !(v_hat.abs() < 1.0) {
            return Err(Error::NoKink(format!("|v_hat| = {} >= 1", v_hat.abs())));
        }
        Ok(DsgKink { m_sq, b, v_hat, kappa: (mass / (1.0 - v_hat * v_hat)).sqrt(), r: b / mass, scale: 1.0 })
    }

    pub fn theta(&self, z: f64, t: f64) -> f64 {
        self.kappa * (z - self.v_hat * t)
    }

    pub fn phi(&self, z: f64, t: f64) -> f64 {
        kink_profile(self.theta(z, t), self.r)
    }

    /// Left side of the equation with derivatives from the jet.
    pub fn residual(&self, z: f64, t: f64) -> f64 {
        let j = kink_profile(Jet::var(self.theta(z, t)), self.r);
        let k2 = self.kappa * self.kappa;
        let phi_tt = k2 * self.v_hat * self.v_hat * j.d2;
        let phi_zz = k2 * j.d2;
        phi_tt - phi_zz + self.m_sq * j.v.sin() + 0.5 * self.b * (2.0 * j.v).sin()
    }

    /// As [`Self::residual`] with centred finite differences of step `h`.
    pub fn residual_fd(&self, z: f64, t: f64, h: f64) -> f64 {
        let f = |z: f64, t: f64| self.phi(z, t);
        let c = f(z, t);
        let phi_tt = (f(z, t + h) - 2.0 * c + f(z, t - h)) / (h * h);
        let phi_zz = (f(z + h, t) - 2.0 * c + f(z - h, t)) / (h * h);
        phi_tt - phi_zz + self.m_sq * c.sin() + 0.5 * self.b * (2.0 * c).sin()
    }

    pub fn exponent_conditions(&self, z: f64, t: f64) -> ExponentConditions {
        let mass = self.m_sq + self.b;
        let u = self.theta(z, t).exp();
        let u_z = self.kappa * u;
        let u_t = -self.kappa * self.v_hat * u;
        let (u_zz, u_tt) = (self.kappa * u_z, -self.kappa * self.v_hat * u_t);
        ExponentConditions {
            linear: (u_tt - u_zz + mass * u) / (mass * u),
            quadratic_printed: (u_t * u_t + u_z * u_z + mass * u * u) / (mass * u * u),
            quadratic_corrected: (u_t * u_t - u_z * u_z + mass * u * u) / (mass * u * u),
        }
    }
}

/// Integration constant of the once-integrated displacement equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegrationConstant {
    /// `(cos φ - 1)`: `ψ' → 0` at both ends.
    #[default]
    Decaying,
    /// `cos φ`: carries the background strain at both ends.
    Prestrained,
}

/// Displacement sampled on a grid by quadrature of the slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementSolution {
    pub t: f64,
    pub constant: IntegrationConstant,
    pub background_strain: f64,
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_z: Vec<f64>,
    /// Whether the closed form is real-valued anywhere on the grid.
    pub closed_form_defined: bool,
    pub closed_form_reason: Option<String>,
    /// Closed-form constant when defined.
    pub c: Option<f64>,
}

pub fn psi_quadrature(sol: &SolitonSolution, z: &[f64], t: f64) -> Result<DisplacementSolution> {
    psi_quadrature_with(sol, z, t, IntegrationConstant::Decaying)
}

/// Integrates `∂zψ` from far left of the centre, where `φ` and `ψ` vanish,
/// through the sorted grid `z`.
pub fn psi_quadrature_with(
    sol: &SolitonSolution,
    z: &[f64],
    t: f64,
    constant: IntegrationConstant,
) -> Result<DisplacementSolution> {
    if z.is_empty() || z.iter().any(|x| !x.is_finite()) || !t.is_finite() {
        return Err(Error::InvalidGrid("grid must be non-empty and finite".into()));
    }
    if z.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("grid must be non-decreasing".into()));
    }
    let gap_scale = sol.v * sol.v + sol.gap.abs();
    if sol.gap.abs() <= 1e-12 * gap_scale {
        return Err(Error::Pole { speed: sol.v, what: "displacement at v = v_elas" });
    }
    let slope = |s: f64| sol.psi_slope(s, IntegrationConstant::Decaying);
    let step = 1.0 / sol.k;
    let integrate = |a: f64, b: f64| -> f64 {
        let pieces = ((b - a).abs() / step).ceil().max(1.0) as usize;
        let w = (b - a) / pieces as f64;
        (0..pieces).map(|i| adaptive_simpson(&slope, a + i as f64 * w, a + (i + 1) as f64 * w, QUAD_TOL)).sum()
    };
    let mut s_prev = sol.center(0.0) - QUAD_ANCHOR / sol.k;
    let mut acc = 0.0;
    let mut psi = Vec::with_capacity(z.len());
    let mut psi_z = Vec::with_capacity(z.len());
    let strain = sol.background_strain();
    for &zi in z {
        let s = zi - sol.v * t;
        acc += integrate(s_prev, s);
        s_prev = s;
        let (value, slope_here) = match constant {
            IntegrationConstant::Decaying => (acc, slope(s)),
            IntegrationConstant::Prestrained => (acc + strain * s, slope(s) + strain),
        };
        psi.push(value);
        psi_z.push(slope_here);
    }
    let probe = psi_closed_form(sol, z[0], t);
    Ok(DisplacementSolution {
        t,
        constant,
        background_strain: strain,
        z: z.to_vec(),
        psi,
        psi_z,
        closed_form_defined: z.iter().any(|&zi| psi_closed_form(sol, zi, t).defined),
        closed_form_reason: probe.reason,
        c: probe.c,
    })
}

/// Closed-form displacement at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormValue {
    pub defined: bool,
    /// Real value when defined.
    pub value: Option<f64>,
    pub reason: Option<String>,
    pub y: Option<f64>,
    pub c: Option<f64>,
    /// Real-part continuation through `arccoth` when `|Y| > 1`.
    pub continued: Option<f64>,
}

/// Two-term displacement with the piecewise `Y` argument and constant `C`.
///
/// The first term uses the single-branch kink `atan(e^{θ + δ})`, which is
/// the shape of the linearised displacement.
pub fn psi_closed_form(sol: &SolitonSolution, z: f64, t: f64) -> ClosedFormValue {
    let (m2, b) = (sol.m_sq, sol.b);
    let theta = sol.theta(z, t);
    let kink = match sol.branch {
        Branch::Kink => sine_gordon_kink(theta),
        Branch::Antikink => TWO_PI - sine_gordon_kink(theta),
    };
    let first = sol.m21 / sol.gap * kink;
    let undefined = |reason: &str, y: Option<f64>| ClosedFormValue {
        defined: false,
        value: None,
        reason: Some(reason.into()),
        y,
        c: None,
        continued: None,
    };
    if !(b > 0.0) {
        let mut out = undefined("b <= 0: sqrt(b) is not real", None);
        if sol.params.lambda == 0.0 {
            // the second term carries a factor lambda
            out.continued = Some(first);
        }
        return out;
    }
    let den = 8.0 * b.sqrt() * (m2 + b).powf(1.5);
    let base = 8.0 * b * b + 12.0 * b * m2;
    let e = if paper_piece(theta) > 0 { 0.25 * (2.0 * theta).exp() } else { 4.0 * (-2.0 * theta).exp() };
    let y = (base + m2 * m2 * (e + 4.0)) / den;
    let y0 = (base + 4.0 * m2 * m2) / den;
    let amp = 4.0 * sol.params.lambda / (sol.params.rho * sol.k * sol.gap) * (1.0 + m2 / b).sqrt();
    if y.abs() < 1.0 && y0.abs() < 1.0 {
        let c = -amp * y0.atanh();
        return ClosedFormValue {
            defined: true,
            value: Some(first + amp * y.atanh() + c),
            reason: None,
            y: Some(y),
            c: Some(c),
            continued: None,
        };
    }
    let arccoth = |x: f64| 0.5 * ((x + 1.0) / (x - 1.0)).ln();
    let mut out = undefined("|Y| >= 1: arctanh is not real", Some(y));
    if y.abs() > 1.0 && y0.abs() > 1.0 {
        out.continued = Some(first + amp * (arccoth(y) - arccoth(y0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn type_a_exact(v: f64) -> SolitonSolution {
        SolitonSolution::new(&MaterialParams::TYPE_A, v, Branch::Kink, Form::Exact).unwrap()
    }

    #[test]
    fn kink_solves_reduced_ode() {
        for &r in &[-3.0, -1.25, 0.0, 0.4, 0.95] {
            let mut max: f64 = 0.0;
            for i in -400..=400 {
                let th = i as f64 * 0.05;
                let j = kink_profile(Jet::var(th), r);
                let res = j.d2 - (1.0 - r) * j.v.sin() - 0.5 * r * (2.0 * j.v).sin();
                max = max.max(res.abs());
            }
            assert!(max < 1e-12, "r = {r}: {max}");
        }
    }

    #[test]
    fn kink_is_monotone_with_correct_limits() {
        for &r in &[-5.0, -1.25, 0.0, 0.9] {
            let mut prev = -1.0;
            for i in -700..=700 {
                let k = kink_profile(i as f64, r);
                assert!(k.is_finite() && k >= prev && (0.0..=TWO_PI).contains(&k));
                prev = k;
            }
            assert!(kink_profile(-700.0, r) < 1e-300);
            assert!((kink_profile(700.0, r) - TWO_PI).abs() < 1e-15);
            let c = (2.0 / (1.0 - r).sqrt()).ln();
            assert!((kink_profile(c, r) - PI).abs() < 1e-13);
        }
    }

    #[test]
    fn b_zero_matches_sine_gordon_and_arcsin() {
        for i in -300..=300 {
            let th = i as f64 * 0.1;
            assert!((kink_profile(th, 0.0) - sine_gordon_kink(th)).abs() < 1e-13);
            assert!((paper_profile(th) - arcsin_profile(th, 0.0)).abs() < 1e-12, "{th}");
        }
        assert!((arcsin_profile(0.3, 0.5) - paper_profile(0.3)).abs() > 1e-3);
    }

    #[test]
    fn type_a_dsg_residual() {
        let sol = type_a_exact(0.1);
        assert!((sol.k - 0.8440100).abs() < 1e-6);
        let dsg = sol.rescaled().unwrap();
        let mut max: f64 = 0.0;
        for i in -200..=200 {
            let th = i as f64 * 0.1;
            let t = 0.7;
            let z = th / dsg.kappa + dsg.v_hat * t;
            max = max.max(dsg.residual(z, t).abs());
            assert!(dsg.residual_fd(z, t, 1e-4).abs() < 1e-5);
        }
        assert!(max < 1e-8, "{max}");
        // phase agrees in both coordinate systems
        let (z, t) = (1.3, 2.0);
        assert!((dsg.theta(z / dsg.scale, t) - sol.theta(z, t)).abs() < 1e-12);
    }

    #[test]
    fn exponent_conditions() {
        let dsg = DsgKink::new(18.0, -10.0, 0.03).unwrap();
        let c = dsg.exponent_conditions(0.4, 1.0);
        assert!(c.linear.abs() < 1e-12 && c.quadratic_corrected.abs() < 1e-12);
        assert!(c.quadratic_printed > 1.0);
    }

    #[test]
    fn antikink_and_translation() {
        let k = type_a_exact(0.1);
        let a = SolitonSolution { branch: Branch::Antikink, ..k };
        for i in -50..=50 {
            let z = i as f64 * 0.3;
            assert!((k.phi(z, 0.0) + a.phi(z, 0.0) - TWO_PI).abs() < 1e-12);
            assert!((k.phi(z, 1.0) - k.phi(z + 0.1 * 3.0, 4.0)).abs() < 1e-12);
        }
        assert!(a.phi(-50.0, 0.0) > TWO_PI - 1e-12 && a.phi(50.0, 0.0) < 1e-12);
    }

    #[test]
    fn paper_branches_meet_at_pi() {
        let sol = type_a_exact(0.1).with_k(1.5).unwrap();
        let z = 4f64.ln() / 3.0 + 0.1 * 7.0;
        let th = sol.theta(z, 7.0);
        let left = 4.0 * (0.5 * th.exp()).atan();
        let right = 4.0 * (2.0 * (-th).exp()).atan();
        assert!((left - PI).abs() < 1e-12 && (right - PI).abs() < 1e-12);
        assert!((phi_paper_arctan(&sol, z - 1e-9, 7.0) - phi_paper_arctan(&sol, z + 1e-9, 7.0)).abs() < 1e-8);
    }

    #[test]
    fn forbidden_speed_cites_interval() {
        let err = SolitonSolution::new(&MaterialParams::TYPE_A, 4.0, Branch::Kink, Form::Exact).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Forbidden { .. }) && msg.contains("3.18") && msg.contains("4.71"), "{msg}");
        // m² + b < 0 above v_elas in regime (a)
        assert!(matches!(
            SolitonSolution::new(&MaterialParams::TYPE_A, 6.0, Branch::Kink, Form::Exact),
            Err(Error::NoKink(_))
        ));
    }

    #[test]
    fn psi_decays_and_matches_lambda_zero_antiderivative() {
        let sol = type_a_exact(0.1);
        let z: Vec<f64> = (0..=400).map(|i| -40.0 + 0.2 * i as f64).collect();
        let d = psi_quadrature(&sol, &z, 0.0).unwrap();
        assert!(d.psi[0].abs() < 1e-12 && d.psi_z[0].abs() < 1e-12 && d.psi_z[400].abs() < 1e-12);
        // differentiating the table recovers the slope to O(h²)
        let fine: Vec<f64> = (0..=1000).map(|i| -5.0 + 0.01 * i as f64).collect();
        let df = psi_quadrature(&sol, &fine, 0.0).unwrap();
        let scale = df.psi_z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (i, w) in df.psi.windows(3).enumerate() {
            let fd = (w[2] - w[0]) / 0.02;
            assert!((fd - df.psi_z[i + 1]).abs() < 1e-4 * scale, "{}", fine[i + 1]);
        }
        let p0 = MaterialParams { lambda: 0.0, ..MaterialParams::TYPE_A };
        let s0 = SolitonSolution::new(&p0, 0.1, Branch::Kink, Form::Exact).unwrap();
        let d0 = psi_quadrature(&s0, &z, 0.3).unwrap();
        for (i, &zi) in z.iter().enumerate() {
            let closed = s0.m21 / s0.gap * s0.phi(zi, 0.3);
            assert!((d0.psi[i] - closed).abs() < 1e-9, "{zi}: {} vs {closed}", d0.psi[i]);
        }
    }

    #[test]
    fn prestrained_slope_satisfies_displacement_equation() {
        use crate::energy::reduced::{displacement_static, Jet2};
        let sol = type_a_exact(0.1);
        let p = &sol.params;
        for i in -30..=30 {
            let s = i as f64 * 0.25;
            let phi = sol.phi_jet(s, 0.0);
            let h = 1e-5;
            let psi_zz = (sol.psi_slope(s + h, IntegrationConstant::Prestrained)
                - sol.psi_slope(s - h, IntegrationConstant::Prestrained))
                / (2.0 * h);
            let jet = Jet2 {
                phi: phi.v,
                phi_z: phi.d1,
                phi_zz: phi.d2,
                psi_z: sol.psi_slope(s, IntegrationConstant::Prestrained),
                psi_zz,
            };
            // ρ ψ_tt = ρ v² ψ_zz for a travelling wave
            let res = p.rho * sol.v * sol.v * psi_zz + displacement_static(p, &jet);
            assert!(res.abs() < 1e-6, "{s}: {res}");
        }
    }

    #[test]
    fn closed_form_is_never_real_for_b_positive() {
        let p = MaterialParams { kappa1: 30.0, ..MaterialParams::TYPE_A };
        let sol = SolitonSolution::new(&p, 4.0, Branch::Kink, Form::Exact).unwrap();
        assert!(sol.b > 0.0);
        let c = psi_closed_form(&sol, 0.5, 0.0);
        assert!(!c.defined && c.y.unwrap() > 1.0 && c.continued.is_some());
        let neg = psi_closed_form(&type_a_exact(0.1), 0.0, 0.0);
        assert!(!neg.defined && neg.reason.unwrap().contains("b <= 0"));
    }

    #[test]
    fn linearised_limit() {
        let p = MaterialParams { lambda: 1e-8, mu: 1e-8, ..MaterialParams::TYPE_A };
        let sol = SolitonSolution::new(&p, 2.0, Branch::Kink, Form::Exact).unwrap();
        let lin = SolitonSolution::new(&p, 2.0, Branch::Kink, Form::Linearised).unwrap();
        let z: Vec<f64> = (0..=600).map(|i| -30.0 + 0.1 * i as f64).collect();
        let psi = psi_quadrature(&sol, &z, 0.0).unwrap();
        let (mut dphi, mut dpsi): (f64, f64) = (0.0, 0.0);
        for (i, &zi) in z.iter().enumerate() {
            dphi = dphi.max((sol.phi(zi, 0.0) - lin.phi(zi, 0.0)).abs());
            dpsi = dpsi.max((psi.psi[i] - lin.psi_linearised(zi, 0.0)).abs());
        }
        assert!(dphi < 1e-6 && dpsi < 1e-5, "{dphi} {dpsi}");
    }
}
