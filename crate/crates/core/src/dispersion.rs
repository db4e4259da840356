//! Wave-speed algebra of the reduced system: the coupling matrix, `b(v)`,
//! the dispersion map `k(v)`, its poles and zero, and regime classification.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::MaterialParams;

/// Relative size of the quartic below which `v` is treated as a pole.
const POLE_TOL: f64 = 1e-14;
/// `|v0 - v4|` below which the classification is flagged as a boundary case.
pub const BOUNDARY_TOL: f64 = 1e-9;
const DIAGONAL_TOL: f64 = 1e-12;
const DEGENERATE_TOL: f64 = 1e-9;

/// Quantities that depend on the material only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedWaveQuantities {
    /// Row-major coupling matrix of the linear part of the wave system.
    pub m: [[f64; 2]; 2],
    pub v_elas: f64,
    pub v_rot: f64,
    /// `M12`.
    pub v_chi_sq: f64,
    pub m_sq: f64,
    pub m0_sq: f64,
    /// `+∞` when `mu_c = 0`.
    pub v0: f64,
    /// Larger and smaller root of the quartic in `v²`.
    pub v4_sq: f64,
    pub v3_sq: f64,
}

impl DerivedWaveQuantities {
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn v4(&self) -> f64 {
        self.v4_sq.sqrt()
    }

    /// `None` when `det M < 0` and the smaller root in `v²` is negative.
    pub fn v3(&self) -> Option<f64> {
        (self.v3_sq >= 0.0).then(|| self.v3_sq.sqrt())
    }

    /// `[v1, v2, v3, v4]` with `v1 = -v4` and `v2 = -v3`.
    pub fn roots(&self) -> Option<[f64; 4]> {
        let v3 = self.v3()?;
        let v4 = self.v4();
        Some([-v4, -v3, v3, v4])
    }

    /// `v⁴ - tr(M) v² + det(M)`.
    pub fn quartic(&self, v: f64) -> f64 {
        let v2 = v * v;
        // Factored form keeps full relative accuracy near the roots.
        (v2 - self.v3_sq) * (v2 - self.v4_sq)
    }

    /// Largest eigenvalue of `M`; the fastest linear wave speed squared.
    pub fn max_eigenvalue(&self) -> f64 {
        self.v4_sq
    }
}

pub fn derive(p: &MaterialParams) -> Result<DerivedWaveQuantities> {
    p.validate()?;
    let chi = p.chi_coupling();
    let m = [
        [(p.kappa1 + 6.0 * p.kappa3) / (3.0 * p.rho_rot), chi / (6.0 * p.rho_rot)],
        [2.0 * chi / (3.0 * p.rho), (p.lambda + 2.0 * p.mu) / p.rho],
    ];
    let (ve2, vr2) = (m[1][1], m[0][0]);
    let v_chi_sq = m[0][1];
    let disc = discriminant_closed(ve2, vr2, v_chi_sq, p.rho_rot / p.rho);
    let sq = disc.sqrt();
    let sum = ve2 + vr2;
    let v4_sq = 0.5 * (sum + sq);
    // Product of the roots is det M; avoids cancellation in the small root.
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let v3_sq = if v4_sq > 0.0 { det / v4_sq } else { 0.5 * (sum - sq) };
    let v0 = if p.mu_c > 0.0 { (p.lambda * p.lambda / (p.rho * p.mu_c) + ve2).sqrt() } else { f64::INFINITY };
    Ok(DerivedWaveQuantities {
        m,
        v_elas: ve2.sqrt(),
        v_rot: vr2.sqrt(),
        v_chi_sq,
        m_sq: (p.lambda + p.mu + p.mu_c) / p.rho_rot,
        m0_sq: p.mu_c / p.rho_rot,
        v0,
        v4_sq,
        v3_sq,
    })
}

/// `(v_e² - v_r²)² + 16 (ρ_rot/ρ) v_χ⁴`.
fn discriminant_closed(ve2: f64, vr2: f64, v_chi_sq: f64, ratio: f64) -> f64 {
    (ve2 - vr2).powi(2) + 16.0 * ratio * v_chi_sq * v_chi_sq
}

/// Both sides of the discriminant identity: the literal
/// `(v_e² + v_r²)² - 4(v_e² v_r² - M12 M21)` and the closed form.
pub fn discriminant_pair(p: &MaterialParams) -> Result<(f64, f64)> {
    let d = derive(p)?;
    let (ve2, vr2) = (d.m[1][1], d.m[0][0]);
    let literal = (ve2 + vr2).powi(2) - 4.0 * (ve2 * vr2 - d.m[0][1] * d.m[1][0]);
    Ok((literal, discriminant_closed(ve2, vr2, d.v_chi_sq, p.rho_rot / p.rho)))
}

/// `b(v)`, singular at `v = v_elas`.
pub fn b_of_v(p: &MaterialParams, v: f64) -> Result<f64> {
    let d = derive(p)?;
    let gap = v * v - d.v_elas * d.v_elas;
    if gap.abs() <= POLE_TOL * (v * v).max(d.v_elas * d.v_elas) {
        return Err(Error::Pole { speed: v, what: "b(v) at v = v_elas" });
    }
    Ok(-(p.lambda * p.lambda / (p.rho * gap) + p.lambda + p.mu) / p.rho_rot)
}

/// Which root of the quartic a pole belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleRoot {
    V3,
    V4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KValue {
    Defined { k: f64 },
    /// `k² < 0`: no real travelling kink at this speed.
    Forbidden,
    Pole { root: PoleRoot },
}

impl KValue {
    pub fn value(&self) -> Option<f64> {
        match *self {
            KValue::Defined { k } => Some(k),
            _ => None,
        }
    }
}

/// `λ² + μc ρ (v_e² - v²)`, evaluated as `ρ μc (v0 - v)(v0 + v)` so the zero
/// at `v0` is exact.
fn numerator(p: &MaterialParams, d: &DerivedWaveQuantities, v: f64) -> f64 {
    if d.v0.is_finite() {
        p.rho * p.mu_c * (d.v0 - v) * (d.v0 + v)
    } else {
        p.lambda * p.lambda
    }
}

fn classify_quartic(d: &DerivedWaveQuantities, v: f64) -> std::result::Result<f64, PoleRoot> {
    let q = d.quartic(v);
    let scale = (v * v).max(d.v4_sq.abs()).powi(2).max(d.det().abs());
    if q.abs() <= POLE_TOL * scale {
        let root = if (v * v - d.v4_sq).abs() <= (v * v - d.v3_sq).abs() { PoleRoot::V4 } else { PoleRoot::V3 };
        return Err(root);
    }
    Ok(q)
}

/// `k(v) = sqrt(N / (ρ ρ_rot Q))` with `N` the numerator above and `Q` the
/// quartic.
pub fn k_of_v(p: &MaterialParams, v: f64) -> Result<KValue> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("v = {v} must be finite and non-negative")));
    }
    let d = derive(p)?;
    k_from_derived(p, &d, v)
}

pub(crate) fn k_from_derived(p: &MaterialParams, d: &DerivedWaveQuantities, v: f64) -> Result<KValue> {
    let q = match classify_quartic(d, v) {
        Ok(q) => q,
        Err(root) => return Ok(KValue::Pole { root }),
    };
    let k_sq = numerator(p, d, v) / (p.rho * p.rho_rot * q);
    Ok(if k_sq >= 0.0 { KValue::Defined { k: k_sq.sqrt() } } else { KValue::Forbidden })
}

/// `k` through `b(v)`: `k² = (v_e² - v²)(m² + b) / Q`.
pub fn k_via_b(p: &MaterialParams, v: f64) -> Result<KValue> {
    let d = derive(p)?;
    let b = b_of_v(p, v)?;
    let q = match classify_quartic(&d, v) {
        Ok(q) => q,
        Err(root) => return Ok(KValue::Pole { root }),
    };
    let k_sq = (d.v_elas * d.v_elas - v * v) * (d.m_sq + b) / q;
    Ok(if k_sq >= 0.0 { KValue::Defined { k: k_sq.sqrt() } } else { KValue::Forbidden })
}

/// Wavenumber of the linearised theory, `k0² = (v_e² - v²) m0² / Q`.
pub fn k0(p: &MaterialParams, v: f64) -> Result<KValue> {
    let d = derive(p)?;
    let q = match classify_quartic(&d, v) {
        Ok(q) => q,
        Err(root) => return Ok(KValue::Pole { root }),
    };
    let k_sq = (d.v_elas * d.v_elas - v * v) * d.m0_sq / q;
    Ok(if k_sq >= 0.0 { KValue::Defined { k: k_sq.sqrt() } } else { KValue::Forbidden })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    A,
    B,
    C,
    D,
}

impl Regime {
    pub fn letter(&self) -> &'static str {
        match self {
            Regime::A => "a",
            Regime::B => "b",
            Regime::C => "c",
            Regime::D => "d",
        }
    }
}

/// A velocity interval; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        (v > self.lo || (self.lo_closed && v == self.lo)) && (v < self.hi || (self.hi_closed && v == self.hi))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub regime: Regime,
    /// `|v0 - v4| < 1e-9`; reported as regime a.
    pub boundary: bool,
    pub v0: f64,
    pub v3: Option<f64>,
    pub v4: f64,
    pub v_elas: f64,
    pub v_rot: f64,
    pub allowed_intervals: Vec<Interval>,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn is_allowed(&self, v: f64) -> bool {
        self.allowed_intervals.iter().any(|i| i.contains(v))
    }
}

pub fn classify(p: &MaterialParams) -> Result<ClassificationReport> {
    let d = derive(p)?;
    let v3 = d.v3();
    let v4 = d.v4();
    let mut notes = Vec::new();
    let boundary = d.v0.is_finite() && (d.v0 - v4).abs() < BOUNDARY_TOL;
    let regime = if p.chi_coupling().abs() <= DIAGONAL_TOL {
        if (d.v_elas - d.v_rot).abs() < DEGENERATE_TOL {
            Regime::D
        } else {
            Regime::C
        }
    } else if d.v0 > v4 || boundary {
        Regime::A
    } else {
        Regime::B
    };
    if boundary {
        notes.push("v0 coincides with v4 within 1e-9; labelled a".into());
    }
    if !d.v0.is_finite() {
        notes.push("mu_c = 0: v0 is infinite".into());
    }
    if p.lambda == 0.0 {
        notes.push("lambda = 0: v0 equals v_elas".into());
    }
    if v3.is_none() {
        notes.push("det M < 0: the smaller root in v^2 is negative, no pole below v4".into());
    }

    let mut cuts = vec![0.0, v4];
    cuts.extend(v3.filter(|&x| x > 0.0));
    if d.v0.is_finite() {
        cuts.push(d.v0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= BOUNDARY_TOL * b.abs().max(1.0));
    cuts.push(f64::INFINITY);

    let closed_at = |v: f64| v == 0.0 || matches!(k_from_derived(p, &d, v), Ok(KValue::Defined { .. }));
    let mut intervals: Vec<Interval> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo + 1.0 };
        let sampled = matches!(k_from_derived(p, &d, mid)?, KValue::Defined { .. });
        let analytic = numerator(p, &d, mid) * d.quartic(mid) >= 0.0;
        if sampled != analytic {
            notes.push(format!("sampled and analytic signs disagree at v = {mid}"));
        }
        if !sampled {
            continue;
        }
        let next = Interval { lo, hi, lo_closed: closed_at(lo), hi_closed: hi.is_finite() && closed_at(hi) };
        match intervals.last_mut() {
            Some(prev) if prev.hi == lo && prev.hi_closed => prev.hi = hi,
            _ => intervals.push(next),
        }
        if let Some(last) = intervals.last_mut() {
            last.hi_closed = next.hi_closed;
        }
    }

    Ok(ClassificationReport {
        regime,
        boundary,
        v0: d.v0,
        v3,
        v4,
        v_elas: d.v_elas,
        v_rot: d.v_rot,
        allowed_intervals: intervals,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRoots {
    pub v3_approx: f64,
    pub v4_approx: f64,
    /// `(ρ_rot/ρ) v_χ⁴ / (v_e² - v_r²)²`.
    pub validity: f64,
    pub v3_exact: Option<f64>,
    pub v4_exact: f64,
}

/// First-order expansion of the positive roots in the small coupling limit.
pub fn approx_roots(p: &MaterialParams) -> Result<ApproxRoots> {
    let d = derive(p)?;
    let (ve2, vr2) = (d.v_elas * d.v_elas, d.v_rot * d.v_rot);
    let gap = ve2 - vr2;
    if gap.abs() <= DEGENERATE_TOL * ve2.max(vr2) {
        return Err(Error::InvalidArgument("v_elas = v_rot: root expansion is not valid".into()));
    }
    let ratio = p.rho_rot / p.rho;
    let chi4 = d.v_chi_sq * d.v_chi_sq;
    Ok(ApproxRoots {
        v3_approx: d.v_rot * (1.0 - 2.0 * ratio * chi4 / (gap * vr2)),
        v4_approx: d.v_elas * (1.0 + 2.0 * ratio * chi4 / (gap * ve2)),
        validity: ratio * chi4 / (gap * gap),
        v3_exact: d.v3(),
        v4_exact: d.v4(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaleCheck {
    /// `k (z - v t)`.
    pub direct: f64,
    /// `sqrt(mass² / (1 - v̂²)) (ẑ - v̂ t)`.
    pub rescaled: f64,
    pub residual: f64,
}

fn rescale_check(p: &MaterialParams, v: f64, z: f64, t: f64, linearised: bool) -> Result<RescaleCheck> {
    let d = derive(p)?;
    let b = b_of_v(p, v)?;
    let ve2 = d.v_elas * d.v_elas;
    let s_sq = d.v_rot * d.v_rot + d.m[0][1] * d.m[1][0] / (v * v - ve2);
    if !(s_sq > 0.0) {
        return Err(Error::Forbidden { speed: v, detail: format!("rescale factor squared {s_sq} <= 0") });
    }
    let s = s_sq.sqrt();
    let (z_hat, v_hat) = (z / s, v / s);
    let one_minus = 1.0 - v_hat * v_hat;
    if !(one_minus > 0.0) {
        return Err(Error::Forbidden { speed: v, detail: format!("1 - v_hat^2 = {one_minus} <= 0") });
    }
    let (mass_sq, k) = if linearised { (d.m0_sq, k0(p, v)?) } else { (d.m_sq + b, k_from_derived(p, &d, v)?) };
    let Some(k) = k.value() else {
        return Err(Error::Forbidden { speed: v, detail: "k undefined".into() });
    };
    if mass_sq < 0.0 {
        return Err(Error::Forbidden { speed: v, detail: format!("mass term {mass_sq} < 0") });
    }
    let direct = k * (z - v * t);
    let rescaled = (mass_sq / one_minus).sqrt() * (z_hat - v_hat * t);
    Ok(RescaleCheck { direct, rescaled, residual: (direct - rescaled).abs() })
}

/// Compares the travelling-wave phase in original and rescaled variables.
pub fn rescale_roundtrip(p: &MaterialParams, v: f64, z: f64, t: f64) -> Result<RescaleCheck> {
    rescale_check(p, v, z, t, false)
}

/// As [`rescale_roundtrip`] with the linearised mass `m0²` and `k0`.
pub fn rescale_roundtrip_linearised(p: &MaterialParams, v: f64, z: f64, t: f64) -> Result<RescaleCheck> {
    rescale_check(p, v, z, t, true)
}

/// Prefactors of the two terms of the displacement profile:
/// `c1 = 16 ρ_rot v_χ² / (ρ (v² - v_e²))`, `c2 = 4λ / (ρ k (v² - v_e²))`.
pub fn amplitude_coefficients(p: &MaterialParams, v: f64) -> Result<(f64, f64)> {
    let d = derive(p)?;
    let gap = v * v - d.v_elas * d.v_elas;
    if gap.abs() <= POLE_TOL * (v * v).max(d.v_elas * d.v_elas) {
        return Err(Error::Pole { speed: v, what: "amplitude at v = v_elas" });
    }
    let k = match k_from_derived(p, &d, v)? {
        KValue::Defined { k } if k > 0.0 => k,
        KValue::Defined { .. } => return Err(Error::Pole { speed: v, what: "c2 at k = 0" }),
        KValue::Pole { .. } => return Err(Error::Pole { speed: v, what: "k(v) pole" }),
        KValue::Forbidden => return Err(Error::Forbidden { speed: v, detail: "k^2 < 0".into() }),
    };
    let c1 = 16.0 * p.rho_rot * d.v_chi_sq / (p.rho * gap);
    let c2 = 4.0 * p.lambda / (p.rho * k * gap);
    Ok((c1, c2))
}

/// A random admissible parameter set with moduli of order one.
pub fn random_admissible(rng: &mut impl Rng) -> MaterialParams {
    loop {
        let p = MaterialParams {
            kappa1: rng.random_range(0.05..5.0),
            kappa2: rng.random_range(0.0..2.0),
            kappa3: rng.random_range(0.0..2.0),
            chi1: rng.random_range(-2.0..2.0),
            chi3: rng.random_range(-2.0..2.0),
            rho: rng.random_range(0.05..2.0),
            rho_rot: rng.random_range(0.05..2.0),
            mu_c: rng.random_range(0.0..3.0),
            lambda: rng.random_range(-0.5..5.0),
            mu: rng.random_range(0.05..3.0),
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const A: MaterialParams = MaterialParams::TYPE_A;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_roots() {
        let c = derive(&MaterialParams::TYPE_C).unwrap();
        assert!(close(c.v4(), 4.47214, 1e-5) && close(c.v_elas, 4.47214, 1e-5));
        assert!(close(c.v3().unwrap(), 3.51188, 1e-5) && close(c.v_rot, 3.51188, 1e-5));
        let d = derive(&MaterialParams::TYPE_D).unwrap();
        for r in [d.v3().unwrap(), d.v4(), d.v_elas, d.v_rot] {
            assert!(close(r, 4.47214, 1e-5));
        }
    }

    #[test]
    fn type_a_numbers() {
        let d = derive(&A).unwrap();
        assert!(close(d.m[0][0], 37.0 / 3.0, 1e-12));
        assert!(close(d.m[0][1], 1.4 / 0.6, 1e-12));
        assert!(close(d.m[1][0], 2.8 / 0.3, 1e-12));
        assert!(close(d.m[1][1], 20.0, 1e-12));
        assert!(close(d.v0, 7.302967, 1e-6));
        assert!(close(d.v3().unwrap(), 3.182364, 1e-6));
        assert!(close(d.v4(), 4.712313, 1e-6));
        assert!(close(d.m_sq, 18.0, 1e-12));
        assert!(close(d.m0_sq, 3.0, 1e-12));
    }

    #[test]
    fn zero_couple_modulus() {
        let d = derive(&MaterialParams { mu_c: 0.0, ..A }).unwrap();
        assert!(d.v0.is_infinite());
    }

    #[test]
    fn b_examples() {
        let p = MaterialParams { lambda: 0.0, mu: 0.5, rho_rot: 0.1, ..A };
        for v in [0.0, 0.3, 2.0, 9.0] {
            assert!(close(b_of_v(&p, v).unwrap(), -5.0, 1e-12));
        }
        assert!(close(b_of_v(&A, 1e8).unwrap(), -(A.lambda + A.mu) / A.rho_rot, 1e-9));
        let ve = derive(&A).unwrap().v_elas;
        assert!(matches!(b_of_v(&A, ve), Err(Error::Pole { .. })));
        // At v0 the mass term m² + b vanishes.
        let d = derive(&A).unwrap();
        assert!((d.m_sq + b_of_v(&A, d.v0).unwrap()).abs() < 1e-12);
        assert!(close(d.m_sq + b_of_v(&A, 0.1).unwrap(), 8.002501, 1e-6));
    }

    #[test]
    fn k_examples() {
        let d = derive(&A).unwrap();
        assert_eq!(k_of_v(&A, d.v0).unwrap(), KValue::Defined { k: 0.0 });
        let mid = 0.5 * (d.v3().unwrap() + d.v4());
        assert_eq!(k_of_v(&A, mid).unwrap(), KValue::Forbidden);
        let direct = k_of_v(&A, 0.0).unwrap().value().unwrap();
        let via_b = k_via_b(&A, 0.0).unwrap().value().unwrap();
        assert!((direct - via_b).abs() < 1e-12 * direct);
        assert!(close(k_of_v(&A, 0.1).unwrap().value().unwrap(), 0.8440100, 1e-7));
        assert!(matches!(k_of_v(&A, d.v4()).unwrap(), KValue::Pole { root: PoleRoot::V4 }));
        assert!(matches!(k_of_v(&A, d.v3().unwrap()).unwrap(), KValue::Pole { root: PoleRoot::V3 }));
        assert!(k_of_v(&A, -1.0).is_err());
    }

    // The first printed line of the dispersion formula, transcribed literally.
    fn k_literal(p: &MaterialParams, v: f64) -> f64 {
        let e = p.lambda + 2.0 * p.mu - v * v * p.rho;
        let num = p.lambda * p.lambda + e * p.mu_c;
        let den = 3.0 * e * (p.kappa1 + 6.0 * p.kappa3) - 9.0 * v * v * p.rho_rot * e - p.chi_coupling().powi(2);
        3.0 * (num / den).sqrt()
    }

    #[test]
    fn matches_literal_formula() {
        for v in [0.0, 0.1, 1.0, 3.0, 5.0, 7.0] {
            let k = k_of_v(&A, v).unwrap().value().unwrap();
            assert!((k - k_literal(&A, v)).abs() < 1e-12 * k.max(1.0), "v = {v}");
        }
    }

    #[test]
    fn classification_examples() {
        let a = classify(&A).unwrap();
        assert_eq!(a.regime, Regime::A);
        assert!(a.v0 > a.v4);
        let v3 = a.v3.unwrap();
        assert_eq!(
            a.allowed_intervals,
            vec![
                Interval { lo: 0.0, hi: v3, lo_closed: true, hi_closed: false },
                Interval { lo: a.v4, hi: a.v0, lo_closed: false, hi_closed: true },
            ]
        );
        assert_eq!(classify(&MaterialParams::TYPE_C).unwrap().regime, Regime::C);
        assert_eq!(classify(&MaterialParams::TYPE_D).unwrap().regime, Regime::D);
        // The second reference set stays in regime a.
        assert_eq!(classify(&MaterialParams::TYPE_B).unwrap().regime, Regime::A);
        let b = classify(&MaterialParams { mu_c: 10.0, ..A }).unwrap();
        assert_eq!(b.regime, Regime::B);
        assert_eq!(
            b.allowed_intervals,
            vec![
                Interval { lo: 0.0, hi: b.v3.unwrap(), lo_closed: true, hi_closed: false },
                Interval { lo: b.v0, hi: b.v4, lo_closed: true, hi_closed: false },
            ]
        );
        let zero = classify(&MaterialParams { lambda: 0.0, ..A }).unwrap();
        assert_eq!(zero.v0, zero.v_elas);
        assert!(!zero.notes.is_empty());
        let inf = classify(&MaterialParams { mu_c: 0.0, ..A }).unwrap();
        assert_eq!(inf.regime, Regime::A);
        assert_eq!(inf.allowed_intervals.last().unwrap().hi, f64::INFINITY);
    }

    #[test]
    fn boundary_case_flagged() {
        // Choose mu_c so that v0 = v4 exactly.
        let d = derive(&A).unwrap();
        let mu_c = A.lambda * A.lambda / (A.rho * (d.v4_sq - d.v_elas * d.v_elas));
        let r = classify(&MaterialParams { mu_c, ..A }).unwrap();
        assert!(r.boundary);
        assert_eq!(r.regime, Regime::A);
    }

    fn approx_error(eps: f64) -> f64 {
        // Scale the coupling so the validity parameter hits `eps`.
        let base = approx_roots(&A).unwrap().validity;
        let s = (eps / base).sqrt();
        let p = MaterialParams { chi1: A.chi1 * s, chi3: A.chi3 * s, ..A };
        let r = approx_roots(&p).unwrap();
        assert!((r.validity - eps).abs() < 1e-12 * eps.max(1e-300) + 1e-15);
        (r.v4_approx - r.v4_exact).abs().max((r.v3_approx - r.v3_exact.unwrap()).abs())
    }

    #[test]
    fn approx_roots_second_order() {
        let ratio = approx_error(1e-3) / approx_error(5e-4);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        let coarse = approx_error(0.1) / approx_error(0.05);
        assert!(coarse > 3.0 && coarse < 4.0, "{coarse}");
        let c = approx_roots(&MaterialParams::TYPE_C).unwrap();
        assert_eq!(c.validity, 0.0);
        assert!(close(c.v4_approx, c.v4_exact, 1e-14) && close(c.v3_approx, c.v3_exact.unwrap(), 1e-14));
        assert!(approx_roots(&MaterialParams::TYPE_D).is_err());
    }

    #[test]
    fn rescale_examples() {
        assert!(rescale_roundtrip(&A, 0.0, 1.3, 4.0).unwrap().residual < 1e-12);
        for z in [-5.0, 0.0, 2.5] {
            for t in [0.0, 1.0, 7.0] {
                assert!(rescale_roundtrip(&A, 0.1, z, t).unwrap().residual < 1e-10);
            }
        }
        let tiny = MaterialParams { lambda: 1e-8, mu: 1e-8, ..A };
        let full = rescale_roundtrip(&tiny, 0.1, 2.0, 1.0).unwrap();
        let lin = rescale_roundtrip_linearised(&tiny, 0.1, 2.0, 1.0).unwrap();
        assert!(lin.residual < 1e-12);
        assert!((full.direct - lin.direct).abs() < 1e-6);
    }

    #[test]
    fn amplitude_examples() {
        let (c1, _) = amplitude_coefficients(&MaterialParams::TYPE_C, 0.1).unwrap();
        assert_eq!(c1, 0.0);
        let (_, c2) = amplitude_coefficients(&MaterialParams { lambda: 0.0, ..A }, 0.1).unwrap();
        assert_eq!(c2, 0.0);
        let (c1, c2) = amplitude_coefficients(&A, 0.1).unwrap();
        assert!(c1.is_finite() && c2.is_finite());
        let d = derive(&A).unwrap();
        assert!(close(c1, 4.0 * d.m[1][0] / (0.01 - 20.0), 1e-12));
    }

    #[test]
    fn linearised_limit_monotone() {
        // Small λ, μ push v_elas to zero, so the speeds are chosen to stay
        // in an allowed interval along the whole sequence.
        for (base, v) in [(A, 2.0), (MaterialParams::TYPE_C, 0.0)] {
            let mut last = f64::INFINITY;
            for n in 1..9 {
                let eps = 10f64.powi(-n);
                let p = MaterialParams { lambda: eps, mu: eps, ..base };
                let k = k_of_v(&p, v).unwrap().value().unwrap();
                let k0 = k0(&p, v).unwrap().value().unwrap();
                let gap = (k - k0).abs();
                assert!(gap < last || gap == 0.0, "n = {n}: {gap} vs {last}");
                last = gap;
            }
            assert!(last < 1e-7);
        }
    }

    #[test]
    fn random_discriminant_and_bracketing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = random_admissible(&mut rng);
            let (lit, closed) = discriminant_pair(&p).unwrap();
            assert!((lit - closed).abs() <= 1e-10 * closed.abs().max(1e-300), "{p:?}");
            let d = derive(&p).unwrap();
            let (lo, hi) = (d.v_elas.min(d.v_rot), d.v_elas.max(d.v_rot));
            assert!(d.v3_sq <= lo * lo * (1.0 + 1e-12));
            assert!(hi * hi <= d.v4_sq * (1.0 + 1e-12));
        }
    }

    proptest! {
        #[test]
        fn dual_formula_agrees(v in 0.0f64..12.0) {
            match (k_of_v(&A, v).unwrap(), k_via_b(&A, v)) {
                (KValue::Defined { k }, Ok(KValue::Defined { k: kb })) => prop_assert!((k - kb).abs() <= 1e-9 * k.max(1.0)),
                (KValue::Forbidden, Ok(KValue::Forbidden)) | (_, Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }

        #[test]
        fn root_symmetry(seed in 0u64..500) {
            let p = random_admissible(&mut ChaCha8Rng::seed_from_u64(seed));
            let d = derive(&p).unwrap();
            if let Some([v1, v2, v3, v4]) = d.roots() {
                prop_assert_eq!(v1, -v4);
                prop_assert_eq!(v2, -v3);
                prop_assert!(v1 <= v2 && v3 <= v4);
            }
        }
    }
}
