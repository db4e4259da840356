//! Method-of-lines integration of the coupled rotation/displacement system
//! and of the scalar double sine-Gordon equation.
//!
//! Space is discretised with second-order central differences on a uniform
//! grid; time stepping is velocity Verlet (default) or classical RK4.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dispersion;
use crate::energy::reduced::{self, displacement_static, rotational_static, Jet2};
use crate::energy::trapezoid;
use crate::error::{Error, Result};
use crate::params::MaterialParams;
use crate::tensor::{derivative, Boundary};
use crate::soliton::{psi_quadrature_with, DsgKink, IntegrationConstant, SolitonSolution};

pub const MIN_POINTS: usize = 16;

/// Courant factor of the automatic time step.
pub const CFL_FACTOR: f64 = 0.4;

/// Any field exceeding this magnitude aborts the run.
const BLOW_UP: f64 = 1e12;

/// Grid values of both fields and their time derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub z0: f64,
    pub h: f64,
    pub t: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi_t: Vec<f64>,
    pub psi_t: Vec<f64>,
}

impl FieldState {
    pub fn new(z0: f64, h: f64, t: f64, phi: Vec<f64>, psi: Vec<f64>, phi_t: Vec<f64>, psi_t: Vec<f64>) -> Result<Self> {
        let s = FieldState { z0, h, t, phi, psi, phi_t, psi_t };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.phi.len();
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("n = {n} < {MIN_POINTS}")));
        }
        if !(self.h > 0.0 && self.h.is_finite() && self.z0.is_finite() && self.t.is_finite()) {
            return Err(Error::InvalidGrid(format!("h = {} must be positive and finite", self.h)));
        }
        for (name, a) in [("psi", &self.psi), ("phi_t", &self.phi_t), ("psi_t", &self.psi_t)] {
            if a.len() != n {
                return Err(Error::InvalidGrid(format!("{name} has {} samples, phi has {n}", a.len())));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("field state"));
        }
        Ok(())
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

    fn is_finite(&self) -> bool {
        [&self.phi, &self.psi, &self.phi_t, &self.psi_t].iter().all(|a| a.iter().all(|x| x.is_finite()))
    }

    fn max_abs(&self) -> f64 {
        [&self.phi, &self.psi, &self.phi_t, &self.psi_t]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// Samples a soliton of the coupled system on `n` points spanning
    /// `[z_min, z_max]`.
    ///
    /// The displacement carries the background strain, which makes the
    /// kink an exact travelling wave of the coupled equations.
    pub fn from_soliton(sol: &SolitonSolution, z_min: f64, z_max: f64, n: usize, t: f64) -> Result<Self> {
        Self::from_soliton_with(sol, z_min, z_max, n, t, IntegrationConstant::Prestrained)
    }

    /// As [`Self::from_soliton`] with a chosen displacement constant.
    pub fn from_soliton_with(
        sol: &SolitonSolution,
        z_min: f64,
        z_max: f64,
        n: usize,
        t: f64,
        constant: IntegrationConstant,
    ) -> Result<Self> {
        let h = grid_step(z_min, z_max, n)?;
        let z: Vec<f64> = (0..n).map(|k| z_min + k as f64 * h).collect();
        let disp = psi_quadrature_with(sol, &z, t, constant)?;
        let jets: Vec<_> = z.iter().map(|&zi| sol.phi_jet(zi, t)).collect();
        FieldState::new(
            z_min,
            h,
            t,
            jets.iter().map(|j| j.v).collect(),
            disp.psi,
            jets.iter().map(|j| -sol.v * j.d1).collect(),
            disp.psi_z.iter().map(|p| -sol.v * p).collect(),
        )
    }

    /// Double sine-Gordon kink with a zero displacement field.
    pub fn from_dsg(kink: &DsgKink, z_min: f64, z_max: f64, n: usize, t: f64) -> Result<Self> {
        let h = grid_step(z_min, z_max, n)?;
        let mut phi = Vec::with_capacity(n);
        let mut phi_t = Vec::with_capacity(n);
        for k in 0..n {
            let z = z_min + k as f64 * h;
            let j = crate::soliton::kink_profile(crate::jet::Jet::var(kink.theta(z, t)), kink.r);
            phi.push(j.v);
            phi_t.push(-kink.kappa * kink.v_hat * j.d1);
        }
        FieldState::new(z_min, h, t, phi, vec![0.0; n], phi_t, vec![0.0; n])
    }
}

fn grid_step(z_min: f64, z_max: f64, n: usize) -> Result<f64> {
    if n < MIN_POINTS {
        return Err(Error::InvalidGrid(format!("n = {n} < {MIN_POINTS}")));
    }
    if !(z_min.is_finite() && z_max.is_finite() && z_max > z_min) {
        return Err(Error::InvalidGrid(format!("need z_min < z_max, got [{z_min}, {z_max}]")));
    }
    Ok((z_max - z_min) / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeStep {
    /// `CFL_FACTOR · h / sqrt(largest eigenvalue of M)`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimBoundary {
    /// End values keep their initial velocity (zero acceleration).
    #[default]
    ClampedAsymptotic,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum System {
    Coupled,
    Dsg { m_sq: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: TimeStep,
    pub boundary: SimBoundary,
    pub record_every: usize,
    pub system: System,
    pub scheme: Scheme,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_end: 10.0,
            dt: TimeStep::Auto,
            boundary: SimBoundary::ClampedAsymptotic,
            record_every: 500,
            system: System::Coupled,
            scheme: Scheme::Leapfrog,
        }
    }
}

impl SimConfig {
    /// Largest stable-by-design step for grid spacing `h`.
    pub fn auto_dt(&self, params: &MaterialParams, h: f64) -> Result<f64> {
        let speed_sq = match self.system {
            System::Coupled => dispersion::derive(params)?.max_eigenvalue(),
            System::Dsg { .. } => 1.0,
        };
        Ok(CFL_FACTOR * h / speed_sq.sqrt())
    }

    /// Step size and step count; the step is shrunk so that it divides
    /// `t_end` exactly.
    pub fn resolve_dt(&self, params: &MaterialParams, h: f64) -> Result<(f64, usize)> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end = {} must be finite and >= 0", self.t_end)));
        }
        let target = match self.dt {
            TimeStep::Auto => self.auto_dt(params, h)?,
            TimeStep::Fixed(dt) if dt > 0.0 && dt.is_finite() => dt,
            TimeStep::Fixed(dt) => return Err(Error::InvalidArgument(format!("dt = {dt} must be positive"))),
        };
        if self.t_end == 0.0 {
            return Ok((target, 0));
        }
        let steps = (self.t_end / target).ceil().max(1.0) as usize;
        Ok((self.t_end / steps as f64, steps))
    }
}

struct Stencil {
    periodic: bool,
    inv_2h: f64,
    inv_h2: f64,
}

impl Stencil {
    fn new(h: f64, boundary: SimBoundary) -> Self {
        Stencil { periodic: boundary == SimBoundary::Periodic, inv_2h: 0.5 / h, inv_h2: 1.0 / (h * h) }
    }

    /// First and second central differences at `i`, or `None` at a clamped
    /// end.
    #[inline]
    fn at(&self, f: &[f64], i: usize) -> Option<(f64, f64)> {
        let n = f.len();
        let (l, r) = if i == 0 || i == n - 1 {
            if !self.periodic {
                return None;
            }
            ((i + n - 1) % n, (i + 1) % n)
        } else {
            (i - 1, i + 1)
        };
        Some(((f[r] - f[l]) * self.inv_2h, (f[r] - 2.0 * f[i] + f[l]) * self.inv_h2))
    }
}

/// Accelerations of the coupled system,
/// `ρ_rot φ_tt = rotational_static`, `ρ ψ_tt = -displacement_static`.
pub fn rhs_coupled(params: &MaterialParams, state: &FieldState, boundary: SimBoundary) -> (Vec<f64>, Vec<f64>) {
    let n = state.len();
    let mut a_phi = vec![0.0; n];
    let mut a_psi = vec![0.0; n];
    rhs_coupled_into(params, &state.phi, &state.psi, state.h, boundary, &mut a_phi, &mut a_psi);
    (a_phi, a_psi)
}

fn rhs_coupled_into(
    p: &MaterialParams,
    phi: &[f64],
    psi: &[f64],
    h: f64,
    boundary: SimBoundary,
    a_phi: &mut [f64],
    a_psi: &mut [f64],
) {
    let st = Stencil::new(h, boundary);
    let (inv_rot, inv_rho) = (1.0 / p.rho_rot, 1.0 / p.rho);
    for i in 0..phi.len() {
        let (Some((phi_z, phi_zz)), Some((psi_z, psi_zz))) = (st.at(phi, i), st.at(psi, i)) else {
            a_phi[i] = 0.0;
            a_psi[i] = 0.0;
            continue;
        };
        let j = Jet2 { phi: phi[i], phi_z, phi_zz, psi_z, psi_zz };
        a_phi[i] = rotational_static(p, &j) * inv_rot;
        a_psi[i] = -displacement_static(p, &j) * inv_rho;
    }
}

/// `φ_tt = φ_zz - m² sin φ - (b/2) sin 2φ`.
pub fn rhs_dsg(m_sq: f64, b: f64, state: &FieldState, boundary: SimBoundary) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    rhs_dsg_into(m_sq, b, &state.phi, state.h, boundary, &mut out);
    out
}

fn rhs_dsg_into(m_sq: f64, b: f64, phi: &[f64], h: f64, boundary: SimBoundary, out: &mut [f64]) {
    let st = Stencil::new(h, boundary);
    for i in 0..phi.len() {
        out[i] = match st.at(phi, i) {
            Some((_, phi_zz)) => phi_zz - m_sq * phi[i].sin() - 0.5 * b * (2.0 * phi[i]).sin(),
            None => 0.0,
        };
    }
}

/// Right-hand side evaluator with reusable buffers.
struct Integrator<'a> {
    params: &'a MaterialParams,
    config: &'a SimConfig,
    a_phi: Vec<f64>,
    a_psi: Vec<f64>,
}

impl<'a> Integrator<'a> {
    fn new(params: &'a MaterialParams, config: &'a SimConfig, n: usize) -> Self {
        Integrator { params, config, a_phi: vec![0.0; n], a_psi: vec![0.0; n] }
    }

    fn accel(&mut self, phi: &[f64], psi: &[f64], h: f64) {
        match self.config.system {
            System::Coupled => rhs_coupled_into(self.params, phi, psi, h, self.config.boundary, &mut self.a_phi, &mut self.a_psi),
            System::Dsg { m_sq, b } => {
                rhs_dsg_into(m_sq, b, phi, h, self.config.boundary, &mut self.a_phi);
                self.a_psi.iter_mut().for_each(|a| *a = 0.0);
            }
        }
    }

    fn leapfrog(&mut self, s: &mut FieldState, dt: f64) {
        let half = 0.5 * dt;
        self.accel(&s.phi, &s.psi, s.h);
        for i in 0..s.len() {
            s.phi_t[i] += half * self.a_phi[i];
            s.psi_t[i] += half * self.a_psi[i];
            s.phi[i] += dt * s.phi_t[i];
            s.psi[i] += dt * s.psi_t[i];
        }
        self.accel(&s.phi, &s.psi, s.h);
        for i in 0..s.len() {
            s.phi_t[i] += half * self.a_phi[i];
            s.psi_t[i] += half * self.a_psi[i];
        }
        s.t += dt;
    }

    fn rk4(&mut self, s: &mut FieldState, dt: f64) {
        let n = s.len();
        let x0 = [s.phi.clone(), s.psi.clone()];
        let v0 = [s.phi_t.clone(), s.psi_t.clone()];
        let mut kx = [[vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]], [vec![0.0; n], vec![0.0; n]]];
        let mut kv = kx.clone();
        let mut x = x0.clone();
        let mut v = v0.clone();
        for stage in 0..4 {
            self.accel(&x[0], &x[1], s.h);
            for f in 0..2 {
                kx[stage][f].copy_from_slice(&v[f]);
            }
            kv[stage][0].copy_from_slice(&self.a_phi);
            kv[stage][1].copy_from_slice(&self.a_psi);
            if stage < 3 {
                let c = if stage == 2 { dt } else { 0.5 * dt };
                for f in 0..2 {
                    for i in 0..n {
                        x[f][i] = x0[f][i] + c * kx[stage][f][i];
                        v[f][i] = v0[f][i] + c * kv[stage][f][i];
                    }
                }
            }
        }
        let w = dt / 6.0;
        for f in 0..2 {
            let (xs, vs) = if f == 0 { (&mut s.phi, &mut s.phi_t) } else { (&mut s.psi, &mut s.psi_t) };
            for i in 0..n {
                xs[i] = x0[f][i] + w * (kx[0][f][i] + 2.0 * kx[1][f][i] + 2.0 * kx[2][f][i] + kx[3][f][i]);
                vs[i] = v0[f][i] + w * (kv[0][f][i] + 2.0 * kv[1][f][i] + 2.0 * kv[2][f][i] + kv[3][f][i]);
            }
        }
        s.t += dt;
    }

    fn step(&mut self, s: &mut FieldState, dt: f64) {
        match self.config.scheme {
            Scheme::Leapfrog => self.leapfrog(s, dt),
            Scheme::Rk4 => self.rk4(s, dt),
        }
    }
}

/// One explicit step of size `dt` (negative steps integrate backwards).
pub fn step(state: &FieldState, config: &SimConfig, params: &MaterialParams, dt: f64) -> Result<FieldState> {
    let mut s = state.clone();
    Integrator::new(params, config, s.len()).step(&mut s, dt);
    check_stable(&s, 1)?;
    Ok(s)
}

fn check_stable(s: &FieldState, step: usize) -> Result<()> {
    if s.is_finite() && s.max_abs() <= BLOW_UP {
        Ok(())
    } else {
        Err(Error::NumericalInstability { step, t: s.t })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub index: usize,
    pub step: usize,
    pub state: FieldState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationMetrics {
    /// Largest `‖φ - φ_ref‖ / ‖φ_ref‖` (discrete L2) over recorded snapshots;
    /// NaN without a reference.
    pub l2_shape_error: f64,
    /// Final `φ = π` crossing, NaN when absent.
    pub center_position: f64,
    /// Slope of the least-squares line through the crossing positions.
    pub measured_speed: f64,
    /// Largest `|E(t) - E(0)| / |E(0)|` over recorded snapshots.
    pub energy_drift: f64,
    pub initial_energy: f64,
    pub dt: f64,
    pub steps: usize,
    /// `(t, crossing)` at every step where a crossing exists.
    #[serde(skip)]
    pub centers: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    pub metrics: PropagationMetrics,
}

/// `φ = π` crossing by linear interpolation; the first sign change from
/// the left.
pub fn pi_crossing(s: &FieldState) -> Option<f64> {
    s.phi.windows(2).enumerate().find_map(|(i, w)| {
        let (a, b) = (w[0] - PI, w[1] - PI);
        if a == 0.0 {
            Some(s.z(i))
        } else if a * b < 0.0 || b == 0.0 {
            Some(s.z(i) + s.h * a / (a - b))
        } else {
            None
        }
    })
}

/// Total discrete energy: reduced potential and kinetic densities for the
/// coupled system, the scalar double sine-Gordon energy otherwise.
///
/// The reduced densities are used rather than the matrix forms because the
/// pre-strained travelling wave may have `1 + ψ_z <= 0` in its tails, where
/// the polar decomposition of the deformation gradient does not exist.
pub fn total_energy(params: &MaterialParams, system: System, s: &FieldState) -> f64 {
    let phi_z = derivative(&s.phi, s.h, Boundary::OneSided);
    let density: Vec<f64> = match system {
        System::Coupled => {
            let psi_z = derivative(&s.psi, s.h, Boundary::OneSided);
            (0..s.len())
                .map(|i| reduced::potential(params, s.phi[i], phi_z[i], psi_z[i]) + reduced::kinetic(params, s.phi_t[i], s.psi_t[i]))
                .collect()
        }
        System::Dsg { m_sq, b } => (0..s.len())
            .map(|i| {
                let f = s.phi[i];
                0.5 * s.phi_t[i] * s.phi_t[i] + 0.5 * phi_z[i] * phi_z[i] + m_sq * (1.0 - f.cos()) + 0.5 * b * f.sin().powi(2)
            })
            .collect(),
    };
    trapezoid(&density, s.h)
}

fn relative_l2(s: &FieldState, reference: &dyn Fn(f64, f64) -> f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &f) in s.phi.iter().enumerate() {
        let r = reference(s.z(i), s.t);
        num += (f - r) * (f - r);
        den += r * r;
    }
    if den == 0.0 { num.sqrt() } else { (num / den).sqrt() }
}

fn linear_fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let (mt, mz) = points.iter().fold((0.0, 0.0), |(a, b), &(t, z)| (a + t / n, b + z / n));
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(t, z)| (a + (t - mt) * (z - mz), b + (t - mt) * (t - mt)));
    num / den
}

/// Integrates to `t_end`, recording every `record_every` steps plus the
/// final state. `reference(z, t)` is the expected rotation profile.
pub fn run(
    initial: &FieldState,
    config: &SimConfig,
    params: &MaterialParams,
    reference: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<RunOutput> {
    initial.validate()?;
    if config.system == System::Coupled {
        params.validate()?;
    }
    if config.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be >= 1".into()));
    }
    let (dt, steps) = config.resolve_dt(params, initial.h)?;
    let mut integ = Integrator::new(params, config, initial.len());
    let mut s = initial.clone();
    let t0 = s.t;
    let e0 = total_energy(params, config.system, &s);
    let mut drift: f64 = 0.0;
    let mut shape: f64 = reference.map_or(f64::NAN, |r| relative_l2(&s, r));
    let mut centers = Vec::with_capacity(steps + 1);
    if let Some(c) = pi_crossing(&s) {
        centers.push((s.t, c));
    }
    let mut snapshots = vec![Snapshot { index: 0, step: 0, state: s.clone() }];
    for k in 1..=steps {
        integ.step(&mut s, dt);
        // keep the clock exact instead of accumulating rounding
        s.t = t0 + k as f64 * dt;
        check_stable(&s, k)?;
        if let Some(c) = pi_crossing(&s) {
            centers.push((s.t, c));
        }
        if k % config.record_every == 0 || k == steps {
            let e = total_energy(params, config.system, &s);
            drift = drift.max(((e - e0) / e0).abs());
            if let Some(r) = reference {
                shape = shape.max(relative_l2(&s, r));
            }
            snapshots.push(Snapshot { index: snapshots.len(), step: k, state: s.clone() });
        }
    }
    let metrics = PropagationMetrics {
        l2_shape_error: shape,
        center_position: pi_crossing(&s).unwrap_or(f64::NAN),
        measured_speed: linear_fit_slope(&centers),
        energy_drift: drift,
        initial_energy: e0,
        dt,
        steps,
        centers,
    };
    Ok(RunOutput { snapshots, metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n: [usize; 3],
    pub dt: [f64; 3],
    /// `‖u_n - u_{2n-1}‖` and `‖u_{2n-1} - u_{4n-3}‖` on the coarse points.
    pub differences: [f64; 2],
    pub order: f64,
}

/// Runs on `n`, `2n - 1` and `4n - 3` points with `dt` halved each time and
/// compares `φ` and `ψ` at `t_end` on the shared coarse points.
pub fn self_convergence(
    build: &dyn Fn(usize) -> Result<FieldState>,
    n: usize,
    config: &SimConfig,
    params: &MaterialParams,
) -> Result<ConvergenceReport> {
    let sizes = [n, 2 * n - 1, 4 * n - 3];
    let coarse = build(n)?;
    let (dt0, steps0) = config.resolve_dt(params, coarse.h)?;
    let mut finals = Vec::with_capacity(3);
    let mut dts = [0.0; 3];
    for (level, &m) in sizes.iter().enumerate() {
        let init = build(m)?;
        let factor = 1usize << level;
        dts[level] = dt0 / factor as f64;
        let cfg = SimConfig {
            dt: TimeStep::Fixed(dts[level]),
            record_every: steps0.max(1) * factor,
            t_end: dts[level] * (steps0 * factor) as f64,
            ..*config
        };
        let out = run(&init, &cfg, params, None)?;
        finals.push(out.snapshots.last().map(|s| s.state.clone()).ok_or(Error::InvalidArgument("no snapshot".into()))?);
    }
    let diff = |a: &FieldState, b: &FieldState, stride: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let j = i * stride;
            acc += (a.phi[i] - b.phi[j]).powi(2) + (a.psi[i] - b.psi[j]).powi(2);
        }
        (acc * coarse.h).sqrt()
    };
    // restrict the middle grid to the coarse points first
    let mid = &finals[1];
    let e1 = diff(&finals[0], mid, 2);
    let mut mid_on_coarse = finals[0].clone();
    for i in 0..n {
        mid_on_coarse.phi[i] = mid.phi[2 * i];
        mid_on_coarse.psi[i] = mid.psi[2 * i];
    }
    let e2 = diff(&mid_on_coarse, &finals[2], 4);
    Ok(ConvergenceReport { n: sizes, dt: dts, differences: [e1, e2], order: (e1 / e2).log2() })
}
