//! Acceptance criteria; one PASS/FAIL line per criterion, nonzero exit on
//! any failure.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use cosserat_core::dispersion::{self, KValue};
use cosserat_core::energy::variation::{bump_fields, variational_check_with, VariationalOptions};
use cosserat_core::energy::CurlScheme;
use cosserat_core::simulate::{self, FieldState, SimConfig};
use cosserat_core::soliton::{self, Branch, Form, SolitonSolution};
use cosserat_core::tensor::{matrix_identity_suite, DEFAULT_SEED};
use cosserat_core::{MaterialParams, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const A: MaterialParams = MaterialParams::TYPE_A;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Result<Outcome> {
    Ok(Outcome { passed, summary })
}

fn c1_roots() -> Result<Outcome> {
    let c = dispersion::derive(&MaterialParams::TYPE_C)?;
    let d = dispersion::derive(&MaterialParams::TYPE_D)?;
    let v3c = c.v3().unwrap_or(f64::NAN);
    let err_c = [c.v4() - 4.47214, c.v_elas - 4.47214, v3c - 3.51188, c.v_rot - 3.51188].map(f64::abs);
    let err_d = [d.v3().unwrap_or(f64::NAN), d.v4(), d.v_elas, d.v_rot].map(|r| (r - 4.47214).abs());
    let worst = err_c.iter().chain(&err_d).copied().fold(0.0, f64::max);
    outcome(worst < 1e-5, format!("type c v4 = {:.6}, v3 = {v3c:.6}; type d roots 4.47214; max error {worst:.2e} (tol 1e-5)", c.v4()))
}

fn c2_zero_and_poles() -> Result<Outcome> {
    let d = dispersion::derive(&A)?;
    let k_v0 = dispersion::k_of_v(&A, d.v0)?.value().unwrap_or(f64::NAN);
    let v3 = d.v3().unwrap_or(f64::NAN);
    let mut monotone = true;
    let mut growth = f64::INFINITY;
    for (root, side) in [(v3, -1.0), (d.v4(), 1.0)] {
        let ks: Vec<f64> =
            (2..=6).map(|j| dispersion::k_of_v(&A, root + side * 10f64.powi(-j)).map(|k| k.value().unwrap_or(f64::NAN))).collect::<Result<_>>()?;
        monotone &= ks.windows(2).all(|w| w[1] > w[0]);
        growth = growth.min(ks[4] / ks[0]);
    }
    let mut undefined = true;
    for i in 1..1000 {
        let v = v3 + (d.v4() - v3) * i as f64 / 1000.0;
        undefined &= !matches!(dispersion::k_of_v(&A, v)?, KValue::Defined { .. });
    }
    outcome(
        k_v0 < 1e-10 && monotone && growth >= 50.0 && undefined,
        format!("k(v0) = {k_v0:.1e} (tol 1e-10); monotone growth to both poles = {monotone} (k ratio 1e-6 vs 1e-2: {growth:.1}); (v3, v4) undefined = {undefined}"),
    )
}

fn c3_random_invariants() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut disc, mut bracket_fail) = (0.0f64, 0usize);
    for _ in 0..10_000 {
        let p = dispersion::random_admissible(&mut rng);
        let (lit, closed) = dispersion::discriminant_pair(&p)?;
        disc = disc.max((lit - closed).abs() / closed.abs());
        let d = dispersion::derive(&p)?;
        let (lo, hi) = (d.v_elas.min(d.v_rot), d.v_elas.max(d.v_rot));
        if !(d.v3_sq <= lo * lo * (1.0 + 1e-12) && hi * hi <= d.v4_sq * (1.0 + 1e-12)) {
            bracket_fail += 1;
        }
    }
    outcome(disc <= 1e-10 && bracket_fail == 0, format!("10^4 sets: discriminant rel error {disc:.2e} (tol 1e-10); bracketing failures {bracket_fail}"))
}

fn c4_dsg_residual() -> Result<Outcome> {
    let samples = [
        (A, 0.1),
        (A, 2.0),
        (MaterialParams::TYPE_C, 0.5),
        (MaterialParams::TYPE_D, 1.0),
        (MaterialParams { kappa1: 30.0, ..A }, 4.0),
    ];
    let mut worst = 0.0f64;
    for (p, v) in samples {
        let kink = SolitonSolution::new(&p, v, Branch::Kink, Form::Exact)?.rescaled()?;
        let t = 0.5;
        for i in -400..=400 {
            let z = i as f64 * 0.05 / kink.kappa + kink.v_hat * t;
            worst = worst.max(kink.residual(z, t).abs());
        }
    }
    outcome(worst < 1e-8, format!("5 samples, theta in [-20, 20]: max residual {worst:.2e} (tol 1e-8)"))
}

fn c5_linearised() -> Result<Outcome> {
    let p = MaterialParams { lambda: 1e-8, mu: 1e-8, ..A };
    let ex = SolitonSolution::new(&p, 2.0, Branch::Kink, Form::Exact)?;
    let li = SolitonSolution::new(&p, 2.0, Branch::Kink, Form::Linearised)?;
    let z: Vec<f64> = (0..=3000).map(|i| -30.0 + 0.02 * i as f64).collect();
    let psi = soliton::psi_quadrature(&ex, &z, 0.0)?;
    let (mut dphi, mut dpsi) = (0.0f64, 0.0f64);
    for (i, &zi) in z.iter().enumerate() {
        dphi = dphi.max((ex.phi(zi, 0.0) - li.phi(zi, 0.0)).abs());
        dpsi = dpsi.max((psi.psi[i] - li.psi_linearised(zi, 0.0)).abs());
    }
    outcome(dphi < 1e-6 && dpsi < 1e-5, format!("lambda = mu = 1e-8, v = 2: |phi - phi0| = {dphi:.2e} (tol 1e-6), |psi - psi0| = {dpsi:.2e} (tol 1e-5)"))
}

fn c6_branch_geometry() -> Result<Outcome> {
    let (k, v, t) = (1.5, 0.1, 7.0);
    let sol = SolitonSolution::new(&A, v, Branch::Kink, Form::Paper)?.with_k(k)?;
    let zc = 4f64.ln() / (2.0 * k) + v * t;
    let th = sol.theta(zc, t);
    let left = 4.0 * (0.5 * th.exp()).atan();
    let right = 4.0 * (2.0 * (-th).exp()).atan();
    let err = (left - PI).abs().max((right - PI).abs()).max((soliton::phi_paper_arctan(&sol, zc, t) - PI).abs());
    outcome(err <= 1e-12, format!("(k, v, t) = (1.5, 0.1, 7): branches meet at z = {zc:.12} with |phi - pi| = {err:.1e} (tol 1e-12)"))
}

fn c7_variational() -> Result<Outcome> {
    let rel = |h: f64, kappa2: f64| {
        let f = bump_fields(h, 10.0, 1.0, 0.2)?;
        let opts = VariationalOptions { scheme: CurlScheme::ChainRule, ..Default::default() };
        variational_check_with(&MaterialParams { kappa2, ..A }, &f, &opts)
    };
    let coarse = rel(0.02, 0.0)?;
    let fine = rel(0.01, 0.0)?;
    let order = (coarse.max_rel / fine.max_rel).log2();
    let other = rel(0.01, 3.0)?;
    let kappa2 = fine.probes.iter().zip(&other.probes).map(|(a, b)| (a.discrete - b.discrete).abs()).fold(0.0, f64::max);
    outcome(
        fine.max_rel < 1e-4 && order >= 1.9 && kappa2 <= 1e-10,
        format!("h = 0.01: rel phi {:.2e}, rel psi {:.2e} (tol 1e-4); order {order:.3} (min 1.9); kappa2 shift {kappa2:.1e} (tol 1e-10)", fine.rel_phi, fine.rel_psi),
    )
}

fn c8_identities() -> Result<Outcome> {
    let rep = matrix_identity_suite(100, DEFAULT_SEED)?;
    let worst = rep.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max);
    let all = rep.checks.iter().all(|c| c.max_residual <= 1e-6);
    outcome(all, format!("{} identities x 100 trials (seed {}): max residual {worst:.2e} (tol 1e-6)", rep.checks.len(), rep.seed))
}

fn c9_propagation() -> Result<Outcome> {
    let sol = SolitonSolution::new(&A, 0.1, Branch::Kink, Form::Exact)?;
    let cfg = SimConfig::default();
    let initial = FieldState::from_soliton(&sol, -40.0, 40.0, 4096, 0.0)?;
    let reference = |z: f64, t: f64| sol.phi(z, t);
    let m = simulate::run(&initial, &cfg, &A, Some(&reference))?.metrics;
    let speed = ((m.measured_speed - 0.1) / 0.1).abs();
    let build = |n: usize| FieldState::from_soliton(&sol, -40.0, 40.0, n, 0.0);
    let conv = simulate::self_convergence(&build, 4096, &cfg, &A)?;
    outcome(
        speed <= 0.01 && m.l2_shape_error < 1e-3 && m.energy_drift < 1e-4 && (conv.order - 2.0).abs() <= 0.2,
        format!(
            "speed {:.7} (rel {speed:.1e}, tol 1e-2); L2 shape {:.2e} (tol 1e-3); drift {:.2e} (tol 1e-4); order {:.4} on n = {:?} (2 +- 0.2)",
            m.measured_speed, m.l2_shape_error, m.energy_drift, conv.order, conv.n
        ),
    )
}

fn c10_psi_oracles() -> Result<Outcome> {
    let samples = [(A, 0.1), (A, 2.0), (MaterialParams::TYPE_C, 0.5), (MaterialParams { kappa1: 30.0, ..A }, 4.0)];
    let z: Vec<f64> = (0..=1200).map(|i| -30.0 + 0.05 * i as f64).collect();
    let (mut defined, mut worst) = (0usize, 0.0f64);
    for (p, v) in samples {
        let s = SolitonSolution::new(&p, v, Branch::Kink, Form::Exact)?;
        let q = soliton::psi_quadrature(&s, &z, 0.0)?;
        let scale = q.psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (i, &zi) in z.iter().enumerate() {
            if let Some(val) = soliton::psi_closed_form(&s, zi, 0.0).value {
                defined += 1;
                worst = worst.max((val - q.psi[i]).abs() / scale);
            }
        }
    }
    // where nothing is defined the deviation must surface as a finding
    let rep = cosserat_core::verify::run(&[cosserat_core::verify::Suite::Soliton], &Default::default());
    let reported = rep.findings.iter().any(|f| f.id == "psi-closed-form-domain");
    let ok = worst < 1e-3 && (defined > 0 || reported);
    outcome(ok, format!("{defined} points with a real closed form (max rel deviation {worst:.1e}, tol 1e-3); continuation deviation in findings = {reported}"))
}

fn c11_reproducible() -> Result<Outcome> {
    let run = || Command::new(env!("CARGO_BIN_EXE_cosserat")).args(["verify", "--suite", "all"]).env_remove("COSSERAT_SEED").output();
    let (a, b) = (run(), run());
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let same = a.stdout == b.stdout && !a.stdout.is_empty();
            outcome(
                same && a.status.success() && b.status.success(),
                format!("two `verify --suite all` runs: {} bytes, identical = {same}, exit codes {:?}/{:?}", a.stdout.len(), a.status.code(), b.status.code()),
            )
        }
        (a, b) => outcome(false, format!("could not run the binary: {:?} {:?}", a.err(), b.err())),
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("root regression", c1_roots),
        ("k zero and poles", c2_zero_and_poles),
        ("discriminant and bracketing", c3_random_invariants),
        ("exact soliton residual", c4_dsg_residual),
        ("linearised recovery", c5_linearised),
        ("branch geometry", c6_branch_geometry),
        ("variational consistency", c7_variational),
        ("identity suite", c8_identities),
        ("dynamical propagation", c9_propagation),
        ("psi oracle agreement", c10_psi_oracles),
        ("reproducibility", c11_reproducible),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, summary) = match f() {
            Ok(o) => (o.passed, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {:>2} {} {name}: {summary} [{:.2} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
