//! Command-line front end. Every subcommand prints a JSON run report on
//! stdout; data files go where `--out` / `--out-dir` point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::dispersion::{self, KValue};
use crate::error::Error;
use crate::params::MaterialParams;
use crate::simulate::{self, FieldState, Scheme, SimBoundary, SimConfig, TimeStep};
use crate::soliton::{self, Branch, Form, SolitonSolution};
use crate::verify::{self, Suite, VerifyOptions};

pub const SEED_ENV: &str = "COSSERAT_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 invalid input,
    /// 3 undefined-regime request, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::Model(e) => match e {
                Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::NonFinite(_) => 2,
                Error::Pole { .. } | Error::Forbidden { .. } | Error::NoKink(_) => 3,
                _ => 4,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cosserat", version, about = "One-axis Cosserat solitons: dispersion, kinks and dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Material-only wave quantities.
    Derive {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep k(v) over a speed range into a CSV.
    Dispersion {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long, default_value_t = 0.0)]
        v_min: f64,
        #[arg(long, default_value_t = 8.0)]
        v_max: f64,
        #[arg(long, default_value_t = 801)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regime letter, root table and allowed speed intervals.
    Classify {
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a travelling kink and its displacement on a grid.
    Soliton(SolitonArgs),
    /// Evolve soliton initial data with the coupled field equations.
    Simulate(SimulateArgs),
    /// Run the invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// JSON object of tolerance overrides keyed by check name.
        #[arg(long)]
        tolerances: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ParamsArg {
    /// JSON file with the ten material constants.
    #[arg(long)]
    pub params: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Exact,
    Paper,
    Linearised,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BranchArg {
    Kink,
    Antikink,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Clamped,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Tensor,
    Energy,
    Dispersion,
    Soliton,
    Simulate,
    All,
}

#[derive(Debug, Args)]
pub struct SolitonArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Exact)]
    pub form: FormArg,
    #[arg(long, value_enum, default_value_t = BranchArg::Kink)]
    pub branch: BranchArg,
    /// Prescribed wavenumber instead of k(v).
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub z_min: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub z_max: f64,
    #[arg(long, default_value_t = 401)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    pub z_min: f64,
    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    pub z_max: f64,
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// `auto` or a positive step.
    #[arg(long, default_value = "auto")]
    pub dt: String,
    /// Number of snapshot files besides the initial one (at most).
    #[arg(long, default_value_t = 10)]
    pub snapshots: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Leapfrog)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Clamped)]
    pub boundary: BoundaryArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `std::env::args`, runs, prints the report and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            print_report(&report);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<Value> {
    match &cli.command {
        Command::Derive { params, out } => cmd_derive(&params.params, out.as_deref()),
        Command::Dispersion { params, v_min, v_max, steps, out } => cmd_dispersion(&params.params, *v_min, *v_max, *steps, out),
        Command::Classify { params, out } => cmd_classify(&params.params, out.as_deref()),
        Command::Soliton(a) => cmd_soliton(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify { suite, tolerances, out } => cmd_verify(*suite, tolerances.as_deref(), out.as_deref()),
    }
}

pub fn load_params(path: &Path) -> CliResult<MaterialParams> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let p: MaterialParams = serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })?;
    Ok(p.validated()?)
}

/// Seed from `COSSERAT_SEED`, else the built-in default.
pub fn seed() -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(crate::tensor::DEFAULT_SEED),
    }
}

/// JSON number rounded to 15 significant digits; non-finite values become
/// the strings `"infinity"`, `"-infinity"` and `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::from("nan")
    } else if x.is_infinite() {
        Value::from(if x > 0.0 { "infinity" } else { "-infinity" })
    } else {
        let r: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
        json!(r)
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Round-trip CSV cell: 17 significant digits.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

// A closed pipe on stdout is not an error worth a panic.
fn print_report(v: &Value) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{}", to_pretty(v));
}

fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise")
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |source| CliError::Io { path: path.into(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn params_json(p: &MaterialParams) -> Value {
    let v = serde_json::to_value(p).expect("params serialise");
    match v {
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, num(x.as_f64().unwrap_or(f64::NAN)))).collect()),
        other => other,
    }
}

fn report(command: &str, config: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("tool".into(), json!("cosserat"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), config);
    m
}

fn derived_json(p: &MaterialParams) -> CliResult<Value> {
    let d = dispersion::derive(p)?;
    let roots = d.roots();
    let root = |i: usize| opt_num(roots.map(|r| r[i]));
    Ok(json!({
        "m11": num(d.m[0][0]),
        "m12": num(d.m[0][1]),
        "m21": num(d.m[1][0]),
        "m22": num(d.m[1][1]),
        "v_elas": num(d.v_elas),
        "v_rot": num(d.v_rot),
        "v_chi_sq": num(d.v_chi_sq),
        "m_sq": num(d.m_sq),
        "m0_sq": num(d.m0_sq),
        "v0": num(d.v0),
        "v1": root(0),
        "v2": root(1),
        "v3": opt_num(d.v3()),
        "v4": num(d.v4()),
        "v3_sq": num(d.v3_sq),
        "v4_sq": num(d.v4_sq),
    }))
}

pub fn cmd_derive(path: &Path, out: Option<&Path>) -> CliResult<Value> {
    let p = load_params(path)?;
    let mut r = report("derive", json!({ "params_file": path, "params": params_json(&p) }));
    r.insert("derived".into(), derived_json(&p)?);
    finish(r, out)
}

fn finish(mut r: Map<String, Value>, out: Option<&Path>) -> CliResult<Value> {
    if let Some(out) = out {
        r.insert("outputs".into(), json!([out]));
        let v = Value::Object(r);
        write_atomic(out, &(to_pretty(&v) + "\n"))?;
        Ok(v)
    } else {
        r.insert("outputs".into(), json!([]));
        Ok(Value::Object(r))
    }
}

pub fn cmd_dispersion(path: &Path, v_min: f64, v_max: f64, steps: usize, out: &Path) -> CliResult<Value> {
    let p = load_params(path)?;
    if !(v_min.is_finite() && v_max.is_finite() && 0.0 <= v_min && v_min < v_max) {
        return Err(CliError::Usage(format!("need 0 <= v-min < v-max, got [{v_min}, {v_max}]")));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("steps = {steps}: need at least 2")));
    }
    let d = dispersion::derive(&p)?;
    let mut csv = String::from("v,k,b,m2_plus_b,defined\n");
    let mut defined_rows = 0usize;
    for i in 0..steps {
        let v = if i + 1 == steps { v_max } else { v_min + (v_max - v_min) * i as f64 / (steps - 1) as f64 };
        let k = dispersion::k_of_v(&p, v)?;
        let b = dispersion::b_of_v(&p, v).unwrap_or(f64::NAN);
        let (kv, def) = match k {
            KValue::Defined { k } => (k, 1),
            _ => (f64::NAN, 0),
        };
        defined_rows += def;
        let _ = writeln!(csv, "{},{},{},{},{def}", cell(v), cell(kv), cell(b), cell(d.m_sq + b));
    }
    write_atomic(out, &csv)?;
    let mut r = report(
        "dispersion",
        json!({ "params_file": path, "params": params_json(&p), "v_min": num(v_min), "v_max": num(v_max), "steps": steps }),
    );
    r.insert("rows".into(), json!(steps));
    r.insert("defined_rows".into(), json!(defined_rows));
    r.insert("v0".into(), num(d.v0));
    r.insert("outputs".into(), json!([out]));
    Ok(Value::Object(r))
}

pub fn cmd_classify(path: &Path, out: Option<&Path>) -> CliResult<Value> {
    let p = load_params(path)?;
    let c = dispersion::classify(&p)?;
    let intervals: Vec<Value> = c
        .allowed_intervals
        .iter()
        .map(|i| json!({ "lo": num(i.lo), "hi": num(i.hi), "lo_closed": i.lo_closed, "hi_closed": i.hi_closed }))
        .collect();
    let mut r = report("classify", json!({ "params_file": path, "params": params_json(&p) }));
    r.insert("regime".into(), json!(c.regime.letter()));
    r.insert("boundary".into(), json!(c.boundary));
    r.insert(
        "roots".into(),
        json!({ "v0": num(c.v0), "v3": opt_num(c.v3), "v4": num(c.v4), "v_elas": num(c.v_elas), "v_rot": num(c.v_rot) }),
    );
    r.insert("allowed_intervals".into(), Value::Array(intervals));
    r.insert("notes".into(), json!(c.notes));
    finish(r, out)
}

pub fn cmd_soliton(a: &SolitonArgs) -> CliResult<Value> {
    let p = load_params(&a.params.params)?;
    if a.n < 2 || !(a.z_min < a.z_max) || !a.t.is_finite() {
        return Err(Error::InvalidGrid(format!("need n >= 2 and z-min < z-max, got n = {} on [{}, {}]", a.n, a.z_min, a.z_max)).into());
    }
    let form = match a.form {
        FormArg::Exact => Form::Exact,
        FormArg::Paper => Form::Paper,
        FormArg::Linearised => Form::Linearised,
    };
    let branch = match a.branch {
        BranchArg::Kink => Branch::Kink,
        BranchArg::Antikink => Branch::Antikink,
    };
    let mut sol = SolitonSolution::new(&p, a.v, branch, form)?;
    if let Some(k) = a.k {
        sol = sol.with_k(k)?;
    }
    let h = (a.z_max - a.z_min) / (a.n - 1) as f64;
    let z: Vec<f64> = (0..a.n).map(|i| if i + 1 == a.n { a.z_max } else { a.z_min + h * i as f64 }).collect();
    let psi = soliton::psi_quadrature(&sol, &z, a.t)?;
    let mut csv = String::from("z,phi,psi,phi_z,psi_z,branch,psi_closed,psi_closed_defined\n");
    let mut closed_defined = 0usize;
    for (i, &zi) in z.iter().enumerate() {
        let j = sol.phi_jet(zi, a.t);
        let piece = match form {
            Form::Paper => soliton::paper_piece(sol.theta(zi, a.t)),
            _ => branch.sign(),
        };
        let closed = soliton::psi_closed_form(&sol, zi, a.t);
        closed_defined += usize::from(closed.defined);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{piece},{},{}",
            cell(zi),
            cell(j.v),
            cell(psi.psi[i]),
            cell(j.d1),
            cell(psi.psi_z[i]),
            cell(closed.value.unwrap_or(f64::NAN)),
            u8::from(closed.defined)
        );
    }
    write_atomic(&a.out, &csv)?;
    let mut r = report(
        "soliton",
        json!({
            "params_file": a.params.params, "params": params_json(&p), "v": num(a.v),
            "form": format!("{:?}", a.form).to_lowercase(), "branch": format!("{:?}", a.branch).to_lowercase(),
            "k_override": opt_num(a.k), "z_min": num(a.z_min), "z_max": num(a.z_max), "n": a.n, "t": num(a.t),
        }),
    );
    r.insert(
        "solution".into(),
        json!({ "k": num(sol.k), "delta": num(sol.delta), "m_sq": num(sol.m_sq), "b": num(sol.b), "r": num(sol.r),
                "center": num(sol.center(a.t)) }),
    );
    r.insert(
        "psi_closed".into(),
        json!({ "defined_points": closed_defined, "reason": psi.closed_form_reason }),
    );
    r.insert("outputs".into(), json!([a.out]));
    Ok(Value::Object(r))
}

fn parse_dt(s: &str) -> CliResult<TimeStep> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(TimeStep::Auto);
    }
    match s.parse::<f64>() {
        Ok(dt) if dt > 0.0 && dt.is_finite() => Ok(TimeStep::Fixed(dt)),
        _ => Err(CliError::Usage(format!("--dt {s:?}: expected \"auto\" or a positive number"))),
    }
}

fn snapshot_csv(s: &FieldState) -> String {
    let mut out = format!("# t={}\nz,phi,psi,phi_t,psi_t\n", cell(s.t));
    for i in 0..s.len() {
        let _ = writeln!(out, "{},{},{},{},{}", cell(s.z(i)), cell(s.phi[i]), cell(s.psi[i]), cell(s.phi_t[i]), cell(s.psi_t[i]));
    }
    out
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<Value> {
    let p = load_params(&a.params.params)?;
    if a.snapshots == 0 {
        return Err(CliError::Usage("--snapshots must be at least 1".into()));
    }
    let sol = SolitonSolution::new(&p, a.v, Branch::Kink, Form::Exact)?;
    let initial = FieldState::from_soliton(&sol, a.z_min, a.z_max, a.n, 0.0)?;
    let mut config = SimConfig {
        t_end: a.t_end,
        dt: parse_dt(&a.dt)?,
        boundary: match a.boundary {
            BoundaryArg::Clamped => SimBoundary::ClampedAsymptotic,
            BoundaryArg::Periodic => SimBoundary::Periodic,
        },
        scheme: match a.scheme {
            SchemeArg::Leapfrog => Scheme::Leapfrog,
            SchemeArg::Rk4 => Scheme::Rk4,
        },
        ..SimConfig::default()
    };
    let (_, steps) = config.resolve_dt(&p, initial.h)?;
    config.record_every = steps.div_ceil(a.snapshots).max(1);
    let reference = |z: f64, t: f64| sol.phi(z, t);
    let out = simulate::run(&initial, &config, &p, Some(&reference))?;

    let mut outputs = Vec::new();
    for snap in &out.snapshots {
        let path = a.out_dir.join(format!("fields_{}.csv", snap.index));
        write_atomic(&path, &snapshot_csv(&snap.state))?;
        outputs.push(path);
    }
    let m = &out.metrics;
    let metrics = json!({
        "l2_shape_error": num(m.l2_shape_error),
        "measured_speed": num(m.measured_speed),
        "center_position": num(m.center_position),
        "energy_drift": num(m.energy_drift),
        "initial_energy": num(m.initial_energy),
        "dt": num(m.dt),
        "steps": m.steps,
    });
    let metrics_path = a.out_dir.join("metrics.json");
    write_atomic(&metrics_path, &(to_pretty(&metrics) + "\n"))?;
    outputs.push(metrics_path);
    let mut r = report(
        "simulate",
        json!({
            "params_file": a.params.params, "params": params_json(&p), "v": num(a.v),
            "z_min": num(a.z_min), "z_max": num(a.z_max), "n": a.n, "t_end": num(a.t_end),
            "dt": a.dt, "snapshots": a.snapshots, "record_every": config.record_every,
            "scheme": config.scheme, "boundary": config.boundary,
            "displacement": "prestrained",
        }),
    );
    r.insert("metrics".into(), metrics);
    r.insert("outputs".into(), json!(outputs));
    Ok(Value::Object(r))
}

pub fn load_tolerances(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

pub fn cmd_verify(suite: SuiteArg, tolerances: Option<&Path>, out: Option<&Path>) -> CliResult<Value> {
    let suites: Vec<Suite> = match suite {
        SuiteArg::Tensor => vec![Suite::Tensor],
        SuiteArg::Energy => vec![Suite::Energy],
        SuiteArg::Dispersion => vec![Suite::Dispersion],
        SuiteArg::Soliton => vec![Suite::Soliton],
        SuiteArg::Simulate => vec![Suite::Simulate],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut opts = VerifyOptions { seed: seed()?, ..VerifyOptions::default() };
    if let Some(path) = tolerances {
        opts = opts.with_overrides(&load_tolerances(path)?)?;
    }
    let rep = verify::run(&suites, &opts);
    let mut r = report(
        "verify",
        json!({
            "suites": rep.suites, "seed": opts.seed, "identity_trials": opts.identity_trials,
            "random_param_sets": opts.random_param_sets, "convergence_n": opts.convergence_n,
            "tolerances_file": tolerances, "tolerances": opts.tolerances,
        }),
    );
    r.insert("seed".into(), json!(rep.seed));
    r.insert("passed".into(), json!(rep.passed));
    r.insert("failures".into(), json!(rep.failures));
    r.insert("checks".into(), serde_json::to_value(&rep.checks).expect("checks serialise"));
    r.insert("findings".into(), serde_json::to_value(&rep.findings).expect("findings serialise"));
    let v = finish(r, out)?;
    if rep.passed {
        Ok(v)
    } else {
        print_report(&v);
        Err(CliError::Verification(rep.failures))
    }
}
