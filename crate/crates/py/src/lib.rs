use cosserat_core::dispersion::{self, KValue};
use cosserat_core::simulate::{run as run_simulation, FieldState, SimConfig};
use cosserat_core::soliton::{self, Branch, Form, SolitonSolution};
use cosserat_core::verify::{self, Suite, VerifyOptions};
use cosserat_core::{Error, MaterialParams};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

fn err(e: Error) -> PyErr {
    match e {
        Error::NumericalInstability { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

const KEYS: [&str; 10] = ["kappa1", "kappa2", "kappa3", "chi1", "chi3", "rho", "rho_rot", "mu_c", "lambda", "mu"];

/// A fixture letter ("a".."d") or a dict with the ten constants.
fn params(obj: &Bound<'_, PyAny>) -> PyResult<MaterialParams> {
    if let Ok(name) = obj.cast::<PyString>() {
        let name = name.to_str()?;
        return MaterialParams::named(name).ok_or_else(|| PyValueError::new_err(format!("unknown parameter set {name:?}")));
    }
    let d = obj.cast::<PyDict>().map_err(|_| PyValueError::new_err("params must be a str or a dict"))?;
    let mut vals = [0.0; 10];
    for (slot, key) in vals.iter_mut().zip(KEYS) {
        *slot = d.get_item(key)?.ok_or_else(|| PyValueError::new_err(format!("missing key {key:?}")))?.extract()?;
    }
    if d.len() != KEYS.len() {
        return Err(PyValueError::new_err("unexpected keys in params"));
    }
    let [kappa1, kappa2, kappa3, chi1, chi3, rho, rho_rot, mu_c, lambda, mu] = vals;
    MaterialParams { kappa1, kappa2, kappa3, chi1, chi3, rho, rho_rot, mu_c, lambda, mu }.validated().map_err(err)
}

fn form(s: &str) -> PyResult<Form> {
    match s {
        "exact" => Ok(Form::Exact),
        "paper" => Ok(Form::Paper),
        "linearised" => Ok(Form::Linearised),
        _ => Err(PyValueError::new_err(format!("form must be exact, paper or linearised, got {s:?}"))),
    }
}

fn branch(s: &str) -> PyResult<Branch> {
    match s {
        "kink" => Ok(Branch::Kink),
        "antikink" => Ok(Branch::Antikink),
        _ => Err(PyValueError::new_err(format!("branch must be kink or antikink, got {s:?}"))),
    }
}

#[pyfunction]
fn derive<'py>(py: Python<'py>, params: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let p = self::params(params)?;
    let d = dispersion::derive(&p).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("m", d.m)?;
    out.set_item("v_elas", d.v_elas)?;
    out.set_item("v_rot", d.v_rot)?;
    out.set_item("v_chi_sq", d.v_chi_sq)?;
    out.set_item("m_sq", d.m_sq)?;
    out.set_item("m0_sq", d.m0_sq)?;
    out.set_item("v0", d.v0)?;
    out.set_item("v3", d.v3())?;
    out.set_item("v4", d.v4())?;
    Ok(out)
}

/// `k(v)`, or `None` at a pole or in a forbidden region.
#[pyfunction]
fn k_of_v(params: &Bound<'_, PyAny>, v: f64) -> PyResult<Option<f64>> {
    let p = self::params(params)?;
    Ok(match dispersion::k_of_v(&p, v).map_err(err)? {
        KValue::Defined { k } => Some(k),
        _ => None,
    })
}

/// Regime letter and allowed speed intervals as `(lo, hi)` pairs.
#[pyfunction]
fn classify(params: &Bound<'_, PyAny>) -> PyResult<(String, Vec<(f64, f64)>)> {
    let c = dispersion::classify(&self::params(params)?).map_err(err)?;
    Ok((c.regime.letter().to_string(), c.allowed_intervals.iter().map(|i| (i.lo, i.hi)).collect()))
}

#[pyfunction]
#[pyo3(signature = (params, v, z, t=0.0, form="exact", branch="kink"))]
fn soliton_phi(params: &Bound<'_, PyAny>, v: f64, z: Vec<f64>, t: f64, form: &str, branch: &str) -> PyResult<Vec<f64>> {
    let sol = SolitonSolution::new(&self::params(params)?, v, self::branch(branch)?, self::form(form)?).map_err(err)?;
    Ok(z.iter().map(|&zi| sol.phi(zi, t)).collect())
}

/// Displacement by quadrature on a sorted grid.
#[pyfunction]
#[pyo3(signature = (params, v, z, t=0.0))]
fn psi_quadrature(params: &Bound<'_, PyAny>, v: f64, z: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
    let sol = SolitonSolution::new(&self::params(params)?, v, Branch::Kink, Form::Exact).map_err(err)?;
    Ok(soliton::psi_quadrature(&sol, &z, t).map_err(err)?.psi)
}

/// Evolves the exact kink and returns the propagation metrics.
#[pyfunction]
#[pyo3(signature = (params, v, z_min=-40.0, z_max=40.0, n=4096, t_end=10.0))]
fn simulate<'py>(py: Python<'py>, params: &Bound<'py, PyAny>, v: f64, z_min: f64, z_max: f64, n: usize, t_end: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = self::params(params)?;
    let sol = SolitonSolution::new(&p, v, Branch::Kink, Form::Exact).map_err(err)?;
    let initial = FieldState::from_soliton(&sol, z_min, z_max, n, 0.0).map_err(err)?;
    let config = SimConfig { t_end, ..SimConfig::default() };
    let reference = |z: f64, t: f64| sol.phi(z, t);
    let m = py.detach(|| run_simulation(&initial, &config, &p, Some(&reference))).map_err(err)?.metrics;
    let out = PyDict::new(py);
    out.set_item("measured_speed", m.measured_speed)?;
    out.set_item("l2_shape_error", m.l2_shape_error)?;
    out.set_item("energy_drift", m.energy_drift)?;
    out.set_item("dt", m.dt)?;
    out.set_item("steps", m.steps)?;
    Ok(out)
}

/// Runs invariant suites; returns `(passed, failed check names, finding ids)`.
#[pyfunction]
#[pyo3(signature = (suite="all"))]
fn verify_suites(py: Python<'_>, suite: &str) -> PyResult<(bool, Vec<String>, Vec<String>)> {
    let suites = match suite {
        "all" => Suite::ALL.to_vec(),
        s => vec![*Suite::ALL.iter().find(|x| x.name() == s).ok_or_else(|| PyValueError::new_err(format!("unknown suite {s:?}")))?],
    };
    let rep = py.detach(|| verify::run(&suites, &VerifyOptions::default()));
    Ok((rep.passed, rep.failures, rep.findings.iter().map(|f| f.id.to_string()).collect()))
}

#[pymodule]
fn cosserat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(k_of_v, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(soliton_phi, m)?)?;
    m.add_function(wrap_pyfunction!(psi_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suites, m)?)?;
    Ok(())
}
