//! Python bindings for the `epigamble` library.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use epigamble::games::{self, GameParams as CoreParams};
use epigamble::moments::{upper_bound_with, InterlinkLevel, MomentField};
use epigamble::ontic::{self, OnticModel as CoreModel};
use epigamble::quantum::{CMatrix, DensityMatrix, WeightedState};
use epigamble::report::{self, ScanSpec};
use epigamble::sdp::SolverOptions;
use epigamble::seesaw::{bloch_angle, seesaw_run, SeesawConfig};
use epigamble::Error;

create_exception!(epigamble_py, SolverError, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::ModelFormat(_) | Error::Io(_) => PyValueError::new_err(e.to_string()),
        _ => SolverError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for it in items {
                list.append(json_to_py(py, it)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, it) in map {
                dict.set_item(k, json_to_py(py, it)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn to_dict<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a nonempty square matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn density(rows: Vec<Vec<Complex64>>) -> PyResult<DensityMatrix> {
    DensityMatrix::new(matrix(rows)?).map_err(to_py)
}

fn rows_of(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn interlink(name: &str) -> PyResult<InterlinkLevel> {
    match name {
        "paper-min" | "paper_min" => Ok(InterlinkLevel::PaperMin),
        "full" => Ok(InterlinkLevel::Full),
        other => Err(PyValueError::new_err(format!("unknown interlink level {other:?}"))),
    }
}

#[pyclass(frozen, skip_from_py_object, module = "epigamble_py")]
#[derive(Clone, Copy)]
struct GameParams {
    inner: CoreParams,
}

#[pymethods]
impl GameParams {
    #[new]
    fn new(alpha: f64, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreParams::new(alpha, beta).map_err(to_py)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    fn is_distinguishability_regime(&self) -> bool {
        self.inner.is_distinguishability_regime()
    }

    fn omega_max(&self) -> f64 {
        games::omega_max(self.inner)
    }

    fn __repr__(&self) -> String {
        format!("GameParams(alpha={}, beta={})", self.inner.alpha, self.inner.beta)
    }
}

#[pyclass(module = "epigamble_py")]
struct OnticModel {
    inner: CoreModel,
}

#[pymethods]
impl OnticModel {
    #[new]
    fn new(mu1: Vec<f64>, mu2: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreModel::new(mu1, mu2).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreModel::from_json_str(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn random(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreModel::random(n, seed).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn psi_ontic() -> Self {
        Self { inner: CoreModel::psi_ontic() }
    }

    #[staticmethod]
    fn identical() -> Self {
        Self { inner: CoreModel::identical() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn mu1(&self) -> Vec<f64> {
        self.inner.mu1().to_vec()
    }

    #[getter]
    fn mu2(&self) -> Vec<f64> {
        self.inner.mu2().to_vec()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn overlap(&self, py: Python<'_>, params: &GameParams) -> PyResult<Py<PyAny>> {
        to_dict(py, &ontic::generalized_epistemic_overlap(&self.inner, params.inner).map_err(to_py)?)
    }

    fn s_lambda(&self, params: &GameParams) -> PyResult<f64> {
        ontic::s_lambda(&self.inner, params.inner).map_err(to_py)
    }

    fn piecewise_overlap(&self, params: &GameParams) -> PyResult<f64> {
        ontic::piecewise_overlap(&self.inner, params.inner).map_err(to_py)
    }

    fn regions(&self, params: &GameParams) -> Vec<String> {
        ontic::classify_regions(&self.inner, params.inner).iter().map(|r| r.to_string()).collect()
    }

    fn classical_comm_best(&self, params: &GameParams) -> f64 {
        ontic::classical_comm_best(&self.inner, params.inner)
    }

    /// Full overlap report, as emitted by the `ontic` command.
    fn report(&self, py: Python<'_>, params: &GameParams) -> PyResult<Py<PyAny>> {
        to_dict(py, &report::cmd_ontic(&self.inner, params.inner).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("OnticModel(n={})", self.inner.n())
    }
}

/// Gambling payoff for two density matrices given as nested lists.
#[pyfunction]
fn gambling_value(py: Python<'_>, rho1: Vec<Vec<Complex64>>, rho2: Vec<Vec<Complex64>>, params: &GameParams) -> PyResult<Py<PyAny>> {
    let (r1, r2) = (density(rho1)?, density(rho2)?);
    let res = games::gambling_value(&r1, &r2, params.inner).map_err(to_py)?;
    let dict = PyDict::new(py);
    dict.set_item("value", res.value)?;
    dict.set_item("gap", res.gap)?;
    dict.set_item("povm", res.povm.effects().iter().map(rows_of).collect::<Vec<_>>())?;
    dict.set_item("dual_y", rows_of(&res.dual_y))?;
    Ok(dict.into_any().unbind())
}

#[pyfunction]
fn distinguishability(rho1: Vec<Vec<Complex64>>, rho2: Vec<Vec<Complex64>>) -> PyResult<f64> {
    games::distinguishability(&density(rho1)?, &density(rho2)?).map_err(to_py)
}

/// Weighted distinguishability by SDP and by the eigenvalue formula.
#[pyfunction]
fn weighted_distinguishability(
    rho1: Vec<Vec<Complex64>>,
    w1: f64,
    rho2: Vec<Vec<Complex64>>,
    w2: f64,
) -> PyResult<(f64, f64)> {
    let a = WeightedState::new(density(rho1)?, w1).map_err(to_py)?;
    let b = WeightedState::new(density(rho2)?, w2).map_err(to_py)?;
    Ok((
        games::weighted_distinguishability(&a, &b).map_err(to_py)?,
        games::helstrom_oracle(&a, &b).map_err(to_py)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (angle, params, dim = 2))]
fn gamble(py: Python<'_>, angle: f64, params: &GameParams, dim: usize) -> PyResult<Py<PyAny>> {
    to_dict(py, &report::cmd_gamble(angle, params.inner, dim).map_err(to_py)?)
}

#[pyfunction]
fn bound(py: Python<'_>, angle: f64, params: &GameParams) -> PyResult<Py<PyAny>> {
    to_dict(py, &report::cmd_bound(angle, params.inner).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (params, dim = 2, restarts = 20, seed = 0))]
fn seesaw(py: Python<'_>, params: &GameParams, dim: usize, restarts: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let cfg = SeesawConfig {
        dim,
        restarts,
        seed,
        ..SeesawConfig::default()
    };
    let out = py.detach(|| seesaw_run(params.inner, &cfg)).map_err(to_py)?;
    let dict = PyDict::new(py);
    dict.set_item("b_ql", out.b_ql)?;
    dict.set_item("purity_defect", out.purity_defect)?;
    dict.set_item("iterations", out.iterations)?;
    dict.set_item("converged", out.converged)?;
    dict.set_item("rho1", rows_of(out.rho1.matrix()))?;
    dict.set_item("rho2", rows_of(out.rho2.matrix()))?;
    let theta = if dim == 2 {
        bloch_angle(&out.rho1, &out.rho2).ok().map(|a| a.radians / std::f64::consts::PI)
    } else {
        None
    };
    dict.set_item("theta_scaled", theta)?;
    Ok(dict.into_any().unbind())
}

#[pyfunction]
#[pyo3(signature = (params, interlink = "full", complex = false, b_ql = None))]
fn upper_bound(py: Python<'_>, params: &GameParams, interlink: &str, complex: bool, b_ql: Option<f64>) -> PyResult<Py<PyAny>> {
    let level = self::interlink(interlink)?;
    let field = if complex { MomentField::Complex } else { MomentField::Real };
    let res = py
        .detach(|| upper_bound_with(params.inner, level, field, &SolverOptions::default(), b_ql))
        .map_err(to_py)?;
    to_dict(py, &res)
}

/// See-saw scan; returns one dict per grid point.
#[pyfunction]
#[pyo3(signature = (alpha_min, alpha_max, steps, beta = 1.0, dim = 2, restarts = 20, seed = 0, with_npa = false, interlink = "full"))]
#[allow(clippy::too_many_arguments)]
fn scan(
    py: Python<'_>,
    alpha_min: f64,
    alpha_max: f64,
    steps: usize,
    beta: f64,
    dim: usize,
    restarts: usize,
    seed: u64,
    with_npa: bool,
    interlink: &str,
) -> PyResult<Py<PyAny>> {
    let spec = ScanSpec {
        alpha_min,
        alpha_max,
        steps,
        beta,
        dim,
        restarts,
        seed,
        with_npa,
        interlink: self::interlink(interlink)?,
    };
    let table = py.detach(|| report::cmd_scan(&spec)).map_err(to_py)?;
    to_dict(py, &table.rows)
}

#[pymodule]
fn epigamble_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", epigamble::VERSION)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<GameParams>()?;
    m.add_class::<OnticModel>()?;
    m.add_function(wrap_pyfunction!(gambling_value, m)?)?;
    m.add_function(wrap_pyfunction!(distinguishability, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_distinguishability, m)?)?;
    m.add_function(wrap_pyfunction!(gamble, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(seesaw, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
