//! Python bindings: proximal maps, the parameter validator, instance
//! generators and the solvers.

use std::collections::HashMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use tsplit::diagnostics::{self, IterationRecord};
use tsplit::linalg::Vector;
use tsplit::problems::{self, AlgorithmOverrides, ProblemError, ProblemInstance, ProblemKind};
use tsplit::prox::{self, ScadParams};
use tsplit::splitting::{self, AlgorithmKind, RunOptions, StopRule, ALGORITHM_NAMES};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn problem_err(e: ProblemError) -> PyErr {
    match e {
        ProblemError::Io(_) => PyIOError::new_err(e.to_string()),
        e => value_err(e),
    }
}

fn vector(xs: Vec<f64>) -> PyResult<Vector> {
    Vector::new(xs).map_err(value_err)
}

#[pyfunction]
fn prox_l1(v: Vec<f64>, tau: f64) -> PyResult<Vec<f64>> {
    Ok(prox::prox_l1(&vector(v)?, tau).map_err(value_err)?.into_vec())
}

#[pyfunction]
#[pyo3(signature = (v, gamma, xi=0.1, c=3.7))]
fn prox_scad(v: Vec<f64>, gamma: f64, xi: f64, c: f64) -> PyResult<Vec<f64>> {
    let p = ScadParams::new(xi, c).map_err(value_err)?;
    Ok(prox::prox_scad_composite(&vector(v)?, gamma, p).map_err(value_err)?.into_vec())
}

#[pyfunction]
#[pyo3(signature = (omega, xi=0.1, c=3.7))]
fn scad_penalty(omega: f64, xi: f64, c: f64) -> PyResult<f64> {
    Ok(prox::scad_penalty(omega, ScadParams::new(xi, c).map_err(value_err)?))
}

#[pyfunction]
fn project_box(v: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(prox::project_box(&vector(v)?, &vector(lo)?, &vector(hi)?).map_err(value_err)?.into_vec())
}

#[pyfunction]
fn project_line(v: Vec<f64>, direction: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(prox::project_line(&vector(v)?, &vector(direction)?).map_err(value_err)?.into_vec())
}

/// `x + theta (x - x1) + delta (x1 - x2)`.
#[pyfunction]
fn extrapolate(x: Vec<f64>, x1: Vec<f64>, x2: Vec<f64>, theta: f64, delta: f64) -> PyResult<Vec<f64>> {
    let y = splitting::extrapolate(&vector(x)?, &vector(x1)?, &vector(x2)?, theta, delta).map_err(value_err)?;
    Ok(y.into_vec())
}

#[pyfunction]
fn snr_db(x: Vec<f64>, x_star: Vec<f64>) -> PyResult<f64> {
    diagnostics::snr_db(&vector(x)?, &vector(x_star)?).map_err(value_err)
}

/// Condition table for the inertial parameters, as `{row: (satisfied, lhs, rhs)}`
/// plus `overall`. Raises `ValueError` on a structural violation.
#[pyfunction]
#[pyo3(signature = (theta, delta, rho, gamma, eta=1.0))]
fn validate<'py>(
    py: Python<'py>,
    theta: f64,
    delta: f64,
    rho: f64,
    gamma: f64,
    eta: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let params = splitting::InertialParams::new(theta, delta, rho, gamma, eta);
    let report = splitting::validate(&params).map_err(value_err)?;
    let out = pyo3::types::PyDict::new(py);
    for (name, row) in report.rows() {
        out.set_item(name, (row.satisfied, row.lhs, row.rhs))?;
    }
    out.set_item("overall", report.overall)?;
    Ok(out)
}

#[pyclass(name = "Instance", module = "tsplit")]
struct PyInstance {
    inner: ProblemInstance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    #[pyo3(signature = (m=50, n=200, seed=1, density=problems::DEFAULT_DENSITY, reg=0.1))]
    fn lasso(m: usize, n: usize, seed: u64, density: f64, reg: f64) -> PyResult<Self> {
        let inner = problems::gen_lasso(m, n, seed, density, reg).map_err(problem_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (m=200, n=1000, seed=1, planted=true))]
    fn scad(m: usize, n: usize, seed: u64, planted: bool) -> PyResult<Self> {
        let inner = problems::gen_scad_with(m, n, seed, planted).map_err(problem_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (m=50, n=200, seed=1, density=problems::DEFAULT_DENSITY, reg=0.1))]
    fn three_op(m: usize, n: usize, seed: u64, density: f64, reg: f64) -> PyResult<Self> {
        let inner = problems::gen_three_op(m, n, seed, density, reg).map_err(problem_err)?;
        Ok(Self { inner })
    }

    /// Two lines through the origin at `angle` radians.
    #[staticmethod]
    #[pyo3(signature = (angle=std::f64::consts::FRAC_PI_4, seed=0))]
    fn feas2d(angle: f64, seed: u64) -> PyResult<Self> {
        let inner = problems::gen_feas2d(angle, seed).map_err(problem_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = problems::load_instance(path).map_err(problem_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        problems::save_instance(&self.inner, path).map_err(problem_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.dims()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.inner.b.as_slice().to_vec()
    }

    #[getter]
    fn x_true(&self) -> Option<Vec<f64>> {
        self.inner.x_true.as_ref().map(|x| x.as_slice().to_vec())
    }

    fn objective(&self, u: Vec<f64>) -> PyResult<Option<f64>> {
        let u = vector(u)?;
        if u.dim() != self.inner.dim() {
            return Err(value_err(format!("expected {} entries, got {}", self.inner.dim(), u.dim())));
        }
        Ok(self.inner.objective(&u))
    }

    /// Runs one algorithm from the instance's default start.
    #[pyo3(signature = (alg="twostep", theta=None, delta=None, rho=None, gamma_scale=None, eps=1e-4, max_iters=10_000))]
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        py: Python<'_>,
        alg: &str,
        theta: Option<f64>,
        delta: Option<f64>,
        rho: Option<f64>,
        gamma_scale: Option<f64>,
        eps: f64,
        max_iters: usize,
    ) -> PyResult<RunResult> {
        let kind: AlgorithmKind = alg.parse().map_err(value_err)?;
        let inst = &self.inner;
        let built = inst.build().map_err(problem_err)?;
        built.problem.check_applicable(kind).map_err(value_err)?;
        let overrides = AlgorithmOverrides {
            theta,
            delta,
            rho,
            gamma_scale,
        };
        let algorithm = inst.algorithm(&built, kind, overrides);
        if let Some(p) = algorithm.inertial_params() {
            p.check_structure().map_err(value_err)?;
        }
        let stop = StopRule { eps, max_iters };
        let snr_ref = inst.x_true.clone().filter(|x| x.norm() > 0.0);
        py.detach(|| {
            let opts = RunOptions {
                objective: (inst.kind != ProblemKind::Feas2d).then(|| {
                    Box::new(move |x: &Vector| inst.objective(x).unwrap_or(f64::NAN)) as Box<dyn Fn(&Vector) -> f64 + '_>
                }),
                snr_reference: snr_ref,
                ledger: None,
                observer: None,
            };
            splitting::run(&algorithm, &built.problem, inst.initial_state(), stop, opts)
        })
        .map(RunResult::from)
        .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        let (m, n) = self.inner.dims();
        format!("Instance(kind={:?}, shape=({m}, {n}), seed={})", self.inner.kind.name(), self.inner.seed)
    }
}

#[pyclass(module = "tsplit", get_all)]
struct RunResult {
    algorithm: &'static str,
    iterations: usize,
    termination: &'static str,
    elapsed_s: f64,
    x: Vec<f64>,
    records: Vec<HashMap<&'static str, Option<f64>>>,
}

fn record_dict(r: &IterationRecord) -> HashMap<&'static str, Option<f64>> {
    HashMap::from([
        ("n", Some(r.n as f64)),
        ("step_diff", Some(r.step_diff)),
        ("fp_residual", Some(r.fp_residual)),
        ("objective", r.objective),
        ("snr_db", r.snr_db),
        ("c_map_gap_sq", r.c_map_gap_sq),
        ("gamma_n", r.gamma_n),
        ("gamma_bar_n", r.gamma_bar_n),
        ("elapsed_s", Some(r.elapsed_s)),
    ])
}

impl From<splitting::RunRecord> for RunResult {
    fn from(r: splitting::RunRecord) -> Self {
        Self {
            algorithm: r.algorithm,
            iterations: r.iterations,
            termination: r.termination.as_str(),
            elapsed_s: r.elapsed_s,
            x: r.final_point().as_slice().to_vec(),
            records: r.records.iter().map(record_dict).collect(),
        }
    }
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(algorithm={:?}, iterations={}, termination={:?})",
            self.algorithm, self.iterations, self.termination
        )
    }
}

#[pymodule(name = "tsplit")]
fn tsplit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(prox_l1, m)?)?;
    m.add_function(wrap_pyfunction!(prox_scad, m)?)?;
    m.add_function(wrap_pyfunction!(scad_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(project_box, m)?)?;
    m.add_function(wrap_pyfunction!(project_line, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_class::<PyInstance>()?;
    m.add_class::<RunResult>()?;
    m.add("ALGORITHMS", ALGORITHM_NAMES.to_vec())?;
    Ok(())
}
