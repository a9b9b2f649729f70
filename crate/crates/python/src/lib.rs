//! Python module `magdde`.
//!
//! Matrices cross the boundary as lists of rows; states as flat lists in the
//! block layout of the core crate (block `j` holds `x(t + theta_j)`).

use std::collections::BTreeMap;

use magdde::dde::{self, DdeProblem, LinearDdeProblem, MonodromyOptions, QuasilinearDdeProblem, SolveOptions};
use magdde::linalg;
use magdde::magnus::GuardPolicy;
use magdde::models::{self, BenchmarkProblem};
use magdde::spectral::{self, ChebyshevGrid};
use magdde::{DenseMatrix, Error};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    magdde,
    NumericalError,
    PyRuntimeError,
    "A numerical failure inside the integrators."
);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::OutOfRange { .. } => PyValueError::new_err(e.to_string()),
        _ => NumericalError::new_err(e.to_string()),
    }
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> PyResult<DenseMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(DenseMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// A float is accepted as a 1x1 matrix.
fn matrix_from(obj: &Bound<'_, PyAny>) -> PyResult<DenseMatrix> {
    if let Ok(v) = obj.extract::<f64>() {
        return Ok(DenseMatrix::from_element(1, 1, v));
    }
    from_rows(&obj.extract::<Vec<Vec<f64>>>()?)
}

fn vector_from(obj: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    if let Ok(v) = obj.extract::<f64>() {
        return Ok(vec![v]);
    }
    obj.extract::<Vec<f64>>()
}

fn callback_error(what: &str, e: PyErr) -> Error {
    Error::Evaluation(format!("{what}: {e}"))
}

fn time_matrix(f: Py<PyAny>, what: &'static str) -> impl Fn(f64) -> magdde::Result<DenseMatrix> + Send + Sync {
    move |t| {
        Python::attach(|py| {
            let out = f.bind(py).call1((t,))?;
            matrix_from(&out)
        })
        .map_err(|e| callback_error(what, e))
    }
}

fn history_fn(f: Py<PyAny>) -> impl Fn(f64) -> magdde::Result<Vec<f64>> + Send + Sync {
    move |t| {
        Python::attach(|py| {
            let out = f.bind(py).call1((t,))?;
            vector_from(&out)
        })
        .map_err(|e| callback_error("history", e))
    }
}

fn guard_from(name: &str) -> PyResult<GuardPolicy> {
    match name {
        "warn" => Ok(GuardPolicy::Warn),
        "deny" => Ok(GuardPolicy::Deny),
        "ignore" => Ok(GuardPolicy::Ignore),
        _ => Err(PyValueError::new_err(format!(
            "guard must be 'warn', 'deny' or 'ignore', got '{name}'"
        ))),
    }
}

/// Chebyshev nodes `sin(pi (N - 2j) / (2N))`, `j = 0..N`, descending.
#[pyfunction]
fn chebyshev_nodes(n: usize) -> PyResult<Vec<f64>> {
    spectral::chebyshev_nodes(n).map_err(to_py)
}

#[pyfunction]
fn differentiation_matrix(n: usize) -> PyResult<Vec<Vec<f64>>> {
    spectral::differentiation_matrix(n).map(|m| rows(&m)).map_err(to_py)
}

#[pyfunction]
fn expm(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    linalg::expm(&from_rows(&matrix)?).map(|m| rows(&m)).map_err(to_py)
}

/// Eigenvalues sorted by decreasing modulus.
#[pyfunction]
fn eigenvalues(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
    linalg::eigenvalues(&from_rows(&matrix)?)
        .map(|s| s.into_vec())
        .map_err(to_py)
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    models::BUILTIN_NAMES.to_vec()
}

#[pyfunction]
fn builtin_parameters(name: &str) -> PyResult<BTreeMap<&'static str, f64>> {
    Ok(models::builtin_parameters(name).map_err(to_py)?.into_iter().collect())
}

#[pyclass(name = "Problem", module = "magdde", frozen)]
struct PyProblem {
    inner: BenchmarkProblem,
}

#[pymethods]
impl PyProblem {
    /// One of the built-in problems, with optional parameter overrides.
    #[staticmethod]
    #[pyo3(signature = (name, params = None))]
    fn builtin(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let overrides: Vec<(String, f64)> = params.unwrap_or_default().into_iter().collect();
        Ok(Self {
            inner: models::builtin(name, &overrides).map_err(to_py)?,
        })
    }

    /// `x'(t) = A(t) x(t) + B(t) x(t - tau)`; `a`, `b` and `history` are
    /// callables of `t`.
    #[staticmethod]
    #[pyo3(signature = (dim, tau, a, b, history, period = None, label = "linear"))]
    fn linear(
        dim: usize,
        tau: f64,
        a: Py<PyAny>,
        b: Py<PyAny>,
        history: Py<PyAny>,
        period: Option<f64>,
        label: &str,
    ) -> PyResult<Self> {
        let mut p = LinearDdeProblem::new(
            dim,
            tau,
            time_matrix(a, "A(t)"),
            time_matrix(b, "B(t)"),
            history_fn(history),
        )
        .map_err(to_py)?
        .with_label(label);
        if let Some(t) = period {
            p = p.with_period(t).map_err(to_py)?;
        }
        Ok(Self::custom(label, p.into()))
    }

    /// `x'(t) = A(x(t - tau)) x(t)`; `a` takes the delayed state as a list.
    #[staticmethod]
    #[pyo3(signature = (dim, tau, a, history, label = "quasilinear"))]
    fn quasilinear(dim: usize, tau: f64, a: Py<PyAny>, history: Py<PyAny>, label: &str) -> PyResult<Self> {
        let coeff = move |x: &[f64]| {
            Python::attach(|py| {
                let out = a.bind(py).call1((x.to_vec(),))?;
                matrix_from(&out)
            })
            .map_err(|e| callback_error("A(x)", e))
        };
        let p = QuasilinearDdeProblem::new(dim, tau, coeff, history_fn(history))
            .map_err(to_py)?
            .with_label(label);
        Ok(Self::custom(label, p.into()))
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn label(&self) -> &str {
        self.inner.problem.label()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.problem.dim()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.problem.tau()
    }

    #[getter]
    fn period(&self) -> Option<f64> {
        self.inner.problem.as_linear().and_then(LinearDdeProblem::period)
    }

    #[getter]
    fn is_linear(&self) -> bool {
        self.inner.problem.as_linear().is_some()
    }

    #[getter]
    fn admissible_orders(&self) -> Vec<u32> {
        self.inner.problem.admissible_orders().to_vec()
    }

    #[getter]
    fn reference_multiplier(&self) -> Option<Complex64> {
        self.inner.reference_multiplier
    }

    #[getter]
    fn conserved_total(&self) -> Option<f64> {
        self.inner.conserved_total
    }

    /// Exact solution at `t`, or `None` when the problem has none.
    fn exact(&self, t: f64) -> Option<Vec<f64>> {
        self.inner.exact.as_ref().map(|f| f(t))
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem('{}', dim={}, tau={})",
            self.inner.problem.label(),
            self.dim(),
            self.tau()
        )
    }
}

impl PyProblem {
    fn custom(name: &str, problem: DdeProblem) -> Self {
        Self {
            inner: BenchmarkProblem {
                name: name.to_string(),
                problem,
                exact: None,
                reference_multiplier: None,
                multiplier_match: models::MultiplierMatch::Closest,
                provenance: "user supplied".into(),
                conserved_total: None,
            },
        }
    }
}

#[pyclass(name = "Trajectory", module = "magdde", frozen)]
struct PyTrajectory {
    inner: dde::Trajectory,
    grid: ChebyshevGrid,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order
    }

    /// End time of every integrated interval.
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.intervals.iter().map(|r| r.t_end).collect()
    }

    /// Collocated state at the end of every interval.
    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.inner.intervals.iter().map(|r| r.state.clone()).collect()
    }

    /// `(t, state)` after every step; empty unless solved with `store_steps`.
    #[getter]
    fn steps(&self) -> Vec<(f64, Vec<f64>)> {
        self.inner
            .intervals
            .iter()
            .flat_map(|r| r.step_states.iter().map(|s| (s.t, s.state.clone())))
            .collect()
    }

    #[getter]
    fn final_time(&self) -> f64 {
        self.inner.final_time()
    }

    #[getter]
    fn final_state(&self) -> Vec<f64> {
        self.inner.final_state().to_vec()
    }

    /// `x(final_time)`.
    #[getter]
    fn final_value(&self) -> Vec<f64> {
        self.inner.final_value().to_vec()
    }

    /// Times `anchor + theta_j` of the nodes of a state anchored at `anchor`.
    fn node_times(&self, anchor: f64) -> Vec<f64> {
        self.grid.node_times(anchor)
    }

    fn __len__(&self) -> usize {
        self.inner.intervals.len()
    }
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (problem, n, m, order, t_final, store_steps = false, guard = "warn"))]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    n: usize,
    m: usize,
    order: u32,
    t_final: f64,
    store_steps: bool,
    guard: &str,
) -> PyResult<PyTrajectory> {
    let opts = SolveOptions::new(n, m, order, t_final)
        .store_steps(store_steps)
        .guard(guard_from(guard)?);
    let p = problem.inner.problem.clone();
    let traj = py.detach(|| dde::solve(&p, &opts)).map_err(to_py)?;
    let grid = ChebyshevGrid::new(n, traj.tau).map_err(to_py)?;
    Ok(PyTrajectory { inner: traj, grid })
}

#[pyclass(name = "Floquet", module = "magdde", frozen)]
struct PyFloquet {
    inner: dde::MonodromyResult,
}

#[pymethods]
impl PyFloquet {
    /// Multipliers sorted by decreasing modulus.
    #[getter]
    fn multipliers(&self) -> Vec<Complex64> {
        self.inner.multipliers.values().to_vec()
    }

    #[getter]
    fn monodromy(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.monodromy)
    }

    #[getter]
    fn spectral_radius(&self) -> f64 {
        self.inner.multipliers.spectral_radius()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon
    }

    /// `'stable'`, `'unstable'` or `'marginal'`.
    #[pyo3(signature = (tol = 1e-6))]
    fn stability(&self, tol: f64) -> String {
        dde::stability_verdict(&self.inner.multipliers, tol).to_string()
    }

    fn closest_to(&self, target: Complex64) -> Option<Complex64> {
        self.inner.multipliers.closest_to(target)
    }
}

#[pyfunction]
#[pyo3(signature = (problem, n, m, order, periods = 1, guard = "warn"))]
fn monodromy(
    py: Python<'_>,
    problem: &PyProblem,
    n: usize,
    m: usize,
    order: u32,
    periods: usize,
    guard: &str,
) -> PyResult<PyFloquet> {
    let p = problem
        .inner
        .problem
        .as_linear()
        .cloned()
        .ok_or_else(|| PyValueError::new_err("multipliers need a linear periodic problem"))?;
    let mut opts = MonodromyOptions::new(n, m, order);
    opts.periods = periods;
    opts.guard = guard_from(guard)?;
    let inner = py.detach(|| dde::monodromy(&p, &opts)).map_err(to_py)?;
    Ok(PyFloquet { inner })
}

/// The collocated system matrix at time `t` for a linear problem.
#[pyfunction]
#[pyo3(signature = (problem, n, t = 0.0))]
fn system_matrix(problem: &PyProblem, n: usize, t: f64) -> PyResult<Vec<Vec<f64>>> {
    let p = problem
        .inner
        .problem
        .as_linear()
        .ok_or_else(|| PyValueError::new_err("system_matrix needs a linear problem"))?;
    let grid = ChebyshevGrid::new(n, p.tau()).map_err(to_py)?;
    dde::assemble_linear(p, &grid, t).map(|m| rows(&m)).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "magdde")]
fn magdde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyFloquet>()?;
    m.add_function(wrap_pyfunction!(chebyshev_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(differentiation_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(monodromy, m)?)?;
    m.add_function(wrap_pyfunction!(system_matrix, m)?)?;
    Ok(())
}
