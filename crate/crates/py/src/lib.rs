//! Python bindings for the chakravala solver.

use chakravala::engine::{self, Branches, PellSolution, StageRecord, Trace};
use chakravala::oracle::{self, OracleBudget};
use chakravala::stepgraph::{self, Which};
use chakravala::steps::{self, Best, Branch, Step};
use chakravala::{Error, Sign};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn branch(name: &str) -> PyResult<Branch> {
    match name {
        "minus" => Ok(Branch::Minus),
        "plus" => Ok(Branch::Plus),
        other => Err(PyValueError::new_err(format!("twin policy must be 'minus' or 'plus', got {other:?}"))),
    }
}

fn sign_from(eps: i8) -> PyResult<Sign> {
    Sign::from_i64(eps.into()).ok_or_else(|| PyValueError::new_err("eps must be 1 or -1"))
}

#[pyclass(name = "Step", eq, frozen, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyStep {
    inner: Step,
}

#[pymethods]
impl PyStep {
    #[new]
    fn new(k: BigUint, m: BigUint, kp: BigUint, eps: i8) -> PyResult<Self> {
        Ok(PyStep { inner: Step::new(k, m, kp, sign_from(eps)?) })
    }

    #[getter]
    fn k(&self) -> BigUint {
        self.inner.k.clone()
    }

    #[getter]
    fn m(&self) -> BigUint {
        self.inner.m.clone()
    }

    #[getter]
    fn kp(&self) -> BigUint {
        self.inner.kp.clone()
    }

    #[getter]
    fn eps(&self) -> i8 {
        self.inner.eps.as_i8()
    }

    fn reverse(&self) -> PyStep {
        PyStep { inner: steps::reverse(&self.inner) }
    }

    fn as_tuple(&self) -> (BigUint, BigUint, BigUint) {
        (self.inner.k.clone(), self.inner.m.clone(), self.inner.kp.clone())
    }

    fn __repr__(&self) -> String {
        format!("Step(k={}, m={}, kp={}, eps={})", self.inner.k, self.inner.m, self.inner.kp, self.inner.eps)
    }
}

#[pyclass(name = "Solution", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolution {
    inner: PellSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn x(&self) -> BigUint {
        self.inner.x.clone()
    }

    #[getter]
    fn y(&self) -> BigUint {
        self.inner.y.clone()
    }

    #[getter]
    fn sign(&self) -> i8 {
        self.inner.sign.as_i8()
    }

    fn as_tuple(&self) -> (BigUint, BigUint, i8) {
        (self.inner.x.clone(), self.inner.y.clone(), self.inner.sign.as_i8())
    }

    fn __repr__(&self) -> String {
        format!("Solution({})", self.inner)
    }
}

#[pyclass(name = "Trace", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTrace {
    inner: Trace,
}

type StageRow = (usize, BigUint, BigUint, BigUint, i8, BigUint, BigUint);

fn stage_row(s: &StageRecord) -> StageRow {
    (s.i, s.k.clone(), s.m.clone(), s.k_next.clone(), s.eps.as_i8(), s.a_next.clone(), s.b_next.clone())
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn n(&self) -> BigUint {
        self.inner.n.clone()
    }

    /// Rows `(i, k, m, k_next, eps, a_next, b_next)`.
    #[getter]
    fn stages(&self) -> Vec<StageRow> {
        self.inner.stages.iter().map(stage_row).collect()
    }

    /// `(index, branch)` of the twin fork, or `None`.
    #[getter]
    fn fork(&self) -> Option<(usize, String)> {
        self.inner.fork.map(|f| (f.index, f.branch.to_string()))
    }

    #[getter]
    fn solution(&self) -> PySolution {
        PySolution { inner: self.inner.solution.clone() }
    }

    fn steps(&self) -> Vec<PyStep> {
        self.inner.steps().into_iter().map(|inner| PyStep { inner }).collect()
    }

    fn k_sequence(&self) -> Vec<BigUint> {
        self.inner.k_sequence()
    }

    fn m_sequence(&self) -> Vec<BigUint> {
        self.inner.m_sequence()
    }

    fn is_palindrome(&self) -> bool {
        self.inner.is_palindrome()
    }

    /// Failed invariant checks as strings; empty when the trace is sound.
    fn verify(&self) -> Vec<String> {
        engine::verify_trace(&self.inner.n, &self.inner).failures.iter().map(ToString::to_string).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<PyTrace> {
        Trace::from_json(s).map(|inner| PyTrace { inner }).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Trace(n={}, stages={}, solution=({}))", self.inner.n, self.inner.len(), self.inner.solution)
    }
}

/// `(x, y, sign)` with `x² − n·y² = sign`.
#[pyfunction]
fn solve(n: BigUint) -> PyResult<(BigUint, BigUint, i8)> {
    let t = engine::run(&n, Branch::Minus).map_err(py_err)?;
    Ok((t.solution.x, t.solution.y, t.solution.sign.as_i8()))
}

#[pyfunction]
#[pyo3(signature = (n, twin = "minus", shortcut = false))]
fn run(n: BigUint, twin: &str, shortcut: bool) -> PyResult<PyTrace> {
    let policy = branch(twin)?;
    let t = if shortcut { engine::run_with_midpoint_shortcut(&n, policy) } else { engine::run(&n, policy) };
    t.map(|inner| PyTrace { inner }).map_err(py_err)
}

/// One trace, or the `minus` and `plus` traces when a twin fork occurs.
#[pyfunction]
fn run_both_branches(n: BigUint) -> PyResult<Vec<PyTrace>> {
    let b = engine::run_both_branches(&n).map_err(py_err)?;
    Ok(match b {
        Branches::Single(t) => vec![PyTrace { inner: t }],
        Branches::Forked { minus, plus } => vec![PyTrace { inner: minus }, PyTrace { inner: plus }],
    })
}

fn best_tuple(b: Best<BigUint>) -> Vec<BigUint> {
    b.into_vec()
}

/// Best member(s) of the class `r mod k`: one value, or the twin pair.
#[pyfunction]
fn select_best(n: BigUint, k: BigUint, r: BigUint) -> PyResult<Vec<BigUint>> {
    steps::select_best(&n, &k, &r).map(best_tuple).map_err(py_err)
}

#[pyfunction]
fn is_best(n: BigUint, k: BigUint, m: BigUint) -> bool {
    steps::is_best(&n, &k, &m)
}

#[pyfunction]
fn is_step(n: BigUint, step: &PyStep) -> bool {
    steps::is_step(&n, &step.inner)
}

#[pyfunction]
fn is_reduced(n: BigUint, step: &PyStep) -> bool {
    steps::is_reduced(&n, &step.inner)
}

#[pyfunction]
fn successor(n: BigUint, step: &PyStep) -> PyResult<Vec<PyStep>> {
    if !steps::is_step(&n, &step.inner) {
        return Err(PyValueError::new_err(format!("{} is not a step of {n}", step.inner)));
    }
    Ok(steps::successor(&n, &step.inner).into_vec().into_iter().map(|inner| PyStep { inner }).collect())
}

#[pyfunction]
fn enumerate_steps(n: BigUint) -> PyResult<Vec<PyStep>> {
    let set = stepgraph::enumerate_steps(&n).map_err(py_err)?;
    Ok(set.steps.into_iter().map(|inner| PyStep { inner }).collect())
}

/// Runs one sweep (`prop2`, `theorem`, `structure`, `oracle`) and returns the
/// report as a JSON string.
#[pyfunction]
#[pyo3(signature = (which, lo, hi, y_limit = 10_000_000))]
fn verify(which: &str, lo: u64, hi: u64, y_limit: u64) -> PyResult<String> {
    let which = match which {
        "prop2" => Which::Prop2,
        "theorem" => Which::Theorem,
        "structure" => Which::Structure,
        "oracle" => Which::Oracle,
        other => return Err(PyValueError::new_err(format!("unknown sweep {other:?}"))),
    };
    if lo > hi {
        return Err(PyValueError::new_err(format!("empty range: {lo} > {hi}")));
    }
    let budget = OracleBudget::new(y_limit, 2).map_err(py_err)?;
    let report = which.run(lo, hi, budget);
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
#[pyo3(signature = (n, y_limit))]
fn brute_force_pell(n: BigUint, y_limit: u64) -> PyResult<Option<(BigUint, BigUint, i8)>> {
    let budget = OracleBudget::new(y_limit, 1).map_err(py_err)?;
    Ok(oracle::brute_force_pell(&n, budget).map(|s| (s.x, s.y, s.sign.as_i8())))
}

#[pyfunction]
fn cf_step_count(n: BigUint) -> PyResult<u64> {
    oracle::cf_step_count(&n).map_err(py_err)
}

#[pymodule]
fn pychakravala(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStep>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_both_branches, m)?)?;
    m.add_function(wrap_pyfunction!(select_best, m)?)?;
    m.add_function(wrap_pyfunction!(is_best, m)?)?;
    m.add_function(wrap_pyfunction!(is_step, m)?)?;
    m.add_function(wrap_pyfunction!(is_reduced, m)?)?;
    m.add_function(wrap_pyfunction!(successor, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_steps, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_pell, m)?)?;
    m.add_function(wrap_pyfunction!(cf_step_count, m)?)?;
    Ok(())
}
