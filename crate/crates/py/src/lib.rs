//! Python bindings: models, events, the Monte Carlo engine, inequality
//! suites and the homeomorphism family.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;

use rswlab_core::error::Error;
use rswlab_core::events::parse_event;
use rswlab_core::homeo::{self, HomeoParams, LogProb};
use rswlab_core::models::ModelSpec;
use rswlab_core::verify::{self, Quantity, Report, Session};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A percolation model, parsed from strings such as `bernoulli:p=0.5`,
/// `fk:p=sd,q=2,domain=torus:32`, `diag` or `mixed-diag`.
#[pyclass(name = "Model", frozen)]
struct PyModel(ModelSpec);

#[pymethods]
impl PyModel {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(PyModel).map_err(err)
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label()
    }

    #[getter]
    fn p(&self) -> Option<f64> {
        self.0.p()
    }

    fn is_symmetric_associated(&self) -> bool {
        self.0.is_symmetric_associated()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("model serializes")
    }

    fn __repr__(&self) -> String {
        format!("Model('{}')", self.0.label())
    }
}

/// One Monte Carlo estimate with its Wilson interval.
#[pyclass(name = "Estimate", frozen)]
struct PyEstimate(verify::Estimate);

#[pymethods]
impl PyEstimate {
    #[getter]
    fn model(&self) -> &str {
        &self.0.model
    }
    #[getter]
    fn event(&self) -> &str {
        &self.0.event
    }
    #[getter]
    fn n(&self) -> Option<u32> {
        self.0.n
    }
    #[getter]
    fn rho(&self) -> Option<u32> {
        self.0.rho
    }
    #[getter]
    fn successes(&self) -> u64 {
        self.0.successes
    }
    #[getter]
    fn replicates(&self) -> u64 {
        self.0.replicates
    }
    #[getter]
    fn phat(&self) -> f64 {
        self.0.phat
    }
    #[getter]
    fn wilson_lo(&self) -> f64 {
        self.0.wilson_lo
    }
    #[getter]
    fn wilson_hi(&self) -> f64 {
        self.0.wilson_hi
    }
    #[getter]
    fn exact(&self) -> bool {
        self.0.exact
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("estimate serializes")
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate({} {} {}/{} [{:.6}, {:.6}])",
            self.0.model, self.0.event, self.0.successes, self.0.replicates, self.0.wilson_lo, self.0.wilson_hi
        )
    }
}

fn quantity(event: &str) -> PyResult<Quantity> {
    let spec = parse_event(event).map_err(err)?;
    let (n, rho) = rswlab_core::cli::describe_event(event);
    Ok(Quantity { label: event.to_string(), spec, n, rho })
}

/// Deterministic parallel estimator; results do not depend on `workers`.
#[pyclass(name = "Engine", frozen)]
struct PyEngine(verify::Engine);

#[pymethods]
impl PyEngine {
    #[new]
    #[pyo3(signature = (workers=None))]
    fn new(workers: Option<usize>) -> PyResult<Self> {
        let w = workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        verify::Engine::new(w).map(PyEngine).map_err(err)
    }

    #[getter]
    fn workers(&self) -> usize {
        self.0.workers()
    }

    #[pyo3(signature = (model, event, replicates=10_000, seed=0))]
    fn estimate(&self, py: Python<'_>, model: &PyModel, event: &str, replicates: u64, seed: u64) -> PyResult<PyEstimate> {
        let q = quantity(event)?;
        py.detach(|| self.0.estimate(&model.0, &q, replicates, seed)).map(PyEstimate).map_err(err)
    }

    /// Counts of each joint outcome pattern: bit `i` of the pattern index
    /// is event `i`.
    #[pyo3(signature = (model, events, replicates=10_000, seed=0))]
    fn estimate_joint(&self, py: Python<'_>, model: &PyModel, events: Vec<String>, replicates: u64, seed: u64) -> PyResult<Vec<u64>> {
        let specs = events.iter().map(|e| parse_event(e)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        py.detach(|| self.0.estimate_joint(&model.0, &specs, replicates, seed)).map(|j| j.patterns).map_err(err)
    }

    /// Runs an inequality suite at the given scales and returns its
    /// records (estimates, verdicts, checks) as dictionaries.
    #[pyo3(signature = (suite, model, scales, replicates=10_000, seed=0))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: &str,
        model: &PyModel,
        scales: Vec<u32>,
        replicates: u64,
        seed: u64,
    ) -> PyResult<Bound<'py, PyList>> {
        let report = py.detach(|| -> Result<Report, Error> {
            let mut s = Session::new(&self.0, model.0, replicates, seed);
            for &n in &scales {
                match suite {
                    "lemma31" => drop(verify::lemma31(&mut s, n)?),
                    "lemma42" => drop(verify::lemma42(&mut s, n)?),
                    "theorem1" => drop(verify::theorem1(&mut s, n, 2)?),
                    "star" => drop(verify::reduced_star(&mut s, n)?),
                    "uniform-arm" => drop(verify::uniform_arm_bound(&mut s, n, &verify::default_arm_family)?),
                    "trace" => drop(verify::renormalization_trace(&mut s, n)?),
                    "fk-nesting" => drop(verify::fk_nesting(&mut s, n)?),
                    "sqrt-trick" => drop(verify::sqrt_trick_check(&mut s, n)?),
                    other => return Err(Error::Parameter(format!("unknown suite {other:?}"))),
                }
            }
            Ok(s.report)
        });
        let report = report.map_err(err)?;
        let out = PyList::empty(py);
        for line in report.to_jsonl().lines() {
            out.append(json_loads(py, line)?)?;
        }
        Ok(out)
    }
}

/// Wilson score interval for `successes` out of `n`.
#[pyfunction]
fn wilson(successes: u64, n: u64) -> (f64, f64) {
    verify::wilson(successes, n)
}

/// `(ln f_i(x), ln(1 - f_i(x)))` for base `a`.
#[pyfunction]
#[pyo3(signature = (x, i, a=2000))]
fn homeo_f(x: f64, i: u32, a: u32) -> PyResult<(f64, f64)> {
    let y = homeo::f(HomeoParams::new(a, i).map_err(err)?, LogProb::from_prob(x));
    Ok((y.lp, y.lq))
}

/// `(ln ψ_ρ(x), ln(1 - ψ_ρ(x)))` with base 2000.
#[pyfunction]
fn psi(x: f64, rho: u32) -> PyResult<(f64, f64)> {
    let y = homeo::psi(rho, LogProb::from_prob(x)).map_err(err)?;
    Ok((y.lp, y.lq))
}

/// Exhaustive primal/dual crossing complementarity on `R(m, n)`;
/// returns `(passed, configurations)`.
#[pyfunction]
fn duality(py: Python<'_>, m: u32, n: u32) -> PyResult<(bool, u64)> {
    let rec = py.detach(|| verify::duality_suite(m, n, None, 0)).map_err(err)?;
    Ok((rec.passed, rec.total))
}

/// Runs the command line with `args` (without the program name) and
/// returns its exit code.
#[pyfunction]
fn main(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| rswlab_core::cli::run(std::iter::once("rswlab".to_string()).chain(args)))
}

#[pymodule]
fn rswlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyEngine>()?;
    m.add_function(wrap_pyfunction!(wilson, m)?)?;
    m.add_function(wrap_pyfunction!(homeo_f, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(duality, m)?)?;
    m.add_function(wrap_pyfunction!(main, m)?)?;
    Ok(())
}
