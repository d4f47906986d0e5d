//! Python bindings: the convex-function and simple-set primitives, the
//! run/compare/check/oracle entry points over TOML config strings, and the
//! Perron estimation utility.

use ndarray::{Array1, Array2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use drfp::convex::{polyak_step, ConvexFunction, SimpleSet};
use drfp::graph::{check_joint_connectivity, estimate_pi, GraphSequence, WeightMatrix};
use drfp::harness::{compare_dgd_drfp, run, RunConfig};
use drfp::oracle::solve_centralized;

fn err(e: drfp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_array(v: Vec<f64>) -> Array1<f64> {
    Array1::from_vec(v)
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut flat = Vec::with_capacity(n * cols);
    for row in &rows {
        if row.len() != cols {
            return Err(PyValueError::new_err("ragged matrix"));
        }
        flat.extend_from_slice(row);
    }
    Array2::from_shape_vec((n, cols), flat).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// A convex function with an exact subgradient oracle.
#[pyclass(name = "ConvexFunction", module = "drfp_py", from_py_object)]
#[derive(Clone)]
struct PyConvexFunction {
    inner: ConvexFunction,
}

#[pymethods]
impl PyConvexFunction {
    /// a'y + b
    #[staticmethod]
    fn affine(a: Vec<f64>, b: f64) -> Self {
        PyConvexFunction {
            inner: ConvexFunction::affine(to_array(a), b),
        }
    }

    /// 0.5 y'Py + a'y + b with P positive semidefinite
    #[staticmethod]
    fn quadratic(p: Vec<Vec<f64>>, a: Vec<f64>, b: f64) -> PyResult<Self> {
        Ok(PyConvexFunction {
            inner: ConvexFunction::quadratic(to_matrix(p)?, to_array(a), b).map_err(err)?,
        })
    }

    /// ||y - center|| - radius
    #[staticmethod]
    fn norm_shift(center: Vec<f64>, radius: f64) -> Self {
        PyConvexFunction {
            inner: ConvexFunction::norm_shift(to_array(center), radius),
        }
    }

    /// pointwise max; ties resolve to the lowest branch index
    #[staticmethod]
    fn max_of(branches: Vec<PyConvexFunction>) -> PyResult<Self> {
        Ok(PyConvexFunction {
            inner: ConvexFunction::max_of(branches.into_iter().map(|b| b.inner).collect())
                .map_err(err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn evaluate(&self, y: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&to_array(y)).map_err(err)
    }

    fn subgradient(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.subgradient(&to_array(y)).map_err(err)?.to_vec())
    }

    /// One Polyak step against this function's zero-sublevel set.
    fn polyak_step(&self, y: Vec<f64>, beta: f64, fallback: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(
            polyak_step(&self.inner, &to_array(y), beta, &to_array(fallback))
                .map_err(err)?
                .to_vec(),
        )
    }

    fn __repr__(&self) -> String {
        format!("ConvexFunction(dimension={})", self.inner.dimension())
    }
}

/// A closed convex set with a cheap Euclidean projection.
#[pyclass(name = "SimpleSet", module = "drfp_py", from_py_object)]
#[derive(Clone)]
struct PySimpleSet {
    inner: SimpleSet,
}

#[pymethods]
impl PySimpleSet {
    #[staticmethod]
    #[pyo3(name = "box")]
    fn box_set(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(PySimpleSet {
            inner: SimpleSet::box_set(to_array(lower), to_array(upper)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(PySimpleSet {
            inner: SimpleSet::ball(to_array(center), radius).map_err(err)?,
        })
    }

    /// a'y <= b
    #[staticmethod]
    fn half_space(a: Vec<f64>, b: f64) -> PyResult<Self> {
        Ok(PySimpleSet {
            inner: SimpleSet::half_space(to_array(a), b).map_err(err)?,
        })
    }

    #[staticmethod]
    fn intersection(pieces: Vec<PySimpleSet>) -> PyResult<Self> {
        Ok(PySimpleSet {
            inner: SimpleSet::intersection(pieces.into_iter().map(|p| p.inner).collect())
                .map_err(err)?,
        })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn project(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.project(&to_array(y)).map_err(err)?.to_vec())
    }

    #[pyo3(signature = (y, tol = 1e-9))]
    fn contains(&self, y: Vec<f64>, tol: f64) -> bool {
        self.inner.contains(&to_array(y), tol)
    }

    fn violation(&self, y: Vec<f64>) -> f64 {
        self.inner.violation(&to_array(y))
    }

    fn __repr__(&self) -> String {
        format!("SimpleSet(dimension={})", self.inner.dimension())
    }
}

/// Result of one seeded run.
#[pyclass(name = "RunResult", module = "drfp_py")]
struct PyRunResult {
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    rounds_executed: u64,
    /// Final decision block of every node.
    #[pyo3(get)]
    final_x: Vec<Vec<f64>>,
    /// Full final state of every node (x and, for the epigraph algorithm, t).
    #[pyo3(get)]
    final_theta: Vec<Vec<f64>>,
    /// Trace rows (k, zeta, max_consensus, max_feasibility, gap).
    #[pyo3(get)]
    trace: Vec<(u64, f64, f64, f64, f64)>,
    /// The run summary as a JSON string.
    #[pyo3(get)]
    summary_json: String,
}

/// Execute one run from a TOML config string; `seed` overrides the
/// configured seed list.
#[pyfunction]
#[pyo3(signature = (config_toml, seed = None))]
fn run_toml(config_toml: &str, seed: Option<u64>) -> PyResult<PyRunResult> {
    let cfg = RunConfig::from_toml_str(config_toml).map_err(err)?;
    let m = cfg.build().map_err(err)?.problem.m();
    let seed = seed.unwrap_or_else(|| cfg.run.seeds.first().copied().unwrap_or(0));
    let out = run(&cfg, seed).map_err(err)?;
    Ok(PyRunResult {
        seed,
        rounds_executed: out.summary.rounds_executed,
        final_x: out.final_x(m).into_iter().map(|x| x.to_vec()).collect(),
        final_theta: out
            .final_states
            .iter()
            .map(|st| st.theta.to_vec())
            .collect(),
        trace: out
            .trace
            .iter()
            .map(|r| (r.k, r.zeta, r.max_consensus, r.max_feasibility, r.gap))
            .collect(),
        summary_json: serde_json::to_string(&out.summary)
            .map_err(|e| PyValueError::new_err(e.to_string()))?,
    })
}

/// Run the baseline and the algorithm side by side on a static-graph config
/// and return the comparison report as a JSON string.
#[pyfunction]
fn compare_toml(config_toml: &str) -> PyResult<String> {
    let cfg = RunConfig::from_toml_str(config_toml).map_err(err)?;
    let report = compare_dgd_drfp(&cfg).map_err(err)?;
    serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Joint-connectivity verdict for the configured graph sequence.
#[pyfunction]
#[pyo3(signature = (config_toml, horizon = None))]
fn check_graph_toml(config_toml: &str, horizon: Option<u64>) -> PyResult<bool> {
    let cfg = RunConfig::from_toml_str(config_toml).map_err(err)?;
    let built = cfg.build().map_err(err)?;
    let b = built.sequence.b_window();
    let horizon = horizon.unwrap_or_else(|| {
        match built.sequence.period() {
            Some(period) => (period + b) as u64,
            None => cfg.run.rounds.min(10_000),
        }
        .max(b as u64)
    });
    Ok(check_joint_connectivity(&built.sequence, b, horizon))
}

/// Centralized solution (x*, F*) of the configured instance.
#[pyfunction]
fn oracle_toml(config_toml: &str) -> PyResult<(Vec<f64>, f64)> {
    let cfg = RunConfig::from_toml_str(config_toml).map_err(err)?;
    let built = cfg.build().map_err(err)?;
    let sol = solve_centralized(&built.problem, cfg.run.oracle_tol).map_err(err)?;
    Ok((sol.x_star.to_vec(), sol.value))
}

/// Estimate the Perron (absolute-probability) vector of a static
/// row-stochastic matrix; returns the vector and the achieved residual.
#[pyfunction]
#[pyo3(signature = (matrix, gamma, tol = 1e-10, max_window = 2000))]
fn estimate_pi_static(
    matrix: Vec<Vec<f64>>,
    gamma: f64,
    tol: f64,
    max_window: u64,
) -> PyResult<(Vec<f64>, f64)> {
    let wm = WeightMatrix::from_matrix(to_matrix(matrix)?, gamma).map_err(err)?;
    let est = estimate_pi(&GraphSequence::fixed(wm), 0, tol, max_window);
    Ok((est.pi.to_vec(), est.residual))
}

#[pymodule]
fn drfp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConvexFunction>()?;
    m.add_class::<PySimpleSet>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run_toml, m)?)?;
    m.add_function(wrap_pyfunction!(compare_toml, m)?)?;
    m.add_function(wrap_pyfunction!(check_graph_toml, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_toml, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_pi_static, m)?)?;
    Ok(())
}
