//! Python bindings. Structured results come back as plain dicts and
//! lists; exact rationals inside them are ints or `"p/q"` strings, while
//! rate vectors and gap values are returned as `fractions.Fraction`.

use flexpool_core::planning::Objective;
use flexpool_core::rational::{self, Q};
use flexpool_core::sim::RunConfig;
use flexpool_core::{augmentation, decomposition, design, flow, planning, robustness, sim, Edge, Error};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyList, PyTuple};

create_exception!(flexpool, FlexpoolError, PyValueError, "Domain or input error raised by flexpool.");

fn err(e: Error) -> PyErr {
    FlexpoolError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).expect("serializable");
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

fn fraction(py: Python<'_>, x: &Q) -> PyResult<PyObject> {
    Ok(py.import_bound("fractions")?.getattr("Fraction")?.call1((x.to_string(),))?.unbind())
}

/// Accepts ints, `Fraction`s and `"p/q"` strings.
fn rate(v: &Bound<'_, PyAny>) -> PyResult<Q> {
    let text = v.str()?.to_string();
    if v.is_instance_of::<pyo3::types::PyFloat>() {
        return Err(FlexpoolError::new_err(format!("ParseRational: floats are not exact: {text}")));
    }
    rational::parse_q(&text).map_err(err)
}

fn rates(v: &Bound<'_, PyAny>) -> PyResult<Vec<Q>> {
    v.iter()?.map(|x| rate(&x?)).collect()
}

fn to_edge(v: &Bound<'_, PyAny>) -> PyResult<Edge> {
    let (i, j): (usize, usize) = v.extract()?;
    Ok(Edge::new(i, j))
}

fn objective(v: &Bound<'_, PyAny>) -> PyResult<Objective> {
    if let Ok(name) = v.extract::<String>() {
        return match name.as_str() {
            "sum" => Ok(Objective::Sum),
            "final" => Ok(Objective::Final),
            other => Err(FlexpoolError::new_err(format!("InvalidObjective: unknown objective {other:?}"))),
        };
    }
    let rows: Vec<Bound<'_, PyAny>> = v.extract()?;
    Ok(Objective::Tables(rows.iter().map(rates).collect::<PyResult<_>>()?))
}

/// A supply/demand instance: rates on both sides plus compatible pairs.
#[pyclass(name = "Instance", module = "flexpool", frozen)]
#[derive(Clone)]
struct PyInstance {
    inner: flexpool_core::ProblemInstance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (demand, supply, edges = None))]
    fn new(demand: &Bound<'_, PyAny>, supply: &Bound<'_, PyAny>, edges: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let edges: Vec<Edge> = match edges {
            Some(es) => es.iter()?.map(|e| to_edge(&e?)).collect::<PyResult<_>>()?,
            None => Vec::new(),
        };
        let inner = flexpool_core::ProblemInstance::new(rates(demand)?, rates(supply)?, edges).map_err(err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        flexpool_core::ProblemInstance::from_json_str(text).map(|inner| PyInstance { inner }).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("serializable")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn demand(&self, py: Python<'_>) -> PyResult<Vec<PyObject>> {
        self.inner.demand().iter().map(|x| fraction(py, x)).collect()
    }

    #[getter]
    fn supply(&self, py: Python<'_>) -> PyResult<Vec<PyObject>> {
        self.inner.supply().iter().map(|x| fraction(py, x)).collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().iter().map(|e| (e.i, e.j)).collect()
    }

    fn with_edge(&self, edge: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(PyInstance { inner: self.inner.with_edge(to_edge(edge)?).map_err(err)? })
    }

    fn is_feasible(&self) -> bool {
        flow::is_feasible(&self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Instance(m={}, n={}, edges={})", self.inner.m(), self.inner.n(), self.inner.edges().len())
    }
}

#[pyfunction]
fn decompose(py: Python<'_>, inst: &PyInstance) -> PyResult<PyObject> {
    let dec = decomposition::crp_decomposition(&inst.inner).map_err(err)?;
    let dag = decomposition::crp_graph(&dec).map_err(err)?;
    let mut v = dec.to_json();
    v["dag"] = dag.to_json();
    v["ssc_basis"] = serde_json::json!(decomposition::ssc_basis(&dec, inst.inner.m()));
    to_py(py, &v)
}

#[pyfunction]
fn redundant_edges(inst: &PyInstance) -> PyResult<Vec<(usize, usize)>> {
    let red = decomposition::redundant_edges(&inst.inner).map_err(err)?;
    Ok(red.into_iter().map(|e| (e.i, e.j)).collect())
}

#[pyfunction]
fn erp_number(inst: &PyInstance) -> PyResult<usize> {
    decomposition::crp_decomposition(&inst.inner).map(|d| d.erp()).map_err(err)
}

#[pyfunction]
fn d_star(demand: &Bound<'_, PyAny>, supply: &Bound<'_, PyAny>) -> PyResult<usize> {
    design::d_star(&rates(demand)?, &rates(supply)?).map_err(err)
}

#[pyfunction]
fn d_star_star(demand: &Bound<'_, PyAny>, supply: &Bound<'_, PyAny>) -> PyResult<usize> {
    design::d_star_star(&rates(demand)?, &rates(supply)?).map_err(err)
}

#[pyfunction]
fn min_edges(demand: &Bound<'_, PyAny>, supply: &Bound<'_, PyAny>, erp: usize) -> PyResult<usize> {
    design::min_edges(&rates(demand)?, &rates(supply)?, erp).map_err(err)
}

/// Sparsest graph on the given rates with ERP number `erp`.
#[pyfunction]
fn design_flexibility(py: Python<'_>, demand: &Bound<'_, PyAny>, supply: &Bound<'_, PyAny>, erp: usize) -> PyResult<PyObject> {
    let des = design::design_flexibility(&rates(demand)?, &rates(supply)?, erp).map_err(err)?;
    to_py(py, &des.to_json())
}

fn gap_dict(py: Python<'_>, g: &robustness::Gap) -> PyResult<PyObject> {
    let d = pyo3::types::PyDict::new_bound(py);
    d.set_item("value", g.value.as_ref().map(|v| fraction(py, v)).transpose()?)?;
    d.set_item("argmin", g.argmin.clone())?;
    Ok(d.into_any().unbind())
}

/// `{"value": Fraction | None, "argmin": [demands] | None}`.
#[pyfunction]
fn crp_gap(py: Python<'_>, inst: &PyInstance) -> PyResult<PyObject> {
    gap_dict(py, &robustness::crp_gap(&inst.inner).map_err(err)?)
}

#[pyfunction]
fn alt_crp_gap(py: Python<'_>, inst: &PyInstance) -> PyResult<PyObject> {
    gap_dict(py, &robustness::alt_crp_gap(&inst.inner).map_err(err)?)
}

#[pyfunction]
fn check_perturbation(py: Python<'_>, inst: &PyInstance, omega: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let chk = robustness::check_perturbation(&inst.inner, &rates(omega)?).map_err(err)?;
    to_py(py, &chk.to_json())
}

#[pyfunction]
fn add_edge_effect(py: Python<'_>, inst: &PyInstance, edge: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    let eff = augmentation::add_edge_effect_checked(&inst.inner, to_edge(edge)?).map_err(err)?;
    to_py(py, &eff.to_json())
}

#[pyfunction]
fn best_single_edge(py: Python<'_>, inst: &PyInstance) -> PyResult<PyObject> {
    let eff = augmentation::best_single_edge(&inst.inner).map_err(err)?;
    to_py(py, &eff.to_json())
}

/// Optimal plan for `eta` disjoint CRP components and `budget` steps.
/// `objective` is `"sum"`, `"final"` or a list of per-step cost rows.
#[pyfunction]
#[pyo3(signature = (eta, budget, objective = None))]
fn plan(py: Python<'_>, eta: usize, budget: usize, objective: Option<&Bound<'_, PyAny>>) -> PyResult<PyObject> {
    let obj = objective.map(self::objective).transpose()?.unwrap_or(Objective::Sum);
    to_py(py, &planning::plan_schedule(eta, budget, &obj).map_err(err)?.to_json())
}

#[pyfunction]
#[pyo3(signature = (inst, budget, objective = None))]
fn greedy_vs_optimal(py: Python<'_>, inst: &PyInstance, budget: usize, objective: Option<&Bound<'_, PyAny>>) -> PyResult<PyObject> {
    let obj = objective.map(self::objective).transpose()?.unwrap_or(Objective::Sum);
    to_py(py, &planning::greedy_vs_optimal_report(&inst.inner, budget, &obj).map_err(err)?.to_json())
}

/// ERP number after each edge of `edges` is added in turn.
#[pyfunction]
fn erp_trajectory(inst: &PyInstance, edges: &Bound<'_, PyList>) -> PyResult<Vec<usize>> {
    let seq: Vec<Option<Edge>> =
        edges.iter().map(|e| if e.is_none() { Ok(None) } else { to_edge(&e).map(Some) }).collect::<PyResult<_>>()?;
    planning::erp_trajectory(&inst.inner, &seq).map_err(err)
}

/// MaxWeight simulation; one dict per epsilon. Releases the GIL.
#[pyfunction]
#[pyo3(signature = (inst, epsilons, horizon = 1_000_000, warmup = None, replications = 5, seed = 0, heights = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    inst: &PyInstance,
    epsilons: Vec<f64>,
    horizon: u64,
    warmup: Option<u64>,
    replications: usize,
    seed: u64,
    heights: Option<Vec<u32>>,
) -> PyResult<Vec<PyObject>> {
    let cfg = RunConfig { horizon, warmup, replications, seed, heights };
    let inner = inst.inner.clone();
    let rows = py.allow_threads(|| sim::heavy_traffic_check(&inner, &epsilons, &cfg)).map_err(err)?;
    rows.iter().map(|r| to_py(py, &r.to_json())).collect()
}

/// Runs the command-line interface in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> PyResult<Py<PyTuple>> {
    let argv = std::iter::once("flexpool".to_string()).chain(args);
    let out = flexpool_core::cli::run(argv);
    Ok(PyTuple::new_bound(py, [out.code.into_py(py), out.stdout.into_py(py), out.stderr.into_py(py)]).unbind())
}

#[pymodule]
fn flexpool(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FlexpoolError", m.py().get_type_bound::<FlexpoolError>())?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(redundant_edges, m)?)?;
    m.add_function(wrap_pyfunction!(erp_number, m)?)?;
    m.add_function(wrap_pyfunction!(d_star, m)?)?;
    m.add_function(wrap_pyfunction!(d_star_star, m)?)?;
    m.add_function(wrap_pyfunction!(min_edges, m)?)?;
    m.add_function(wrap_pyfunction!(design_flexibility, m)?)?;
    m.add_function(wrap_pyfunction!(crp_gap, m)?)?;
    m.add_function(wrap_pyfunction!(alt_crp_gap, m)?)?;
    m.add_function(wrap_pyfunction!(check_perturbation, m)?)?;
    m.add_function(wrap_pyfunction!(add_edge_effect, m)?)?;
    m.add_function(wrap_pyfunction!(best_single_edge, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_vs_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(erp_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    m.add("SCHEMA_VERSION", flexpool_core::cli::SCHEMA_VERSION)?;
    Ok(())
}
