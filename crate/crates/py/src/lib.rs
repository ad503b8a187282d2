//! Python bindings.
//!
//! Matchings cross the boundary as lists of `(u, v)` vertex pairs and
//! weights as exact decimal or `p/q` strings.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use keg_core::engine::{max_cardinality_matching, max_weight_matching, GraphView};
use keg_core::enumeration::{k_best_weighted, CountTable, MaximumMatchingSampler, MAX_VERTEX_CAP};
use keg_core::equilibrium::{compute_swe, swe_relaxation, verify_ne, PolicyFamily, SearchLimits};
use keg_core::experiment::{build_instance, results_csv, run_campaign, ExperimentSettings};
use keg_core::generator::Distribution;
use keg_core::ia::{IaPolicy, InternationalAgent};
use keg_core::rational::{format_weight, parse_weight};
use keg_core::{CompatibilityGraph, Instance, KegError, Matching, Mode, StrategyProfile, Weight, WeightSystem};

fn err(e: KegError) -> PyErr {
    match e {
        KegError::UnknownPlayer(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_py(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_py(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_py(py),
        },
        Value::String(s) => s.into_py(py),
        Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new_bound(py, items).into_py(py)
        }
        Value::Object(o) => {
            let d = PyDict::new_bound(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_py(py)
        }
    })
}

fn parse_policy(s: &str) -> PyResult<IaPolicy> {
    s.parse().map_err(err)
}

/// Exchange instance: a partitioned compatibility graph with its weights.
#[pyclass(name = "Instance", module = "keg")]
#[derive(Clone)]
struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    /// Cardinality instance from labels, vertex owners and edges.
    #[new]
    fn new(players: Vec<String>, owners: Vec<usize>, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let g = CompatibilityGraph::new(players, owners, &edges).map_err(err)?;
        Ok(PyInstance { inner: Instance::cardinality(g) })
    }

    /// Weighted copy; `values[i]` is `(w_low, w_high)` for the i-th edge in
    /// sorted order, as decimal strings.
    fn weighted(&self, values: Vec<(String, String)>) -> PyResult<Self> {
        let vals = values
            .iter()
            .map(|(a, b)| Ok((parse_weight(a)?, parse_weight(b)?)))
            .collect::<Result<Vec<_>, KegError>>()
            .map_err(err)?;
        let ws = WeightSystem::weighted(&self.inner.graph, vals).map_err(err)?;
        Ok(PyInstance { inner: Instance::new(self.inner.graph.clone(), ws).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: Instance::from_json_str(s).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: Instance::read(path).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.write(path).map_err(err)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.weights.mode().as_str()
    }

    #[getter]
    fn players(&self) -> Vec<String> {
        self.inner.graph.labels().to_vec()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.graph.n_vertices()
    }

    /// Edges as `(u, v)` with `u < v`, in index order.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.graph.edges().map(|(_, e)| (e.u.0, e.v.0)).collect()
    }

    fn owner(&self, v: usize) -> PyResult<String> {
        let g = &self.inner.graph;
        if v >= g.n_vertices() {
            return Err(err(KegError::VertexOutOfRange(v)));
        }
        Ok(g.label(g.owner(keg_core::VertexId(v))).to_string())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(mode={}, players={}, vertices={}, edges={})",
            self.mode(),
            self.inner.graph.n_players(),
            self.inner.graph.n_vertices(),
            self.inner.graph.n_edges()
        )
    }
}

impl PyInstance {
    fn matching(&self, pairs: &[(usize, usize)]) -> PyResult<Matching> {
        Matching::from_pairs(&self.inner.graph, pairs).map_err(err)
    }

    fn welfare_weights(&self, view: &GraphView) -> Vec<Weight> {
        view.ids().iter().map(|&e| self.inner.weights.welfare_value(&self.inner.graph, e)).collect()
    }
}

/// A maximum matching: maximum cardinality or maximum welfare, by mode.
#[pyfunction]
fn max_matching(inst: &PyInstance) -> PyResult<Vec<(usize, usize)>> {
    let g = &inst.inner.graph;
    let view = GraphView::of_graph(g);
    let m = match inst.inner.weights.mode() {
        Mode::Cardinality => max_cardinality_matching(g, &view, &Matching::empty()),
        Mode::Weighted => max_weight_matching(g, &view, &inst.welfare_weights(&view)),
    }
    .map_err(err)?;
    Ok(m.pairs(g))
}

/// Number of matchings with `k` edges, or of maximum matchings when `k` is
/// omitted.
#[pyfunction]
#[pyo3(signature = (inst, k=None))]
fn count_matchings(inst: &PyInstance, k: Option<usize>) -> PyResult<String> {
    let view = GraphView::of_graph(&inst.inner.graph);
    let mut t = CountTable::with_cap(&view, MAX_VERTEX_CAP).map_err(err)?;
    Ok(match k {
        Some(k) => t.count(k),
        None => t.count_maximum(),
    }
    .to_string())
}

/// `n` maximum matchings drawn uniformly with replacement.
#[pyfunction]
#[pyo3(signature = (inst, n, seed=0))]
fn sample_maximum_matchings(inst: &PyInstance, n: usize, seed: u64) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let g = &inst.inner.graph;
    let view = GraphView::of_graph(g);
    let s = MaximumMatchingSampler::with_cap(&view, MAX_VERTEX_CAP).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| s.sample(g, &view, &mut rng).pairs(g)).collect())
}

/// The `k` heaviest matchings by welfare, as `(value, pairs)`.
#[pyfunction]
fn k_best(inst: &PyInstance, k: usize) -> PyResult<Vec<(String, Vec<(usize, usize)>)>> {
    let g = &inst.inner.graph;
    let view = GraphView::of_graph(g);
    let ranked = k_best_weighted(g, &view, &inst.welfare_weights(&view), k).map_err(err)?;
    Ok(ranked.iter().map(|(m, v)| (format_weight(v), m.pairs(g))).collect())
}

/// International matching chosen by `ia` for the internal parts of
/// `matching`.
#[pyfunction]
#[pyo3(signature = (inst, matching, ia="card"))]
fn ia_decision(inst: &PyInstance, matching: Vec<(usize, usize)>, ia: &str) -> PyResult<Vec<(usize, usize)>> {
    let g = &inst.inner.graph;
    let m = inst.matching(&matching)?;
    let profile = StrategyProfile::from_matching(g, &m);
    let out = parse_policy(ia)?.decide(g, &inst.inner.weights, &profile).map_err(err)?;
    Ok(out.pairs(g))
}

/// Equilibrium report for `matching`. `ia=None` assumes the friendliest IA.
#[pyfunction]
#[pyo3(signature = (inst, matching, ia=None, max_iterations=10_000))]
fn verify(
    py: Python<'_>,
    inst: &PyInstance,
    matching: Vec<(usize, usize)>,
    ia: Option<&str>,
    max_iterations: usize,
) -> PyResult<PyObject> {
    let m = inst.matching(&matching)?;
    let policy = ia.map(parse_policy).transpose()?;
    let family = match &policy {
        None => PolicyFamily::ExistsFriendly,
        Some(p) => PolicyFamily::Fixed(p),
    };
    let g = &inst.inner.graph;
    let report = verify_ne(g, &inst.inner.weights, &m, family, SearchLimits { max_iterations }).map_err(err)?;
    to_py(py, &report.to_json(g))
}

/// A maximum matching that is an equilibrium of the cardinality game under
/// `ia` (`card` or `lex`).
#[pyfunction]
#[pyo3(signature = (inst, ia="card"))]
fn social_welfare_equilibrium(inst: &PyInstance, ia: &str) -> PyResult<Vec<(usize, usize)>> {
    let g = &inst.inner.graph;
    let policy = parse_policy(ia)?;
    let seed = max_cardinality_matching(g, &GraphView::of_graph(g), &Matching::empty()).map_err(err)?;
    let tilde = compute_swe(g, &seed).map_err(err)?;
    Ok(swe_relaxation(g, &tilde, &policy).map_err(err)?.pairs(g))
}

/// Random instance from a distribution file.
#[pyfunction]
#[pyo3(signature = (dist, n, year, players=None, seed=0, mode="card"))]
fn generate(
    dist: &str,
    n: usize,
    year: u16,
    players: Option<Vec<String>>,
    seed: u64,
    mode: &str,
) -> PyResult<PyInstance> {
    let mode = match mode {
        "card" | "cardinality" => Mode::Cardinality,
        "weighted" => Mode::Weighted,
        _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
    };
    let d = Distribution::read(dist).map_err(err)?;
    let cfg = d.config(n, year, players, seed).map_err(err)?;
    Ok(PyInstance { inner: build_instance(&d, &cfg, mode, None).map_err(err)? })
}

/// Result table (CSV text) for a list of instances of one mode.
#[pyfunction]
#[pyo3(signature = (instances, budget=1000, seed=0, timing=false))]
fn run_experiments(instances: Vec<PyInstance>, budget: usize, seed: u64, timing: bool) -> PyResult<String> {
    let insts: Vec<Instance> = instances.into_iter().map(|i| i.inner).collect();
    let Some(mode) = insts.first().map(|i| i.weights.mode()) else {
        return Err(PyValueError::new_err("no instances"));
    };
    let settings = ExperimentSettings { budget, seed, timing, ..Default::default() };
    let rows = run_campaign(&insts, &settings).map_err(err)?;
    results_csv(&rows, mode).map_err(err)
}

#[pymodule]
fn keg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(max_matching, m)?)?;
    m.add_function(wrap_pyfunction!(count_matchings, m)?)?;
    m.add_function(wrap_pyfunction!(sample_maximum_matchings, m)?)?;
    m.add_function(wrap_pyfunction!(k_best, m)?)?;
    m.add_function(wrap_pyfunction!(ia_decision, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(social_welfare_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiments, m)?)?;
    Ok(())
}
