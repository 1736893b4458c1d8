//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use cutforest::arena::build_coset_graph;
use cutforest::cubing;
use cutforest::cuts::{enumerate_cuts, extract_nested_generators};
use cutforest::graph::fixtures;
use cutforest::group::{fixture, FIXTURES};
use cutforest::relative::{self, RelativeSystem, Window};
use cutforest::tree::{self, canonical_decomposition};
use cutforest::Error;

create_exception!(pycutforest, TruncationError, PyException, "The arena is too small to decide the query.");
create_exception!(pycutforest, InvariantError, PyException, "An internal consistency check failed.");

fn err(e: Error) -> PyErr {
    match e {
        Error::Truncation(m) => TruncationError::new_err(m),
        Error::Invariant(_) | Error::Generation { .. } => InvariantError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graph", frozen, module = "pycutforest")]
struct PyGraph {
    inner: cutforest::Graph,
}

#[pymethods]
impl PyGraph {
    /// Edges are `(u, v)` or `(u, v, capacity)`.
    #[new]
    #[pyo3(signature = (vertices, edges, base=None))]
    fn new(vertices: Vec<String>, edges: Vec<Bound<'_, PyAny>>, base: Option<String>) -> PyResult<Self> {
        let mut es = Vec::with_capacity(edges.len());
        for e in edges {
            let edge = match e.extract::<(String, String, u32)>() {
                Ok(t) => t,
                Err(_) => {
                    let (u, v) = e.extract::<(String, String)>()?;
                    (u, v, 1)
                }
            };
            es.push(edge);
        }
        let inner = cutforest::Graph::new(&vertices, &es, base.as_deref()).map_err(err)?;
        Ok(PyGraph { inner })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::by_name(name)
            .map(|inner| PyGraph { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown graph fixture {name:?}")))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: cutforest::Graph::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.inner.ids().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(String, String, u32)> {
        let g = &self.inner;
        g.edges().iter().map(|e| (g.id(e.u).to_string(), g.id(e.v).to_string(), e.capacity)).collect()
    }

    fn cut_weight(&self, side: Vec<String>) -> PyResult<u64> {
        let c = self.inner.cut(&side).map_err(err)?;
        self.inner.cut_weight(&c).map_err(err)
    }

    fn coboundary(&self, side: Vec<String>) -> PyResult<Vec<(String, String)>> {
        let g = &self.inner;
        let c = g.cut(&side).map_err(err)?;
        Ok(g.coboundary(&c).map_err(err)?.iter().map(|e| (g.id(e.u).to_string(), g.id(e.v).to_string())).collect())
    }

    fn separates(&self, side: Vec<String>, u: &str, v: &str) -> PyResult<bool> {
        let c = self.inner.cut(&side).map_err(err)?;
        self.inner.separates(&c, u, v).map_err(err)
    }

    /// Cuts of weight at most `n`, each as the side avoiding the base.
    #[pyo3(signature = (n, connected=false))]
    fn cuts(&self, n: u64, connected: bool) -> PyResult<Vec<Vec<String>>> {
        let cuts = enumerate_cuts(&self.inner, n, connected).map_err(err)?;
        Ok(cuts.iter().map(|c| self.inner.names(c.set())).collect())
    }

    fn nested_generators(&self, n: u64) -> PyResult<Vec<Vec<String>>> {
        Ok(extract_nested_generators(&self.inner, n).map_err(err)?.to_spec().members)
    }

    fn structure_tree(&self, n: u64) -> PyResult<PyStructureTree> {
        Ok(PyStructureTree { inner: tree::structure_tree(&self.inner, n).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Graph({} vertices, {} edges)", self.inner.vertex_count(), self.inner.edges().len())
    }
}

#[pyclass(name = "StructureTree", frozen, module = "pycutforest")]
struct PyStructureTree {
    inner: tree::StructureTree,
}

#[pymethods]
impl PyStructureTree {
    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    /// `(inside, outside, member side)` per tree edge.
    #[getter]
    fn edges(&self) -> Vec<(usize, usize, Vec<String>)> {
        self.inner.to_spec().edges.into_iter().map(|e| (e.inside, e.outside, e.member)).collect()
    }

    fn nu(&self, vertex: &str) -> PyResult<usize> {
        Ok(self.inner.nu(self.inner.graph().index_of(vertex).map_err(err)?))
    }

    fn degree(&self, t: usize) -> usize {
        self.inner.degree(t)
    }

    /// Canonical expression of a cut given by its vertex ids.
    fn decompose<'py>(&self, py: Python<'py>, side: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
        let a = self.inner.graph().cut(&side).map_err(err)?;
        let e = canonical_decomposition(&a, &self.inner).map_err(err)?;
        to_py(py, &e.to_spec(&self.inner))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_spec())
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot()
    }
}

#[pyclass(name = "Arena", frozen, module = "pycutforest")]
struct PyArena {
    inner: cutforest::arena::Arena,
}

#[pymethods]
impl PyArena {
    /// Ball of the coset graph of a fixture group; `cayley` drops the subgroup.
    #[new]
    #[pyo3(signature = (group, radius, cayley=false))]
    fn new(group: &str, radius: usize, cayley: bool) -> PyResult<Self> {
        let mut oracle = fixture(group).map_err(err)?;
        if cayley {
            oracle = oracle.with_subgroup(&[]).map_err(err)?;
        }
        Ok(PyArena { inner: build_coset_graph(&oracle, radius).map_err(err)? })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.inner.graph().ids().to_vec()
    }

    fn word_ball(&self, radius: usize) -> PyResult<Vec<String>> {
        relative::word_ball(&self.inner, radius).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_spec())
    }

    #[pyo3(signature = (n=1))]
    fn relative(&self, n: u64) -> PyResult<PyRelative> {
        let rel = relative::relative_nested_system(&self.inner, n).map_err(err)?;
        Ok(PyRelative { arena: self.inner.clone(), rel })
    }
}

#[pyclass(name = "RelativeTree", frozen, module = "pycutforest")]
struct PyRelative {
    arena: cutforest::arena::Arena,
    rel: RelativeSystem,
}

impl PyRelative {
    fn side(&self, i: usize, complement: bool) -> PyResult<Window> {
        let ws = self.rel.wall_windows(&self.arena);
        let w = ws.get(i).ok_or_else(|| PyValueError::new_err(format!("no wall {i}; there are {}", ws.len())))?;
        Ok(if complement { w.complement() } else { w.clone() })
    }
}

#[pymethods]
impl PyRelative {
    /// Each wall as the vertex ids of its base-avoiding side.
    #[getter]
    fn walls(&self) -> Vec<Vec<String>> {
        self.rel.walls.iter().map(|w| relative::wall_names(&self.arena, &w.component)).collect()
    }

    fn walls_near_base(&self, radius: usize) -> Vec<usize> {
        relative::walls_near_base(&self.arena, &self.rel, radius)
    }

    #[getter]
    fn diameter(&self) -> usize {
        self.rel.tree_diameter()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.rel.tree.vertex_count()
    }

    fn base_fixed_by_h(&self) -> PyResult<bool> {
        self.rel.base_fixed_by_h(&self.arena).map_err(err)
    }

    #[pyo3(signature = (a, b, word, a_complement=false, b_complement=false))]
    fn corner<'py>(&self, py: Python<'py>, a: usize, b: usize, word: &str, a_complement: bool, b_complement: bool) -> PyResult<Bound<'py, PyAny>> {
        let k = relative::kropholler_corner(&self.arena, &self.side(a, a_complement)?, &self.side(b, b_complement)?, word);
        to_py(py, &k.map_err(err)?)
    }

    #[pyo3(signature = (a, b, word, a_complement=false, b_complement=false))]
    fn crossing<'py>(&self, py: Python<'py>, a: usize, b: usize, word: &str, a_complement: bool, b_complement: bool) -> PyResult<Bound<'py, PyAny>> {
        let c = relative::crossing_case(&self.arena, &self.side(a, a_complement)?, &self.side(b, b_complement)?, word);
        to_py(py, &c.map_err(err)?)
    }

    fn overlap<'py>(&self, py: Python<'py>, word: &str) -> PyResult<Bound<'py, PyAny>> {
        let o = relative::tree_overlap(&self.arena, &self.rel, word).map_err(err)?;
        to_py(py, &o.to_spec(&self.arena))
    }

    fn to_dot(&self) -> String {
        self.rel.tree.to_dot()
    }
}

#[pyclass(name = "MetricPoint", frozen, eq, hash, module = "pycutforest")]
#[derive(PartialEq, Eq, Hash)]
struct PyMetricPoint {
    inner: cubing::MetricPoint,
}

#[pymethods]
impl PyMetricPoint {
    #[new]
    #[pyo3(signature = (delta=Vec::new(), base="A"))]
    fn new(delta: Vec<String>, base: &str) -> Self {
        PyMetricPoint { inner: cubing::MetricPoint::with_delta(base, delta) }
    }

    #[getter]
    fn delta(&self) -> Vec<String> {
        self.inner.delta.iter().cloned().collect()
    }

    fn distance(&self, other: &PyMetricPoint) -> PyResult<usize> {
        cubing::metric_d(&self.inner, &other.inner).map_err(err)
    }

    /// `(b.c)` based at this point.
    fn gromov(&self, b: &PyMetricPoint, c: &PyMetricPoint) -> PyResult<f64> {
        Ok(cubing::gromov_product(&self.inner, &b.inner, &c.inner).map_err(err)?.0 as f64 / 2.0)
    }

    fn __repr__(&self) -> String {
        format!("MetricPoint({})", self.inner)
    }
}

/// Points and labelled edges of a Gamma ball.
#[pyfunction]
#[pyo3(signature = (labels, radius, center=Vec::new()))]
fn gamma_ball<'py>(py: Python<'py>, labels: Vec<String>, radius: usize, center: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let ball = cubing::gamma_ball(&cubing::MetricPoint::with_delta("A", center), radius, &labels).map_err(err)?;
    let points: Vec<String> = ball.points.iter().map(|p| p.to_string()).collect();
    let edges: Vec<(usize, usize, &String)> = ball.graph.edges().iter().zip(&ball.edge_labels).map(|(e, l)| (e.u, e.v, l)).collect();
    let far = ball.points.len().saturating_sub(1);
    to_py(py, &serde_json::json!({ "points": points, "edges": edges, "geodesics_to_last": ball.geodesic_count(0, far) }))
}

#[pyfunction]
fn zero_hyperbolicity<'py>(py: Python<'py>, points: Vec<PyRef<'py, PyMetricPoint>>) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<cubing::MetricPoint> = points.iter().map(|p| p.inner.clone()).collect();
    to_py(py, &cubing::zero_hyperbolicity_check(&pts).map_err(err)?)
}

/// Tree realizing an integer 0-hyperbolic distance matrix.
#[pyfunction]
fn z_tree<'py>(py: Python<'py>, distances: Vec<Vec<usize>>) -> PyResult<Bound<'py, PyAny>> {
    let t = cubing::build_z_tree(&distances).map_err(err)?;
    let edges: Vec<(usize, usize)> = t.graph.edges().iter().map(|e| (e.u, e.v)).collect();
    to_py(
        py,
        &serde_json::json!({
            "vertices": t.graph.vertex_count(),
            "edges": edges,
            "embedding": t.embedding,
            "branch_vertices": t.branch_vertices(),
            "distances": t.distance_matrix(),
        }),
    )
}

/// Orbit points `Ag` of the almost invariant set at the base of the Cayley
/// line tree of `group`, for words of length at most `words`.
#[pyfunction]
#[pyo3(signature = (group, words=3, radius=8))]
fn orbit_points(group: &str, words: usize, radius: usize) -> PyResult<Vec<PyMetricPoint>> {
    let arena = build_coset_graph(&fixture(group).map_err(err)?.with_subgroup(&[]).map_err(err)?, radius).map_err(err)?;
    let rel = relative::relative_nested_system(&arena, 1).map_err(err)?;
    let v = rel.base_vertex();
    let pair = *rel.tree.incident_pairs(v).first().ok_or_else(|| PyValueError::new_err("the base has no tree edge"))?;
    let a = cubing::AlmostInvariant::new(&arena, &rel.tree, pair, rel.tree.edges()[pair].inside != v, v).map_err(err)?;
    let ws = relative::word_ball(&arena, words).map_err(err)?;
    let pts = cubing::orbit_points(&a, &ws, radius.saturating_sub(words)).map_err(err)?;
    Ok(pts.into_iter().map(|inner| PyMetricPoint { inner }).collect())
}

#[pyfunction]
fn fixture_names() -> (Vec<&'static str>, Vec<&'static str>) {
    (fixtures::NAMES.to_vec(), FIXTURES.to_vec())
}

#[pymodule]
fn pycutforest(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyStructureTree>()?;
    m.add_class::<PyArena>()?;
    m.add_class::<PyRelative>()?;
    m.add_class::<PyMetricPoint>()?;
    m.add_function(wrap_pyfunction!(gamma_ball, m)?)?;
    m.add_function(wrap_pyfunction!(zero_hyperbolicity, m)?)?;
    m.add_function(wrap_pyfunction!(z_tree, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_points, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add("TruncationError", m.py().get_type::<TruncationError>())?;
    m.add("InvariantError", m.py().get_type::<InvariantError>())?;
    Ok(())
}
