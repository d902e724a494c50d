//! Python bindings. Vertex indices are 1-based, as in the file formats.

use std::fmt::Display;

use nalgebra::DVector;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rigidkit::dynamics::{self, SimParams};
use rigidkit::graph::IntMatrix;
use rigidkit::{fixtures, henneberg, linearization, rigidity, shape_space};
use rigidkit::{DirectedGraph, EdgeLengthVector, FormationProblem, Framework};

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &IntMatrix) -> Vec<Vec<i64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn lengths(graph: &DirectedGraph, d: Vec<f64>) -> PyResult<EdgeLengthVector> {
    EdgeLengthVector::for_graph(graph, d).map_err(value_err)
}

#[pyclass(name = "Graph", module = "rigidkit_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: DirectedGraph,
}

#[pymethods]
impl PyGraph {
    /// `edges` are 1-based `(source, target)` pairs; the source observes the target.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = DirectedGraph::from_one_based(n, &edges).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::by_name(name)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown fixture `{name}`")))
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed, vertex_add_only = false))]
    fn random_henneberg(n: usize, seed: u64, vertex_add_only: bool) -> PyResult<(Self, String)> {
        if n < 2 {
            return Err(PyValueError::new_err("need at least 2 vertices"));
        }
        let seq = henneberg::random_sequence(n, seed, vertex_add_only);
        Ok((Self { inner: henneberg::apply_sequence(&seq) }, seq.to_text()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges_one_based()
    }

    fn mixed_adjacency(&self) -> Vec<Vec<i64>> {
        rows(&self.inner.mixed_adjacency_matrix())
    }

    fn edge_adjacency(&self) -> Vec<Vec<i64>> {
        rows(&self.inner.edge_adjacency_matrix())
    }

    fn is_laman(&self) -> bool {
        rigidity::pebble_game_laman(&self.inner)
    }

    #[pyo3(signature = (seed = 0))]
    fn analyze<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = rigidity::analyze(&self.inner, seed).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("n", r.n)?;
        d.set_item("m", r.m)?;
        d.set_item("rank", r.rank)?;
        d.set_item("is_laman", r.is_laman)?;
        d.set_item("is_infinitesimally_rigid", r.is_infinitesimally_rigid)?;
        d.set_item("is_minimally_rigid", r.is_minimally_rigid)?;
        d.set_item("is_redundantly_rigid", r.is_redundantly_rigid)?;
        d.set_item("vertex_connectivity", r.vertex_connectivity)?;
        d.set_item("is_generically_globally_rigid", r.is_generically_globally_rigid)?;
        d.set_item("singular_values", r.singular_values)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={:?})", self.inner.n(), self.inner.edges_one_based())
    }
}

#[pyclass(name = "Framework", module = "rigidkit_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFramework {
    inner: Framework,
}

#[pymethods]
impl PyFramework {
    #[new]
    fn new(graph: &PyGraph, positions: Vec<(f64, f64)>) -> PyResult<Self> {
        let inner = Framework::from_xy(graph.inner.clone(), &positions).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph { inner: self.inner.graph().clone() }
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.positions().iter().map(|p| (p.x, p.y)).collect()
    }

    fn state(&self) -> Vec<f64> {
        self.inner.state().iter().copied().collect()
    }

    fn edge_lengths(&self) -> Vec<f64> {
        self.inner.edge_lengths()
    }

    fn mirror(&self) -> Self {
        Self { inner: shape_space::mirror(&self.inner) }
    }

    #[pyo3(signature = (other, allow_reflection = false, rel_tol = 1e-9))]
    fn is_congruent(&self, other: &PyFramework, allow_reflection: bool, rel_tol: f64) -> PyResult<bool> {
        shape_space::are_congruent(&self.inner, &other.inner, allow_reflection, rel_tol).map_err(value_err)
    }

    /// The four frameworks `f, R1 f, R2 f, R1 R2 f` of a 2-cycles framework.
    fn symmetry_orbit(&self) -> PyResult<Vec<PyFramework>> {
        let orbit = shape_space::symmetry_orbit(&self.inner).map_err(value_err)?;
        Ok(orbit.into_iter().map(|inner| Self { inner }).collect())
    }

    fn __repr__(&self) -> String {
        format!("Framework(n={}, positions={:?})", self.inner.n(), self.positions())
    }
}

/// Non-congruent frameworks of a vertex-add-constructible graph with edge lengths `d`.
#[pyfunction]
#[pyo3(signature = (graph, d, rel_tol = 1e-6))]
fn enumerate_frameworks(graph: &PyGraph, d: Vec<f64>, rel_tol: f64) -> PyResult<Vec<PyFramework>> {
    let d = lengths(&graph.inner, d)?;
    let found = shape_space::enumerate_frameworks(&graph.inner, &d, rel_tol).map_err(value_err)?;
    Ok(found.into_iter().map(|inner| PyFramework { inner }).collect())
}

/// Realizes `graph` along its vertex-add order, one bool per added vertex.
#[pyfunction]
fn realize(graph: &PyGraph, d: Vec<f64>, choices: Vec<bool>) -> PyResult<PyFramework> {
    let d = lengths(&graph.inner, d)?;
    let order = henneberg::find_vertex_add_order(&graph.inner)
        .map_err(value_err)?
        .ok_or_else(|| PyValueError::new_err("graph is not vertex-add constructible"))?;
    let inner = henneberg::realize_graph(&graph.inner, &order, &d, &choices).map_err(value_err)?;
    Ok(PyFramework { inner })
}

#[pyclass(name = "FormationProblem", module = "rigidkit_py", frozen)]
struct PyProblem {
    inner: FormationProblem,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (graph, d, gain = 1.0))]
    fn proportional(graph: &PyGraph, d: Vec<f64>, gain: f64) -> PyResult<Self> {
        let d = lengths(&graph.inner, d)?;
        let inner = FormationProblem::proportional(graph.inner.clone(), d, gain).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (graph, d, gain = 1.0, beta = 0.5))]
    fn angle_aware(graph: &PyGraph, d: Vec<f64>, gain: f64, beta: f64) -> PyResult<Self> {
        let d = lengths(&graph.inner, d)?;
        let inner = FormationProblem::angle_aware(graph.inner.clone(), d, gain, beta).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn is_compatible(&self) -> bool {
        dynamics::check_problem(&self.inner).is_compatible()
    }

    fn velocity(&self, state: Vec<f64>) -> PyResult<Vec<f64>> {
        let v = dynamics::vector_field_x(&self.inner, &DVector::from_vec(state)).map_err(value_err)?;
        Ok(v.iter().copied().collect())
    }

    #[pyo3(signature = (x0, step = 1e-3, t_max = 100.0, converge_tol = 1e-10, record_every = 100))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        x0: Vec<f64>,
        step: f64,
        t_max: f64,
        converge_tol: f64,
        record_every: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let params = SimParams { step, t_max, converge_tol, record_every };
        let x0 = DVector::from_vec(x0);
        let traj = py
            .detach(|| dynamics::simulate(&self.inner, &x0, &params))
            .map_err(value_err)?;
        let flat = |v: &Vec<DVector<f64>>| -> Vec<Vec<f64>> { v.iter().map(|x| x.iter().copied().collect()).collect() };
        let d = PyDict::new(py);
        d.set_item("times", &traj.times)?;
        d.set_item("states", flat(&traj.states))?;
        d.set_item("errors", flat(&traj.errors))?;
        d.set_item("termination", traj.termination.to_string())?;
        d.set_item("steps", traj.steps_taken)?;
        Ok(d)
    }

    #[pyo3(signature = (framework, threshold = linearization::DEFAULT_ZERO_THRESHOLD))]
    fn spectrum<'py>(&self, py: Python<'py>, framework: &PyFramework, threshold: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = linearization::spectrum_report(&self.inner, &framework.inner, threshold).map_err(value_err)?;
        let complex = |v: &[nalgebra::Complex<f64>]| -> Vec<(f64, f64)> { v.iter().map(|c| (c.re, c.im)).collect() };
        let d = PyDict::new(py);
        d.set_item("full_eigenvalues", complex(&r.full_eigenvalues))?;
        d.set_item("reduced_eigenvalues", complex(&r.reduced_eigenvalues))?;
        d.set_item("zero_multiplicity_full", r.zero_multiplicity_full)?;
        d.set_item("zero_multiplicity_reduced", r.zero_multiplicity_reduced)?;
        d.set_item("formula_multiplicity", r.formula_multiplicity())?;
        d.set_item("rank_bound", r.rank_bound())?;
        d.set_item("fd_max_deviation", r.fd_max_deviation)?;
        d.set_item("ab_ba_deviation", r.ab_ba_deviation)?;
        d.set_item("is_hurwitz_on_nonzero", r.is_hurwitz_on_nonzero())?;
        Ok(d)
    }
}

#[pymodule]
fn rigidkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyFramework>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(enumerate_frameworks, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    Ok(())
}
