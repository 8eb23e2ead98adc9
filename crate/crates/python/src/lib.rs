//! Python bindings: `import onerel`.
//!
//! Presentations and certificates are wrapped as opaque classes; everything
//! else crosses the boundary as strings, ints, lists and dicts.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use onerel::io::{emit_certificate, read_certificate, render_tree, run_batch};
use onerel::random::RandomPresentations;
use onerel::{
    build_best_tower, build_tower, parse_presentation, verify_certificate, BoundReport,
    CertificateNode, Registry,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A one-relator presentation `< generators | relator >`.
#[pyclass(name = "Presentation", module = "onerel", frozen)]
struct PyPresentation {
    inner: onerel::Presentation,
    // Fresh generators made while decomposing must not collide with ours.
    registry: Arc<Registry>,
}

#[pymethods]
impl PyPresentation {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let registry = Arc::new(Registry::new());
        let inner = parse_presentation(text, &registry).map_err(value_error)?;
        Ok(PyPresentation { inner, registry })
    }

    #[getter]
    fn generators(&self) -> Vec<String> {
        self.inner
            .generators()
            .iter()
            .map(|g| g.name().to_string())
            .collect()
    }

    /// The cyclically reduced relator.
    #[getter]
    fn relator(&self) -> String {
        self.inner.relator().to_string()
    }

    #[getter]
    fn relator_len(&self) -> usize {
        self.inner.relator_len()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[pyo3(signature = (all_pivots = false))]
    fn decompose(&self, all_pivots: bool) -> PyCertificate {
        let root = if all_pivots {
            build_best_tower(&self.inner, &self.registry)
        } else {
            build_tower(&self.inner, &self.registry)
        };
        PyCertificate { root }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Presentation('{}')", self.inner)
    }
}

/// A decomposition tree together with its bound.
#[pyclass(name = "Certificate", module = "onerel", frozen)]
struct PyCertificate {
    root: CertificateNode,
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let root = read_certificate(text, &Registry::new()).map_err(value_error)?;
        Ok(PyCertificate { root })
    }

    fn to_json(&self) -> String {
        emit_certificate(&self.root)
    }

    fn render(&self) -> String {
        render_tree(&self.root)
    }

    #[getter]
    fn tower_bound(&self) -> u32 {
        self.root.bound
    }

    #[getter]
    fn paper_bound(&self) -> usize {
        BoundReport::of(&self.root).paper_bound
    }

    /// Node kinds from the root down.
    #[getter]
    fn kinds(&self) -> Vec<&'static str> {
        self.root.path().map(|n| n.kind.tag()).collect()
    }

    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = BoundReport::of(&self.root);
        let d = PyDict::new(py);
        d.set_item("relator_length", r.relator_len)?;
        d.set_item("paper_bound", r.paper_bound)?;
        d.set_item("tower_bound", r.tower_bound)?;
        d.set_item("hnn_steps", r.hnn_steps)?;
        d.set_item("node_count", r.node_count)?;
        Ok(d)
    }

    /// Violations found by the independent checker; empty means valid.
    fn verify(&self) -> Vec<String> {
        violations(&self.root)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(input='{}', tower_bound={})",
            self.root.input, self.root.bound
        )
    }
}

fn violations(root: &CertificateNode) -> Vec<String> {
    verify_certificate(root)
        .violations
        .iter()
        .map(ToString::to_string)
        .collect()
}

#[pyfunction]
#[pyo3(signature = (text, all_pivots = false))]
fn decompose(text: &str, all_pivots: bool) -> PyResult<PyCertificate> {
    Ok(PyPresentation::new(text)?.decompose(all_pivots))
}

/// Checks a certificate document; returns its violations.
#[pyfunction]
fn verify_json(text: &str) -> PyResult<Vec<String>> {
    let root = read_certificate(text, &Registry::new()).map_err(value_error)?;
    Ok(violations(&root))
}

#[pyfunction]
fn ceil_half(n: usize) -> usize {
    onerel::ceil_half(n)
}

#[pyfunction]
#[pyo3(signature = (count, max_len, gens, seed = 0))]
fn random_presentations(count: usize, max_len: usize, gens: usize, seed: u64) -> PyResult<Vec<String>> {
    if max_len == 0 || gens == 0 {
        return Err(PyValueError::new_err("max_len and gens must be positive"));
    }
    let mut source = RandomPresentations::new(seed, gens, max_len);
    Ok((0..count).map(|_| source.next_text()).collect())
}

/// One dict per non-blank, non-comment line.
#[pyfunction]
#[pyo3(signature = (lines, all_pivots = false))]
fn batch<'py>(
    py: Python<'py>,
    lines: Vec<String>,
    all_pivots: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py.detach(|| run_batch(&lines, all_pivots));
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("input", r.input)?;
            d.set_item("relator_length", r.relator_length)?;
            d.set_item("paper_bound", r.paper_bound)?;
            d.set_item("tower_bound", r.tower_bound)?;
            d.set_item("verified", r.verified)?;
            d.set_item("error", r.error)?;
            Ok(d)
        })
        .collect()
}

#[pymodule(name = "onerel")]
fn onerel_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPresentation>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(verify_json, m)?)?;
    m.add_function(wrap_pyfunction!(ceil_half, m)?)?;
    m.add_function(wrap_pyfunction!(random_presentations, m)?)?;
    m.add_function(wrap_pyfunction!(batch, m)?)?;
    Ok(())
}
