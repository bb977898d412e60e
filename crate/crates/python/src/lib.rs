//! Python module `movidx`: storyboards, the boolean text index, AST
//! partitioning, detectors and catalog ingest.
//!
//! Data errors raise `ValueError`, file errors raise `OSError`. Structured
//! reports (layout stats, benchmark results) come back as plain dicts.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use movidx::catalog::CatalogError;
use movidx::detectors::{tuples_from_tree, DetectorGrammar, DetectorRegistry, SyntheticFrame};
use movidx::storyboard::{character_type_for, validate_storyboard, Role};
use movidx::textindex::{run_benchmark, BenchConfig};
use movidx::{Document, QueryResult};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn catalog_err(e: CatalogError) -> PyErr {
    match e {
        CatalogError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

/// Serializes through JSON into native Python objects.
fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn hits(result: QueryResult) -> Vec<(String, u64)> {
    result.hits.into_iter().map(|h| (h.doc_id, h.score)).collect()
}

fn documents(docs: Vec<(String, String)>) -> Vec<Document> {
    docs.into_iter().map(|(id, text)| Document::new(id, text)).collect()
}

/// Canonical form of a story address, e.g. `"B1, M2"` -> `"B1,M2"`.
#[pyfunction]
fn parse_address(text: &str) -> PyResult<String> {
    movidx::parse_address(text).map(|a| a.to_string()).map_err(value_err)
}

#[pyfunction]
fn character_type(story_type: &str) -> PyResult<&'static str> {
    character_type_for(story_type).map_err(value_err)
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    movidx::textindex::tokenize(text)
}

#[pyclass(name = "Storyboard", module = "movidx")]
struct PyStoryboard(movidx::Storyboard);

#[pymethods]
impl PyStoryboard {
    #[new]
    fn new(main_problem: &str, story_type: &str) -> Self {
        PyStoryboard(movidx::Storyboard::new(main_problem, story_type))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        movidx::Storyboard::from_json(text).map(PyStoryboard).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        movidx::catalog::load_storyboard(path).map(PyStoryboard).map_err(catalog_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn main_problem(&self) -> String {
        self.0.main_problem.clone()
    }

    #[getter]
    fn story_type(&self) -> String {
        self.0.story_type.clone()
    }

    /// Adds a stage-1 unit; `role` is "B", "M" or "E".
    #[pyo3(signature = (role, narrative, problem=None))]
    fn add_root(&mut self, role: &str, narrative: &str, problem: Option<&str>) -> PyResult<String> {
        let role = parse_role(role)?;
        self.0
            .add_root(role, problem, narrative)
            .map(|a| a.to_string())
            .map_err(value_err)
    }

    #[pyo3(signature = (parent, role, narrative, problem=None))]
    fn expand(&mut self, parent: &str, role: &str, narrative: &str, problem: Option<&str>) -> PyResult<String> {
        let parent = movidx::parse_address(parent).map_err(value_err)?;
        let role = parse_role(role)?;
        self.0
            .expand_unit(&parent, role, problem, narrative)
            .map(|a| a.to_string())
            .map_err(value_err)
    }

    /// `(address, problem, narrative, instantiated)` for one unit.
    fn get_unit(&self, address: &str) -> PyResult<(String, Option<String>, String, bool)> {
        let addr = movidx::parse_address(address).map_err(value_err)?;
        let u = self.0.get_unit(&addr).map_err(value_err)?;
        Ok((u.address.to_string(), u.problem.clone(), u.narrative.clone(), u.instantiated))
    }

    /// Violation messages; empty when valid.
    fn validate(&self) -> Vec<String> {
        validate_storyboard(&self.0).iter().map(ToString::to_string).collect()
    }

    /// `(id, text)` for every instantiated unit in pre-order.
    fn flatten(&self) -> PyResult<Vec<(String, String)>> {
        let docs = movidx::flatten_storyboard(&self.0).map_err(value_err)?;
        Ok(docs.into_iter().map(|d| (d.id, d.text)).collect())
    }

    fn __len__(&self) -> usize {
        self.0.units_preorder().len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

fn parse_role(text: &str) -> PyResult<Role> {
    let mut chars = text.chars();
    match (chars.next().and_then(Role::from_code), chars.next()) {
        (Some(role), None) => Ok(role),
        _ => Err(PyValueError::new_err(format!("role must be B, M or E, got {text:?}"))),
    }
}

#[pyclass(name = "Index", module = "movidx")]
struct PyIndex(movidx::InvertedIndex);

#[pymethods]
impl PyIndex {
    /// Builds an index from `(id, text)` pairs.
    #[staticmethod]
    fn build(docs: Vec<(String, String)>) -> PyResult<Self> {
        movidx::build_index(&documents(docs)).map(PyIndex).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        movidx::InvertedIndex::from_json(text).map(PyIndex).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        movidx::load_index(path).map(PyIndex).map_err(catalog_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        movidx::save_index(&self.0, path).map_err(catalog_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// `(doc_id, score)` hits, best first.
    #[pyo3(signature = (query, limit=None))]
    fn query(&self, query: &str, limit: Option<usize>) -> PyResult<Vec<(String, u64)>> {
        let q = movidx::parse_query(query).map_err(value_err)?;
        let mut out = hits(movidx::query_index(&self.0, &q));
        if let Some(k) = limit {
            out.truncate(k);
        }
        Ok(out)
    }

    fn postings(&self, term: &str) -> Vec<(String, u32)> {
        self.0
            .postings(term)
            .into_iter()
            .map(|(id, tf)| (id.to_string(), tf))
            .collect()
    }

    #[getter]
    fn doc_count(&self) -> u64 {
        self.0.doc_count()
    }

    #[getter]
    fn total_terms(&self) -> u64 {
        self.0.total_terms()
    }

    #[getter]
    fn doc_ids(&self) -> Vec<String> {
        self.0.doc_ids().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.term_count()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Linear-scan evaluation over `(id, text)` pairs; same result as `Index.query`.
#[pyfunction]
fn scan_query(docs: Vec<(String, String)>, query: &str) -> PyResult<Vec<(String, u64)>> {
    let q = movidx::parse_query(query).map_err(value_err)?;
    Ok(hits(movidx::scan_query(&documents(docs), &q)))
}

#[pyclass(name = "Layout", module = "movidx", frozen)]
struct PyLayout(movidx::PartitionLayout);

#[pymethods]
impl PyLayout {
    /// `(class, x, y, width, height)` per tile, column by column.
    #[getter]
    fn tiles(&self) -> Vec<(&'static str, u32, u32, u32, u32)> {
        self.0
            .tiles
            .iter()
            .map(|t| (t.class.name(), t.x, t.y, t.width, t.height))
            .collect()
    }

    /// Every derived symbol plus the tile list.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &movidx::verify_layout(&self.0))
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &movidx::layout_stats(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.tiles.len()
    }
}

#[pyfunction]
fn ast_partition(n: u32, width: u32, height: u32) -> PyResult<PyLayout> {
    movidx::ast_partition(n, width, height).map(PyLayout).map_err(value_err)
}

/// Runs the indexed-vs-scan benchmark; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (docs=50_000, vocab=5_000, queries=200, seed=7, threshold=10.0))]
fn run_bench<'py>(
    py: Python<'py>,
    docs: usize,
    vocab: usize,
    queries: usize,
    seed: u64,
    threshold: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let config = BenchConfig {
        doc_count: docs,
        vocab_size: vocab,
        queries,
        seed,
        threshold,
    };
    let report = py.detach(|| run_benchmark(&config)).map_err(value_err)?;
    to_py(py, &report)
}

/// Runs a grammar (JSON text) on a binary PGM frame.
/// Returns `(object_id, path, attribute, value)` tuples.
#[pyfunction]
#[pyo3(signature = (pgm, grammar, object_id, metadata=None, ast=None))]
fn detect(
    pgm: &[u8],
    grammar: &str,
    object_id: &str,
    metadata: Option<BTreeMap<String, String>>,
    ast: Option<u32>,
) -> PyResult<Vec<(String, String, String, String)>> {
    let frame = SyntheticFrame::parse_pgm(pgm).map_err(value_err)?;
    let grammar = DetectorGrammar::from_json(grammar).map_err(value_err)?;
    let registry = DetectorRegistry::builtin();
    registry.check(&grammar).map_err(value_err)?;
    let tree = registry
        .detect_object(&grammar, object_id, Some(&frame), &metadata.unwrap_or_default(), ast)
        .map_err(value_err)?;
    let tuples = tuples_from_tree(&tree).map_err(value_err)?;
    Ok(tuples
        .into_iter()
        .map(|t| (t.object_id, t.path, t.attribute, t.value))
        .collect())
}

/// Binary PGM bytes of a deterministic pseudo-random frame.
#[pyfunction]
fn synthetic_frame(seed: u64, width: u32, height: u32) -> PyResult<Vec<u8>> {
    SyntheticFrame::from_seed(seed, width, height)
        .map(|f| f.to_pgm())
        .map_err(value_err)
}

#[pyclass(name = "Catalog", module = "movidx")]
struct PyCatalog(movidx::Catalog);

#[pymethods]
impl PyCatalog {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        movidx::load_catalog(path).map(PyCatalog).map_err(catalog_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        movidx::Catalog::from_json(text).map(PyCatalog).map_err(catalog_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn storyboard(&self) -> PyStoryboard {
        PyStoryboard(self.0.storyboard.clone())
    }

    #[getter]
    fn fragment_ids(&self) -> Vec<String> {
        self.0.fragments.iter().map(|f| f.fragment_id.clone()).collect()
    }

    /// `(source, first, second)` for overlapping fragments.
    fn overlap_warnings(&self) -> Vec<(String, String, String)> {
        self.0
            .overlap_warnings()
            .into_iter()
            .map(|w| (w.source, w.first, w.second))
            .collect()
    }

    /// Storyboard plus detector documents in one index.
    #[pyo3(signature = (ast=None))]
    fn ingest(&self, py: Python<'_>, ast: Option<u32>) -> PyResult<PyIndex> {
        py.detach(|| movidx::ingest_pipeline(&self.0, ast))
            .map(PyIndex)
            .map_err(catalog_err)
    }
}

#[pymodule]
#[pyo3(name = "movidx")]
fn movidx_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStoryboard>()?;
    m.add_class::<PyIndex>()?;
    m.add_class::<PyLayout>()?;
    m.add_class::<PyCatalog>()?;
    m.add_function(wrap_pyfunction!(parse_address, m)?)?;
    m.add_function(wrap_pyfunction!(character_type, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(scan_query, m)?)?;
    m.add_function(wrap_pyfunction!(ast_partition, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_frame, m)?)?;
    Ok(())
}
