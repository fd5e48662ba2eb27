//! Python bindings: normalization, association scores, alignment of focal
//! concepts over an in-memory corpus, and graph measures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use conceptualizer::assoc::{self, ContingencyTable};
use conceptualizer::corpus::{self, IndexedCorpus, LanguageId, Manifest, Normalizer, ParallelCorpus, Punctuation};
use conceptualizer::graph::{self, BipartiteGraph, Concept, PassParams};
use conceptualizer::{eval, langsim, measures, Error};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use rayon::prelude::*;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_input_error() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn language(code: &str) -> PyResult<LanguageId> {
    LanguageId::new(code).map_err(to_py_err)
}

fn normalizer(punctuation: Option<&str>) -> Normalizer {
    punctuation.map_or_else(Normalizer::default, |p| Normalizer::new(Punctuation::custom(p)))
}

/// Converts any serializable value to plain Python objects.
fn to_python<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    fn convert(py: Python<'_>, v: serde_json::Value) -> PyResult<Py<PyAny>> {
        use serde_json::Value;
        match v {
            Value::Null => Ok(py.None()),
            Value::Bool(b) => b.into_py_any(py),
            Value::Number(n) => match n.as_i64() {
                Some(i) => i.into_py_any(py),
                None => n.as_f64().unwrap_or(f64::NAN).into_py_any(py),
            },
            Value::String(s) => s.into_py_any(py),
            Value::Array(items) => {
                let list = PyList::empty(py);
                for item in items {
                    list.append(convert(py, item)?)?;
                }
                list.into_py_any(py)
            }
            Value::Object(map) => {
                let dict = PyDict::new(py);
                for (k, item) in map {
                    dict.set_item(k, convert(py, item)?)?;
                }
                dict.into_py_any(py)
            }
        }
    }
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    convert(py, v)
}

/// Lowercases, strips punctuation and marks word boundaries with `$`.
#[pyfunction]
#[pyo3(signature = (text, punctuation=None))]
fn normalize_text(text: &str, punctuation: Option<&str>) -> String {
    normalizer(punctuation).normalize(text).as_str().to_owned()
}

/// Pearson chi-square of a 2x2 table (`n11`: in both, `n00`: in neither).
#[pyfunction]
fn chi_square(n00: u64, n01: u64, n10: u64, n11: u64) -> f64 {
    assoc::chi_square(&ContingencyTable::new(n00, n01, n10, n11))
}

#[pyfunction]
fn lenient_match(a: &str, b: &str) -> bool {
    eval::lenient_match(a, b)
}

/// Cosine similarity; `None` when either vector is all zeros.
#[pyfunction]
fn c_sim(a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("vectors differ in length"));
    }
    Ok(langsim::c_sim(&a, &b))
}

/// Partial, strict and relaxed recall of `proposed` against `gold`, plus the
/// number of proposals matching nothing. `None` when `gold` is empty.
#[pyfunction]
fn recall_scores(py: Python<'_>, proposed: BTreeSet<String>, gold: BTreeSet<String>) -> PyResult<Py<PyAny>> {
    match eval::recall_scores(&proposed, &gold) {
        Some(s) => to_python(py, &s),
        None => Ok(py.None()),
    }
}

/// A verse-aligned corpus, normalized and indexed.
#[pyclass(module = "conceptualizer", frozen)]
struct Corpus {
    inner: IndexedCorpus,
}

#[pymethods]
impl Corpus {
    /// `texts` maps language codes to `{verse_id: raw_text}`.
    #[new]
    #[pyo3(signature = (source, texts, punctuation=None, max_len=8))]
    fn new(
        source: &str,
        texts: BTreeMap<String, BTreeMap<String, String>>,
        punctuation: Option<&str>,
        max_len: usize,
    ) -> PyResult<Self> {
        let n = normalizer(punctuation);
        let languages = texts
            .iter()
            .map(|(code, verses)| (code.as_str(), verses.iter().map(|(id, t)| (id.as_str(), t.as_str())).collect()));
        let corpus = ParallelCorpus::from_raw(source, languages, &n).map_err(to_py_err)?;
        Ok(Corpus { inner: IndexedCorpus::build(corpus, max_len) })
    }

    /// Loads the verse files listed in a TOML manifest.
    #[staticmethod]
    #[pyo3(signature = (path, max_len=8))]
    fn from_manifest(path: PathBuf, max_len: usize) -> PyResult<Self> {
        let m = Manifest::load(&path).map_err(to_py_err)?;
        let corpus = corpus::load_corpus(&m.source, &m.languages, &m.normalizer()).map_err(to_py_err)?;
        Ok(Corpus { inner: IndexedCorpus::build(corpus, max_len) })
    }

    #[getter]
    fn source(&self) -> String {
        self.inner.source().to_string()
    }

    fn languages(&self) -> Vec<String> {
        self.inner.languages().map(|l| l.to_string()).collect()
    }

    /// Normalized text of one verse, if present.
    fn verse(&self, language: &str, verse_id: &str) -> PyResult<Option<String>> {
        let idx = self.inner.index(&self::language(language)?).map_err(to_py_err)?;
        Ok(idx
            .position(&verse_id.into())
            .map(|p| idx.verse_text(p).as_str().to_owned()))
    }

    /// IDs of the verses containing any of `strings`.
    fn verses_containing(&self, language: &str, strings: BTreeSet<String>) -> PyResult<Vec<String>> {
        let idx = self.inner.index(&self::language(language)?).map_err(to_py_err)?;
        Ok(idx.verses_containing(&strings).into_iter().map(|v| v.as_str().to_owned()).collect())
    }

    /// Runs forward and backward passes for each concept (`{name: [strings]}`)
    /// and target language. Returns the merged graph and one report per pair.
    #[pyo3(signature = (concepts, languages=None, max_iterations=None, alpha=None))]
    fn align(
        &self,
        py: Python<'_>,
        concepts: BTreeMap<String, Vec<String>>,
        languages: Option<Vec<String>>,
        max_iterations: Option<usize>,
        alpha: Option<f64>,
    ) -> PyResult<(Graph, Py<PyAny>)> {
        let mut params = PassParams::default();
        if let Some(m) = max_iterations {
            params.max_iterations = m;
        }
        if let Some(a) = alpha {
            params.alpha = a;
        }
        let languages: BTreeSet<LanguageId> = match languages {
            Some(ls) => ls.iter().map(|l| self::language(l)).collect::<PyResult<_>>()?,
            None => self.inner.target_languages().cloned().collect(),
        };
        let concepts = concepts
            .into_iter()
            .map(|(name, strings)| Concept::focal(name, strings.iter().map(|s| s.chars().map(corpus::fold_case).collect::<String>())))
            .collect::<conceptualizer::Result<Vec<_>>>()
            .map_err(to_py_err)?;
        let corpus = &self.inner;
        let runs = py.detach(|| {
            concepts
                .par_iter()
                .map(|c| graph::run_concept(corpus, c, &languages, &params))
                .collect::<conceptualizer::Result<Vec<_>>>()
        });
        let mut merged = BipartiteGraph::new();
        let mut reports = Vec::new();
        for (g, r) in runs.map_err(to_py_err)? {
            merged.merge(g).map_err(to_py_err)?;
            reports.extend(r);
        }
        Ok((Graph { inner: merged }, to_python(py, &reports)?))
    }
}

/// The concept graph produced by alignment.
#[pyclass(module = "conceptualizer", frozen)]
struct Graph {
    inner: BipartiteGraph,
}

#[pymethods]
impl Graph {
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        BipartiteGraph::from_jsonl(text).map(|inner| Graph { inner }).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        BipartiteGraph::load(&path).map(|inner| Graph { inner }).map_err(to_py_err)
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py_err)
    }

    fn concepts(&self) -> Vec<String> {
        self.inner.focal_concepts().map(|c| c.name.clone()).collect()
    }

    /// Forward-pass strings per language for one concept.
    fn translations(&self, concept: &str) -> BTreeMap<String, Vec<String>> {
        self.inner
            .alignments_of(concept)
            .map(|(key, _)| (key.language.to_string(), key.strings.clone()))
            .collect()
    }

    /// Share of paths from `concept` that return to it, or `None` when it
    /// has no forward edges.
    fn stability(&self, py: Python<'_>, concept: &str) -> PyResult<Py<PyAny>> {
        match measures::stability(&self.inner, concept).map_err(to_py_err)? {
            Some(s) => to_python(py, &s),
            None => Ok(py.None()),
        }
    }

    /// `{node: (path_count, language_count)}` for every source node reached
    /// from `concept`.
    fn semantic_field(&self, concept: &str) -> PyResult<BTreeMap<String, (usize, usize)>> {
        let field = measures::semantic_field(&self.inner, concept).map_err(to_py_err)?;
        Ok(field
            .entries
            .iter()
            .map(|(id, e)| (id.to_string(), (e.path_count, e.language_count)))
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.forward_edges().count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(concepts={}, forward_edges={})", self.inner.focal_concepts().count(), self.__len__())
    }
}

#[pymodule(name = "conceptualizer")]
fn conceptualizer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize_text, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square, m)?)?;
    m.add_function(wrap_pyfunction!(lenient_match, m)?)?;
    m.add_function(wrap_pyfunction!(c_sim, m)?)?;
    m.add_function(wrap_pyfunction!(recall_scores, m)?)?;
    m.add_class::<Corpus>()?;
    m.add_class::<Graph>()?;
    Ok(())
}
