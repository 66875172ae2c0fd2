//! Python bindings: corpus loading, recommendation, metrics and evaluation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Cursor};
use std::sync::Arc;

use apirec_core::engine::{DEFAULT_K, DEFAULT_M, DEFAULT_N, DEFAULT_QUERY_SIZE, DEFAULT_SNIPPETS};
use apirec_core::evaluation as eval;
use apirec_core::synth::{self, SynthConfig};
use apirec_core::{
    load_snippets, parse_facts, ActiveQuery, Configuration, EvalConfig, FeatureVector, FoldScheme, Params,
    Vocabulary,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_error(e: apirec_core::Error) -> PyErr {
    match e {
        apirec_core::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => value_error(other),
    }
}

/// An immutable corpus of projects.
#[pyclass(frozen, module = "apirec")]
struct Corpus {
    inner: Arc<apirec_core::Corpus>,
}

#[pymethods]
impl Corpus {
    /// Reads a FACTS file and an optional SNIPPETS file.
    #[staticmethod]
    #[pyo3(signature = (facts, snippets=None))]
    fn load(facts: &str, snippets: Option<&str>) -> PyResult<Self> {
        let file = File::open(facts).map_err(|e| PyOSError::new_err(format!("{facts}: {e}")))?;
        let mut corpus = parse_facts(BufReader::new(file)).map_err(core_error)?;
        if let Some(path) = snippets {
            let file = File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
            corpus = corpus.with_snippets(load_snippets(BufReader::new(file)).map_err(core_error)?);
        }
        Ok(Self { inner: Arc::new(corpus) })
    }

    /// Parses FACTS text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let corpus = parse_facts(Cursor::new(text)).map_err(core_error)?;
        Ok(Self { inner: Arc::new(corpus) })
    }

    /// Seeded synthetic corpus.
    #[staticmethod]
    #[pyo3(signature = (projects=100, seed=0))]
    fn synthetic(projects: usize, seed: u64) -> PyResult<Self> {
        let corpus = synth::generate(&SynthConfig {
            projects,
            seed,
            ..SynthConfig::default()
        })
        .map_err(core_error)?;
        Ok(Self { inner: Arc::new(corpus) })
    }

    /// Pairs of near-identical projects; the second of each pair has one
    /// extra invocation.
    #[staticmethod]
    #[pyo3(signature = (pairs=10, seed=0))]
    fn planted_clones(pairs: usize, seed: u64) -> PyResult<Self> {
        let corpus = synth::planted_clone_corpus(pairs, seed).map_err(core_error)?;
        Ok(Self { inner: Arc::new(corpus) })
    }

    #[getter]
    fn projects(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn declarations(&self) -> usize {
        self.inner.declaration_total()
    }

    #[getter]
    fn vocabulary(&self) -> usize {
        self.inner.vocabulary().len()
    }

    fn project_ids(&self) -> Vec<String> {
        self.inner.projects().iter().map(|p| p.id.clone()).collect()
    }

    /// Declarations of a project as (name, invocations) pairs.
    fn project(&self, id: &str) -> PyResult<Vec<(String, Vec<String>)>> {
        let index = self
            .inner
            .project_index(id)
            .ok_or_else(|| value_error(format!("no project `{id}`")))?;
        Ok(self
            .inner
            .project(index)
            .declarations
            .iter()
            .map(|d| {
                let calls = d
                    .invocations()
                    .iter()
                    .map(|&i| self.inner.canonical(i).unwrap_or_default().to_owned())
                    .collect();
                (d.name.clone(), calls)
            })
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(projects={}, declarations={}, vocabulary={})",
            self.inner.len(),
            self.inner.declaration_total(),
            self.inner.vocabulary().len()
        )
    }
}

/// Recommender over every project of a corpus.
#[pyclass(frozen, module = "apirec")]
struct Recommender {
    inner: apirec_core::Recommender,
}

type Context = Vec<(String, Vec<String>)>;

impl Recommender {
    fn query(&self, context: &Context, active_name: &str, active: &[String]) -> PyResult<ActiveQuery> {
        ActiveQuery::from_strings(self.inner.corpus(), "<python>", context, (active_name, active))
            .map_err(core_error)
    }
}

#[pymethods]
impl Recommender {
    #[new]
    fn new(corpus: &Corpus) -> Self {
        Self {
            inner: apirec_core::Recommender::new(Arc::clone(&corpus.inner)),
        }
    }

    /// Ranked (invocation, score) pairs for the active declaration.
    #[pyo3(signature = (context, active_name, active, k=DEFAULT_K, m=DEFAULT_M, n=DEFAULT_N))]
    #[allow(clippy::too_many_arguments)]
    fn recommend_apis(
        &self,
        py: Python<'_>,
        context: Context,
        active_name: &str,
        active: Vec<String>,
        k: usize,
        m: usize,
        n: usize,
    ) -> PyResult<Vec<(String, f64)>> {
        let query = self.query(&context, active_name, &active)?;
        let rec = py
            .detach(|| self.inner.recommend_apis(&query, &Params::new(k, m, n)))
            .map_err(core_error)?;
        Ok(rec.list.items.into_iter().map(|s| (s.canonical, s.score)).collect())
    }

    /// Full answer as a dict: apis, snippets and fallback_used.
    #[pyo3(signature = (context, active_name, active, k=DEFAULT_K, m=DEFAULT_M, n=DEFAULT_N, snippet_count=DEFAULT_SNIPPETS))]
    #[allow(clippy::too_many_arguments)]
    fn recommend<'py>(
        &self,
        py: Python<'py>,
        context: Context,
        active_name: &str,
        active: Vec<String>,
        k: usize,
        m: usize,
        n: usize,
        snippet_count: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let query = self.query(&context, active_name, &active)?;
        let (rec, snippets) = py
            .detach(|| {
                let rec = self.inner.recommend_apis(&query, &Params::new(k, m, n))?;
                let snippets = self.inner.recommend_snippets(
                    &rec.list,
                    query.declaration(),
                    &rec.projects,
                    DEFAULT_QUERY_SIZE,
                    snippet_count,
                );
                Ok::<_, apirec_core::Error>((rec, snippets))
            })
            .map_err(core_error)?;
        let out = PyDict::new(py);
        let apis: Vec<(String, f64)> = rec.list.items.iter().map(|s| (s.canonical.clone(), s.score)).collect();
        out.set_item("apis", apis)?;
        let mut items = Vec::with_capacity(snippets.len());
        for s in snippets {
            let d = PyDict::new(py);
            d.set_item("declaration", s.declaration_name)?;
            d.set_item("project", s.project_id)?;
            d.set_item("score", s.jaccard_score)?;
            d.set_item("body", s.body)?;
            d.set_item("sequence", s.invocation_sequence)?;
            items.push(d);
        }
        out.set_item("snippets", items)?;
        out.set_item("fallback_used", rec.list.fallback_used)?;
        Ok(out)
    }

    /// Neighbor projects as (project id, similarity) pairs.
    #[pyo3(signature = (context, active_name, active, k=DEFAULT_K))]
    fn top_k_projects(
        &self,
        context: Context,
        active_name: &str,
        active: Vec<String>,
        k: usize,
    ) -> PyResult<Vec<(String, f64)>> {
        let query = self.query(&context, active_name, &active)?;
        let corpus = self.inner.corpus();
        Ok(self
            .inner
            .top_k_projects(&query, k)
            .neighbors
            .into_iter()
            .map(|n| (corpus.project(n.key).id.clone(), n.score))
            .collect())
    }
}

/// Cross-validated evaluation; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (corpus, config="c12", folds="10", k_list=vec![4], n_list=vec![1, 5, 10, 15, 20], seed=0, jobs=0))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    corpus: &Corpus,
    config: &str,
    folds: &str,
    k_list: Vec<usize>,
    n_list: Vec<usize>,
    seed: u64,
    jobs: usize,
) -> PyResult<String> {
    let cfg = EvalConfig {
        configuration: config.parse::<Configuration>().map_err(core_error)?,
        folds: folds.parse::<FoldScheme>().map_err(core_error)?,
        k_values: k_list,
        n_values: n_list,
        seed,
        jobs,
        ..EvalConfig::default()
    };
    let engine = apirec_core::Recommender::new(Arc::clone(&corpus.inner));
    let report = py
        .detach(|| apirec_core::run_evaluation(&engine, &cfg))
        .map_err(core_error)?;
    report.to_json().map_err(core_error)
}

#[pyfunction]
fn levenshtein(a: Vec<String>, b: Vec<String>) -> usize {
    eval::levenshtein(&a, &b)
}

#[pyfunction]
fn spearman(xs: Vec<f64>, ys: Vec<f64>) -> Option<f64> {
    eval::spearman(&xs, &ys)
}

#[pyfunction]
fn kendall(xs: Vec<f64>, ys: Vec<f64>) -> Option<f64> {
    eval::kendall(&xs, &ys)
}

/// Jaccard index of two invocation collections, as sets.
#[pyfunction]
fn jaccard(a: Vec<String>, b: Vec<String>) -> f64 {
    let mut vocabulary = Vocabulary::new();
    let mut decl = |items: &[String]| {
        let ids = items.iter().map(|s| vocabulary.intern(s)).collect();
        apirec_core::Declaration::new("", Vec::new(), ids, None)
    };
    let (x, y) = (decl(&a), decl(&b));
    apirec_core::jaccard(&x, &y)
}

/// Cosine similarity of two sparse non-negative vectors given as dicts.
#[pyfunction]
fn cosine(u: BTreeMap<String, f64>, v: BTreeMap<String, f64>) -> PyResult<f64> {
    if u.values().chain(v.values()).any(|w| !w.is_finite() || *w < 0.0) {
        return Err(value_error("weights must be finite and non-negative"));
    }
    let mut vocabulary = Vocabulary::new();
    let mut vector = |m: &BTreeMap<String, f64>| {
        FeatureVector::new("", m.iter().map(|(k, &w)| (vocabulary.intern(k), w)).collect())
    };
    let (a, b) = (vector(&u), vector(&v));
    Ok(apirec_core::cosine(&a, &b))
}

#[pymodule]
fn apirec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Recommender>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(kendall, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    Ok(())
}
