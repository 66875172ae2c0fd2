//! Cross-validated simulation of developers asking for the next invocation.
//!
//! Each testing project is split per [`Configuration`], the engine is
//! queried with the revealed part, and the hidden part scores the answer.

mod correlation;
mod folds;
mod metrics;
mod report;
mod split;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use correlation::{fractional_ranks, kendall, spearman};
pub use folds::{make_folds, Fold, FoldScheme};
pub use metrics::{hit_at, levenshtein, matches_at, precision_at, recall_at, success_rate};
pub use report::{
    compute_aggregates, Aggregate, CategoryCorrelation, CategoryPrecision, EvalReport, ProjectRow,
    SkipSummary, TimingSummary, REPORT_SCHEMA, UNCATEGORIZED,
};
pub use split::{split_project, Configuration, EvalSplit, SkipReason};

use crate::engine::{Params, RatingMode, Recommender, DEFAULT_M, DEFAULT_QUERY_SIZE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub configuration: Configuration,
    pub k_values: Vec<usize>,
    pub m: usize,
    pub n_values: Vec<usize>,
    pub folds: FoldScheme,
    pub seed: u64,
    /// Recommendations added to the snippet query.
    pub query_size: usize,
    #[serde(default)]
    pub mode: RatingMode,
    /// Worker threads; 0 uses every available processor.
    #[serde(skip)]
    pub jobs: usize,
    /// Attach wall-clock timing statistics to the report.
    #[serde(skip)]
    pub include_timings: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            configuration: Configuration::C12,
            k_values: vec![4],
            m: DEFAULT_M,
            n_values: vec![1, 5, 10, 15, 20],
            folds: FoldScheme::TenFold,
            seed: 0,
            query_size: DEFAULT_QUERY_SIZE,
            mode: RatingMode::Selection,
            jobs: 0,
            include_timings: false,
        }
    }
}

impl EvalConfig {
    fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::InvalidArgument("k and N lists must be non-empty".into()));
        }
        if self.k_values.contains(&0) || self.n_values.contains(&0) || self.m == 0 {
            return Err(Error::InvalidArgument("k, M and N must be positive".into()));
        }
        Ok(())
    }
}

enum Outcome {
    Rows(Vec<ProjectRow>, Vec<f64>),
    Skipped(SkipReason),
}

fn evaluate_project(engine: &Recommender, project_index: usize, replaces: Option<usize>, cfg: &EvalConfig) -> Result<Outcome> {
    let corpus = engine.corpus();
    let project = corpus.project(project_index);
    let split = match split_project(project, cfg.configuration) {
        Ok(s) => s,
        Err(reason) => return Ok(Outcome::Skipped(reason)),
    };
    let query = split.to_query(project, replaces);
    let max_n = cfg.n_values.iter().copied().max().unwrap_or(1);
    let truth: Vec<&str> = split
        .active
        .invocations()
        .iter()
        .map(|&id| corpus.canonical(id).unwrap_or_default())
        .collect();
    let category = project.category.clone().unwrap_or_else(|| UNCATEGORIZED.to_owned());

    let mut rows = Vec::with_capacity(cfg.k_values.len() * cfg.n_values.len());
    let mut timings = Vec::with_capacity(cfg.k_values.len());
    for &k in &cfg.k_values {
        let params = Params {
            k,
            m: cfg.m,
            n: max_n,
            mode: cfg.mode,
        };
        let rec = engine.recommend_apis(&query, &params)?;
        timings.push(rec.list.elapsed_secs);
        let top = engine.recommend_snippets(&rec.list, query.declaration(), &rec.projects, cfg.query_size, 1);
        let lev = top.first().map(|s| {
            let seq: Vec<&str> = s.invocation_sequence.iter().map(String::as_str).collect();
            levenshtein(&seq, &truth)
        });
        let ids: Vec<_> = rec.list.ids().collect();
        for &n in &cfg.n_values {
            rows.push(ProjectRow {
                project: project.id.clone(),
                category: category.clone(),
                configuration: cfg.configuration,
                k,
                n,
                hit: hit_at(&ids, &split.ground_truth, n),
                precision: precision_at(&ids, &split.ground_truth, n),
                recall: recall_at(&ids, &split.ground_truth, n),
                levenshtein: lev,
            });
        }
    }
    Ok(Outcome::Rows(rows, timings))
}

/// Runs the simulation over every fold. Output does not depend on
/// `cfg.jobs`: rows are sorted by project id, k and N before aggregation.
pub fn run_evaluation(engine: &Recommender, cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let corpus = engine.corpus();
    let folds = make_folds(corpus, cfg.folds, cfg.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let outcomes: Vec<Outcome> = pool.install(|| {
        folds
            .par_iter()
            .map(|fold| {
                // Leave-one-out keeps the full background and replaces the
                // testing project, which is the same as training on the rest.
                let (fold_engine, replaces) = match cfg.folds {
                    FoldScheme::LeaveOneOut => (None, true),
                    FoldScheme::TenFold => (Some(engine.subset(&fold.train)), false),
                };
                let fold_engine = fold_engine.as_ref().unwrap_or(engine);
                fold.test
                    .par_iter()
                    .map(|&p| evaluate_project(fold_engine, p, replaces.then_some(p), cfg))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    })?;

    let mut rows = Vec::new();
    let mut secs = Vec::new();
    let mut skipped = SkipSummary::default();
    for outcome in outcomes {
        match outcome {
            Outcome::Rows(r, t) => {
                rows.extend(r);
                secs.extend(t);
            }
            Outcome::Skipped(reason) => {
                skipped.total += 1;
                *skipped.reasons.entry(reason.label().to_owned()).or_default() += 1;
            }
        }
    }
    if rows.is_empty() {
        let histogram: BTreeMap<String, usize> = skipped.reasons;
        return Err(Error::AllSkipped(histogram));
    }
    rows.sort_by(|a, b| (&a.project, a.k, a.n).cmp(&(&b.project, b.k, b.n)));

    let evaluated = rows.len() / (cfg.k_values.len() * cfg.n_values.len());
    let (aggregates, categories) = compute_aggregates(&rows);
    Ok(EvalReport {
        schema: REPORT_SCHEMA.to_owned(),
        configuration: cfg.configuration,
        folds: cfg.folds,
        fold_count: folds.len(),
        seed: cfg.seed,
        k_values: cfg.k_values.clone(),
        n_values: cfg.n_values.clone(),
        m: cfg.m,
        query_size: cfg.query_size,
        corpus_projects: corpus.len(),
        evaluated_projects: evaluated,
        skipped,
        rows,
        aggregates,
        categories,
        timings: if cfg.include_timings {
            TimingSummary::from_secs(secs)
        } else {
            None
        },
        notes: vec![
            "success_rate: percentage of evaluated projects with at least one ground-truth hit in the top-N".into(),
            "category cardinality: evaluated projects per category".into(),
        ],
    })
}
