//! Evaluation report: per-project rows, aggregates derived from them, and
//! JSON / CSV emission.
//!
//! Every aggregate is a pure function of the rows, see [`compute_aggregates`].

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::correlation::{kendall, spearman};
use super::folds::FoldScheme;
use super::metrics::success_rate;
use super::split::Configuration;
use crate::error::Result;

pub const REPORT_SCHEMA: &str = "apirec-eval/1";
pub const UNCATEGORIZED: &str = "uncategorized";

/// Outcome for one testing project at one (k, N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRow {
    pub project: String,
    pub category: String,
    pub configuration: Configuration,
    pub k: usize,
    pub n: usize,
    pub hit: bool,
    pub precision: f64,
    pub recall: f64,
    /// Edit distance between the top snippet's invocation sequence and the
    /// active declaration's full sequence; absent when no snippet was found.
    pub levenshtein: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub configuration: Configuration,
    pub k: usize,
    pub n: usize,
    pub projects: usize,
    pub hits: usize,
    pub success_rate: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_levenshtein: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPrecision {
    pub category: String,
    /// Evaluated projects in the category.
    pub cardinality: usize,
    pub mean_precision: f64,
}

/// Per-category precision at one (k, N) and its rank correlation with
/// category cardinality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryCorrelation {
    pub configuration: Configuration,
    pub k: usize,
    pub n: usize,
    pub categories: Vec<CategoryPrecision>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkipSummary {
    pub total: usize,
    pub reasons: BTreeMap<String, usize>,
}

/// Wall-clock statistics of the recommendation calls. Kept out of reports
/// unless requested, since timings differ between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub queries: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
}

impl TimingSummary {
    pub fn from_secs(mut secs: Vec<f64>) -> Option<Self> {
        if secs.is_empty() {
            return None;
        }
        secs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = secs.len();
        let median = if n % 2 == 1 {
            secs[n / 2]
        } else {
            (secs[n / 2 - 1] + secs[n / 2]) / 2.0
        };
        Some(Self {
            queries: n,
            median_ms: median * 1e3,
            mean_ms: secs.iter().sum::<f64>() / n as f64 * 1e3,
            max_ms: secs[n - 1] * 1e3,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub configuration: Configuration,
    pub folds: FoldScheme,
    pub fold_count: usize,
    pub seed: u64,
    pub k_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub m: usize,
    pub query_size: usize,
    pub corpus_projects: usize,
    pub evaluated_projects: usize,
    pub skipped: SkipSummary,
    pub rows: Vec<ProjectRow>,
    pub aggregates: Vec<Aggregate>,
    pub categories: Vec<CategoryCorrelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingSummary>,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn aggregate(&self, k: usize, n: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.k == k && a.n == n)
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    /// One CSV line per project × k × N.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record([
            "project",
            "category",
            "configuration",
            "k",
            "n",
            "hit",
            "precision",
            "recall",
            "levenshtein",
        ])?;
        for r in &self.rows {
            csv.write_record([
                r.project.clone(),
                r.category.clone(),
                r.configuration.label().to_owned(),
                r.k.to_string(),
                r.n.to_string(),
                u8::from(r.hit).to_string(),
                r.precision.to_string(),
                r.recall.to_string(),
                r.levenshtein.map(|l| l.to_string()).unwrap_or_default(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }
}

type GroupKey = (Configuration, usize, usize);

/// Aggregates and per-category correlations, grouped by (configuration, k, N).
/// Rows are consumed in the order given.
pub fn compute_aggregates(rows: &[ProjectRow]) -> (Vec<Aggregate>, Vec<CategoryCorrelation>) {
    let mut groups: BTreeMap<GroupKey, Vec<&ProjectRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.configuration, r.k, r.n)).or_default().push(r);
    }

    let mut aggregates = Vec::with_capacity(groups.len());
    let mut categories = Vec::with_capacity(groups.len());
    for ((configuration, k, n), group) in groups {
        let hits: Vec<bool> = group.iter().map(|r| r.hit).collect();
        let count = group.len() as f64;
        let levs: Vec<usize> = group.iter().filter_map(|r| r.levenshtein).collect();
        aggregates.push(Aggregate {
            configuration,
            k,
            n,
            projects: group.len(),
            hits: hits.iter().filter(|&&h| h).count(),
            success_rate: success_rate(&hits),
            mean_precision: group.iter().map(|r| r.precision).sum::<f64>() / count,
            mean_recall: group.iter().map(|r| r.recall).sum::<f64>() / count,
            mean_levenshtein: (!levs.is_empty())
                .then(|| levs.iter().map(|&l| l as f64).sum::<f64>() / levs.len() as f64),
        });

        let mut per_category: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
        for r in &group {
            let slot = per_category.entry(r.category.as_str()).or_default();
            slot.0 += 1;
            slot.1 += r.precision;
        }
        let stats: Vec<CategoryPrecision> = per_category
            .into_iter()
            .map(|(category, (cardinality, sum))| CategoryPrecision {
                category: category.to_owned(),
                cardinality,
                mean_precision: sum / cardinality as f64,
            })
            .collect();
        let xs: Vec<f64> = stats.iter().map(|c| c.cardinality as f64).collect();
        let ys: Vec<f64> = stats.iter().map(|c| c.mean_precision).collect();
        categories.push(CategoryCorrelation {
            configuration,
            k,
            n,
            spearman: spearman(&xs, &ys),
            kendall: kendall(&xs, &ys),
            categories: stats,
        });
    }
    (aggregates, categories)
}
