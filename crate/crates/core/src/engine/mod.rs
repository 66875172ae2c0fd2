//! The recommendation engine: ranked next-invocation lists for an active
//! declaration, snippet retrieval, and a popularity fallback.

mod baseline;
mod rating;
mod snippets;
mod tensor;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use baseline::{popularity_baseline, popularity_from_counts};
pub use rating::{combined_rating, mean_rating, predict_rating, RatingMode};
pub use snippets::SnippetRecommendation;
pub use tensor::RatingTensor;

use crate::corpus::{Corpus, Declaration, InvocationId, Project};
use crate::error::{Error, Result};
use crate::similarity::{top_m_declarations, DeclRef, NeighborSet, ProjectSpace};

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_M: usize = 25;
pub const DEFAULT_N: usize = 20;
pub const DEFAULT_QUERY_SIZE: usize = 5;
pub const DEFAULT_SNIPPETS: usize = 5;

/// Neighborhood sizes and cut-off for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub mode: RatingMode,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            m: DEFAULT_M,
            n: DEFAULT_N,
            mode: RatingMode::Selection,
        }
    }
}

impl Params {
    pub fn new(k: usize, m: usize, n: usize) -> Self {
        Self {
            k,
            m,
            n,
            mode: RatingMode::Selection,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "k, M and N must be positive (got k={}, M={}, N={})",
                self.k, self.m, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredInvocation {
    pub id: InvocationId,
    pub canonical: String,
    pub score: f64,
}

/// Ranked invocations, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationList {
    pub items: Vec<ScoredInvocation>,
    pub fallback_used: bool,
    /// Wall-clock seconds spent producing the list.
    pub elapsed_secs: f64,
}

impl RecommendationList {
    pub fn ids(&self) -> impl Iterator<Item = InvocationId> + '_ {
        self.items.iter().map(|s| s.id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Output of [`Recommender::recommend_apis`] together with the neighborhoods
/// that produced it.
#[derive(Debug, Clone)]
pub struct ApiRecommendation {
    pub list: RecommendationList,
    pub projects: NeighborSet<usize>,
    pub declarations: NeighborSet<DeclRef>,
}

/// A partially written project with one declaration under development.
#[derive(Debug, Clone)]
pub struct ActiveQuery {
    pub project: Project,
    /// Index of the active declaration in `project.declarations`.
    pub active: usize,
    /// Corpus project this query stands in for; it is left out of the
    /// background while answering.
    pub replaces: Option<usize>,
}

impl ActiveQuery {
    pub fn new(project: Project, active: usize, replaces: Option<usize>) -> Result<Self> {
        if active >= project.declarations.len() {
            return Err(Error::InvalidArgument(format!(
                "active declaration index {active} out of range"
            )));
        }
        Ok(Self {
            project,
            active,
            replaces,
        })
    }

    /// Builds a transient query from canonical strings. Strings missing from
    /// the corpus vocabulary receive fresh ids above it, so they still count
    /// towards set sizes and frequencies but match nothing.
    pub fn from_strings<S: AsRef<str>>(
        corpus: &Corpus,
        project_id: &str,
        context: &[(String, Vec<S>)],
        active: (&str, &[S]),
    ) -> Result<Self> {
        let vocabulary = corpus.vocabulary();
        let mut transient: HashMap<String, InvocationId> = HashMap::new();
        let mut resolve = |s: &str| {
            vocabulary.get(s).unwrap_or_else(|| {
                let next = InvocationId((vocabulary.len() + transient.len()) as u32);
                *transient.entry(s.to_owned()).or_insert(next)
            })
        };
        let mut declarations = Vec::with_capacity(context.len() + 1);
        for (name, invocations) in context {
            if name == active.0 {
                return Err(Error::InvalidArgument(format!(
                    "context declaration `{name}` has the active declaration's name"
                )));
            }
            let ids = invocations.iter().map(|s| resolve(s.as_ref())).collect();
            declarations.push(Declaration::new(name.clone(), Vec::new(), ids, None));
        }
        let ids = active.1.iter().map(|s| resolve(s.as_ref())).collect();
        declarations.push(Declaration::new(active.0, Vec::new(), ids, None));
        let active_index = declarations.len() - 1;
        Self::new(Project::new(project_id, None, declarations), active_index, None)
    }

    pub fn declaration(&self) -> &Declaration {
        &self.project.declarations[self.active]
    }
}

/// Recommendation engine over a background subset of a corpus.
#[derive(Debug, Clone)]
pub struct Recommender {
    corpus: Arc<Corpus>,
    tensor: Arc<RatingTensor>,
    space: ProjectSpace,
    declaration_count: Vec<u32>,
}

impl Recommender {
    /// Uses every corpus project as background.
    pub fn new(corpus: Arc<Corpus>) -> Self {
        let tensor = Arc::new(RatingTensor::from_corpus(&corpus));
        let space = ProjectSpace::full(&corpus);
        let declaration_count = corpus.declaration_counts().to_vec();
        Self {
            corpus,
            tensor,
            space,
            declaration_count,
        }
    }

    /// Shares this engine's corpus and tensor, restricting the background
    /// to `members`.
    pub fn subset(&self, members: &[usize]) -> Self {
        let space = ProjectSpace::subset(&self.corpus, members);
        let mut declaration_count = vec![0u32; self.corpus.vocabulary().len()];
        for &m in space.members() {
            for decl in &self.corpus.project(m).declarations {
                for &id in decl.invocation_set() {
                    declaration_count[id.index()] += 1;
                }
            }
        }
        Self {
            corpus: Arc::clone(&self.corpus),
            tensor: Arc::clone(&self.tensor),
            space,
            declaration_count,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn corpus_arc(&self) -> &Arc<Corpus> {
        &self.corpus
    }

    pub fn tensor(&self) -> &RatingTensor {
        &self.tensor
    }

    pub fn members(&self) -> &[usize] {
        self.space.members()
    }

    fn background_size(&self, replaces: Option<usize>) -> usize {
        let members = self.space.members().len();
        match replaces {
            Some(r) if self.space.contains(r) => members - 1,
            _ => members,
        }
    }

    /// Projects most similar to the query's project.
    pub fn top_k_projects(&self, query: &ActiveQuery, k: usize) -> NeighborSet<usize> {
        self.space
            .top_k(&self.corpus, &query.project, query.replaces, k)
    }

    /// Ranked next invocations for the query's active declaration. Falls back
    /// to the popularity baseline when no neighbor declaration shares an
    /// invocation with it.
    pub fn recommend_apis(&self, query: &ActiveQuery, params: &Params) -> Result<ApiRecommendation> {
        params.validate()?;
        if self.background_size(query.replaces) == 0 {
            return Err(Error::EmptyCorpus);
        }
        let start = Instant::now();
        let active = query.declaration();
        let projects = self.top_k_projects(query, params.k);
        let neighbor_ids: Vec<usize> = projects.keys().collect();
        let declarations = top_m_declarations(&self.corpus, &neighbor_ids, active, params.m);

        if declarations.is_empty() {
            let mut list = self.popularity(active.invocation_set(), params.n, query.replaces);
            list.fallback_used = true;
            list.elapsed_secs = start.elapsed().as_secs_f64();
            return Ok(ApiRecommendation {
                list,
                projects,
                declarations,
            });
        }

        let known = active.invocation_set();
        let mut candidates: Vec<InvocationId> = declarations
            .keys()
            .flat_map(|e| self.tensor.row(e).iter().copied())
            .filter(|id| known.binary_search(id).is_err())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let active_mean = mean_rating(active, self.corpus.vocabulary().len());
        let mut items = candidates
            .into_iter()
            .map(|id| {
                let score = predict_rating(
                    &self.tensor,
                    active_mean,
                    id,
                    &declarations,
                    &projects,
                    params.mode,
                )?;
                Ok(ScoredInvocation {
                    id,
                    canonical: self.canonical_of(id),
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rank_invocations(&mut items);
        items.truncate(params.n);

        Ok(ApiRecommendation {
            list: RecommendationList {
                items,
                fallback_used: false,
                elapsed_secs: start.elapsed().as_secs_f64(),
            },
            projects,
            declarations,
        })
    }

    /// Popularity ranking over the background, excluding `known`.
    pub fn popularity(&self, known: &[InvocationId], n: usize, replaces: Option<usize>) -> RecommendationList {
        let start = Instant::now();
        let mut list = match replaces.filter(|&r| self.space.contains(r)) {
            None => popularity_from_counts(&self.corpus, &self.declaration_count, known, n),
            Some(r) => {
                let mut counts = self.declaration_count.clone();
                for decl in &self.corpus.project(r).declarations {
                    for &id in decl.invocation_set() {
                        counts[id.index()] -= 1;
                    }
                }
                popularity_from_counts(&self.corpus, &counts, known, n)
            }
        };
        list.elapsed_secs = start.elapsed().as_secs_f64();
        list
    }

    fn canonical_of(&self, id: InvocationId) -> String {
        self.corpus.canonical(id).unwrap_or_default().to_owned()
    }
}

/// Descending score, ties by canonical string.
pub(crate) fn rank_invocations(items: &mut [ScoredInvocation]) {
    items.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.canonical.cmp(&b.canonical))
    });
}
