//! Project similarity (TF-IDF cosine over the project→invocation graph) and
//! declaration similarity (Jaccard over invocation sets), plus neighbor
//! selection.
//!
//! Feature weights are `f · ln(|P| / a)` where `f` counts how often the
//! project performs the invocation and `a` is the number of considered
//! projects that perform it. When an active project is compared against a
//! corpus, the considered set is the corpus members plus the active project
//! (a corpus project with the same id is replaced by the active one).

use std::cmp::Ordering;

use serde::Serialize;

use crate::corpus::{Corpus, Declaration, InvocationId, Project};

/// Sparse TF-IDF vector of one project, sorted by invocation id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub owner: String,
    entries: Vec<(InvocationId, f64)>,
}

impl FeatureVector {
    pub fn new(owner: impl Into<String>, mut entries: Vec<(InvocationId, f64)>) -> Self {
        entries.sort_by_key(|&(id, _)| id);
        Self {
            owner: owner.into(),
            entries,
        }
    }

    pub fn entries(&self) -> &[(InvocationId, f64)] {
        &self.entries
    }

    pub fn weight(&self, id: InvocationId) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            owner: self.owner.clone(),
            entries: self.entries.iter().map(|&(id, w)| (id, w * factor)).collect(),
        }
    }
}

/// Inverse document frequencies `ln(|P| / a)` over a considered project set.
#[derive(Debug, Clone)]
pub struct IdfTable {
    total_projects: usize,
    idf: Vec<f64>,
}

impl IdfTable {
    /// `counts[i]` is the number of considered projects performing invocation `i`.
    pub fn from_counts(total_projects: usize, counts: &[u32]) -> Self {
        let total = total_projects as f64;
        let idf = counts
            .iter()
            .map(|&a| if a == 0 { 0.0 } else { (total / a as f64).ln() })
            .collect();
        Self {
            total_projects,
            idf,
        }
    }

    pub fn total_projects(&self) -> usize {
        self.total_projects
    }

    pub fn idf(&self, id: InvocationId) -> f64 {
        self.idf.get(id.index()).copied().unwrap_or(0.0)
    }

    pub fn features(&self, owner: &str, frequencies: &[(InvocationId, u32)]) -> FeatureVector {
        FeatureVector {
            owner: owner.to_owned(),
            entries: frequencies
                .iter()
                .map(|&(id, f)| (id, f as f64 * self.idf(id)))
                .collect(),
        }
    }
}

/// TF-IDF features of a project that belongs to `corpus`, using the whole
/// corpus as the considered set.
pub fn project_features(corpus: &Corpus, project: &Project) -> FeatureVector {
    let idf = IdfTable::from_counts(corpus.len(), corpus.project_counts());
    idf.features(&project.id, &project.invocation_frequencies())
}

/// Cosine similarity of two non-negative sparse vectors; 0 when either
/// vector has zero norm.
pub fn cosine(u: &FeatureVector, v: &FeatureVector) -> f64 {
    let (a, b) = (&u.entries, &v.entries);
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    let denom = (u.squared_norm() * v.squared_norm()).sqrt();
    if denom == 0.0 || dot <= 0.0 {
        return 0.0;
    }
    (dot / denom).min(1.0)
}

/// Size of the intersection of two sorted, de-duplicated slices.
pub fn intersection_size(a: &[InvocationId], b: &[InvocationId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Jaccard index of two sorted, de-duplicated sets. Two empty sets score 0.
pub fn jaccard_sets(a: &[InvocationId], b: &[InvocationId]) -> f64 {
    let inter = intersection_size(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn jaccard(d: &Declaration, e: &Declaration) -> f64 {
    jaccard_sets(d.invocation_set(), e.invocation_set())
}

/// Location of a declaration inside a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DeclRef {
    pub project: usize,
    pub declaration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor<K> {
    pub key: K,
    pub score: f64,
}

/// Neighbors of an anchor, by descending score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborSet<K> {
    pub anchor: String,
    pub neighbors: Vec<Neighbor<K>>,
}

impl<K: Copy + PartialEq> NeighborSet<K> {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = K> + '_ {
        self.neighbors.iter().map(|n| n.key)
    }

    pub fn score_of(&self, key: K) -> Option<f64> {
        self.neighbors.iter().find(|n| n.key == key).map(|n| n.score)
    }

    pub fn total_score(&self) -> f64 {
        self.neighbors.iter().map(|n| n.score).sum()
    }
}

/// A subset of corpus projects acting as background data, with the
/// invocation→project counts restricted to that subset.
#[derive(Debug, Clone)]
pub struct ProjectSpace {
    members: Vec<usize>,
    project_count: Vec<u32>,
}

impl ProjectSpace {
    pub fn full(corpus: &Corpus) -> Self {
        Self {
            members: (0..corpus.len()).collect(),
            project_count: corpus.project_counts().to_vec(),
        }
    }

    /// Background restricted to the projects at `members` (indices into the corpus).
    pub fn subset(corpus: &Corpus, members: &[usize]) -> Self {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut project_count = vec![0u32; corpus.vocabulary().len()];
        for &m in &members {
            for &(id, _) in corpus.frequencies(m) {
                project_count[id.index()] += 1;
            }
        }
        Self {
            members,
            project_count,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn project_counts(&self) -> &[u32] {
        &self.project_count
    }

    /// IDF table over the considered set: members, minus `replaced` if it is
    /// a member, plus the active project with the given frequencies.
    pub fn considered_idf(
        &self,
        corpus: &Corpus,
        active_frequencies: &[(InvocationId, u32)],
        replaced: Option<usize>,
    ) -> IdfTable {
        let replaced = replaced.filter(|&r| self.contains(r));
        let extent = active_frequencies
            .last()
            .map_or(0, |&(id, _)| id.index() + 1)
            .max(self.project_count.len());
        let mut counts = self.project_count.clone();
        counts.resize(extent, 0);
        if let Some(r) = replaced {
            for &(id, _) in corpus.frequencies(r) {
                counts[id.index()] -= 1;
            }
        }
        for &(id, _) in active_frequencies {
            counts[id.index()] += 1;
        }
        let total = self.members.len() - usize::from(replaced.is_some()) + 1;
        IdfTable::from_counts(total, &counts)
    }

    /// The `k` members most similar to `active`, excluding `replaced`.
    pub fn top_k(
        &self,
        corpus: &Corpus,
        active: &Project,
        replaced: Option<usize>,
        k: usize,
    ) -> NeighborSet<usize> {
        let active_freqs = active.invocation_frequencies();
        let idf = self.considered_idf(corpus, &active_freqs, replaced);
        let active_vec = idf.features(&active.id, &active_freqs);
        let mut scored: Vec<Neighbor<usize>> = self
            .members
            .iter()
            .copied()
            .filter(|&m| Some(m) != replaced)
            .map(|m| {
                let v = idf.features(&corpus.project(m).id, corpus.frequencies(m));
                Neighbor {
                    key: m,
                    score: cosine(&active_vec, &v),
                }
            })
            .collect();
        sort_neighbors(&mut scored, |a, b| corpus.project(*a).id.cmp(&corpus.project(*b).id));
        scored.truncate(k);
        NeighborSet {
            anchor: active.id.clone(),
            neighbors: scored,
        }
    }
}

/// Descending score, ties by `tie` ascending.
pub(crate) fn sort_neighbors<K>(items: &mut [Neighbor<K>], tie: impl Fn(&K, &K) -> Ordering) {
    items.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| tie(&a.key, &b.key))
    });
}

/// The `k` corpus projects most similar to `active`. If `active` shares its
/// id with a corpus project, that project is replaced by `active`.
pub fn top_k_projects(corpus: &Corpus, active: &Project, k: usize) -> NeighborSet<usize> {
    ProjectSpace::full(corpus).top_k(corpus, active, corpus.project_index(&active.id), k)
}

fn decl_order(corpus: &Corpus, a: &DeclRef, b: &DeclRef) -> Ordering {
    let (pa, pb) = (corpus.project(a.project), corpus.project(b.project));
    pa.id
        .cmp(&pb.id)
        .then_with(|| pa.declarations[a.declaration].name.cmp(&pb.declarations[b.declaration].name))
}

/// Ranks every declaration of `projects` against `query` (a sorted invocation
/// set) by Jaccard, keeping positive scores only, best `limit` first.
pub fn rank_declarations(
    corpus: &Corpus,
    projects: &[usize],
    query: &[InvocationId],
    limit: usize,
) -> Vec<Neighbor<DeclRef>> {
    let mut scored: Vec<Neighbor<DeclRef>> = projects
        .iter()
        .flat_map(|&p| {
            corpus.project(p).declarations.iter().enumerate().map(move |(d, decl)| Neighbor {
                key: DeclRef {
                    project: p,
                    declaration: d,
                },
                score: jaccard_sets(query, decl.invocation_set()),
            })
        })
        .filter(|n| n.score > 0.0)
        .collect();
    sort_neighbors(&mut scored, |a, b| decl_order(corpus, a, b));
    scored.truncate(limit);
    scored
}

/// The `m` declarations of `neighbor_projects` most similar to `active`.
pub fn top_m_declarations(
    corpus: &Corpus,
    neighbor_projects: &[usize],
    active: &Declaration,
    m: usize,
) -> NeighborSet<DeclRef> {
    NeighborSet {
        anchor: active.name.clone(),
        neighbors: rank_declarations(corpus, neighbor_projects, active.invocation_set(), m),
    }
}
