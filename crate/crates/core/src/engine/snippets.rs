use serde::Serialize;

use super::{RecommendationList, Recommender};
use crate::corpus::{Declaration, InvocationId};
use crate::similarity::{rank_declarations, NeighborSet};

/// A neighbor declaration offered as a code example.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnippetRecommendation {
    pub declaration_name: String,
    pub project_id: String,
    pub jaccard_score: f64,
    pub body: Option<String>,
    pub invocation_sequence: Vec<String>,
}

impl Recommender {
    /// Searches the neighbor projects for declarations covering as much of
    /// the query as possible. The query is the active declaration's known
    /// invocations plus the first `query_size` recommended ones.
    pub fn recommend_snippets(
        &self,
        recs: &RecommendationList,
        active: &Declaration,
        topsim_p: &NeighborSet<usize>,
        query_size: usize,
        limit: usize,
    ) -> Vec<SnippetRecommendation> {
        let mut query: Vec<InvocationId> = active
            .invocation_set()
            .iter()
            .copied()
            .chain(recs.ids().take(query_size))
            .collect();
        query.sort_unstable();
        query.dedup();

        let corpus = self.corpus();
        let projects: Vec<usize> = topsim_p.keys().collect();
        rank_declarations(corpus, &projects, &query, limit)
            .into_iter()
            .map(|n| {
                let project = corpus.project(n.key.project);
                let decl = &project.declarations[n.key.declaration];
                SnippetRecommendation {
                    declaration_name: decl.name.clone(),
                    project_id: project.id.clone(),
                    jaccard_score: n.score,
                    body: decl
                        .source_ref
                        .as_deref()
                        .and_then(|r| corpus.snippet(r))
                        .map(str::to_owned),
                    invocation_sequence: decl
                        .invocations()
                        .iter()
                        .map(|&id| corpus.canonical(id).unwrap_or_default().to_owned())
                        .collect(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::corpus::CorpusBuilder;
    use crate::engine::{ActiveQuery, Params};

    #[test]
    fn exact_query_match_ranks_first_with_body() {
        let corpus = CorpusBuilder::new()
            .project("P", None)
            .declaration_with_source("full", &["a", "b", "c"], "P/full")
            .declaration("part", &["a"])
            .declaration("none", &["z"])
            .build()
            .unwrap()
            .with_snippets(BTreeMap::from([("P/full".to_string(), "void full() {}".to_string())]));
        let corpus = Arc::new(corpus);
        let engine = Recommender::new(Arc::clone(&corpus));
        let query = ActiveQuery::from_strings(&corpus, "q", &[], ("m", &["a", "b"][..])).unwrap();
        let rec = engine.recommend_apis(&query, &Params::default()).unwrap();
        assert_eq!(rec.list.items[0].canonical, "c");
        let snippets = engine.recommend_snippets(&rec.list, query.declaration(), &rec.projects, 5, 5);
        assert_eq!(snippets[0].declaration_name, "full");
        assert_eq!(snippets[0].jaccard_score, 1.0);
        assert_eq!(snippets[0].body.as_deref(), Some("void full() {}"));
        assert_eq!(snippets[1].declaration_name, "part");
        assert!(snippets[1].body.is_none());
        assert_eq!(snippets.len(), 2);
    }

    #[test]
    fn disjoint_query_returns_nothing() {
        let corpus = Arc::new(
            CorpusBuilder::new()
                .project("P", None)
                .declaration("m", &["a"])
                .build()
                .unwrap(),
        );
        let engine = Recommender::new(Arc::clone(&corpus));
        let query = ActiveQuery::from_strings(&corpus, "q", &[], ("m", &["other"][..])).unwrap();
        let rec = engine.recommend_apis(&query, &Params::default()).unwrap();
        let empty = RecommendationList {
            items: vec![],
            fallback_used: false,
            elapsed_secs: 0.0,
        };
        assert!(engine
            .recommend_snippets(&empty, query.declaration(), &rec.projects, 5, 5)
            .is_empty());
    }
}
