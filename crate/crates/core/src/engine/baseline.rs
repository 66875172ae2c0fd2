use super::{rank_invocations, RecommendationList, ScoredInvocation};
use crate::corpus::{Corpus, InvocationId};

/// Most frequently declared invocations, excluding `known`. Scores are
/// declaration counts normalized by the largest count.
pub fn popularity_baseline(corpus: &Corpus, known: &[InvocationId], n: usize) -> RecommendationList {
    popularity_from_counts(corpus, corpus.declaration_counts(), known, n)
}

/// Popularity ranking from explicit per-invocation declaration counts.
/// `known` must be sorted.
pub fn popularity_from_counts(
    corpus: &Corpus,
    declaration_counts: &[u32],
    known: &[InvocationId],
    n: usize,
) -> RecommendationList {
    let max = declaration_counts.iter().copied().max().unwrap_or(0);
    let mut items: Vec<ScoredInvocation> = if max == 0 {
        Vec::new()
    } else {
        declaration_counts
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, &c)| (InvocationId(i as u32), c))
            .filter(|(id, _)| known.binary_search(id).is_err())
            .map(|(id, c)| ScoredInvocation {
                id,
                canonical: corpus.canonical(id).unwrap_or_default().to_owned(),
                score: f64::from(c) / f64::from(max),
            })
            .collect()
    };
    rank_invocations(&mut items);
    items.truncate(n);
    RecommendationList {
        items,
        fallback_used: false,
        elapsed_secs: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusBuilder;

    #[test]
    fn most_declared_first_and_known_excluded() {
        let corpus = CorpusBuilder::new()
            .project("A", None)
            .declaration("m", &["x", "y"])
            .declaration("n", &["x", "x"])
            .project("B", None)
            .declaration("m", &["x", "z"])
            .build()
            .unwrap();
        let list = popularity_baseline(&corpus, &[], 10);
        let names: Vec<_> = list.items.iter().map(|s| s.canonical.as_str()).collect();
        assert_eq!(names, ["x", "y", "z"]);
        assert_eq!(list.items[0].score, 1.0);
        assert!((list.items[1].score - 1.0 / 3.0).abs() < 1e-15);

        let mut all: Vec<_> = corpus.vocabulary().iter().map(|(id, _)| id).collect();
        all.sort();
        assert!(popularity_baseline(&corpus, &all, 10).is_empty());
    }
}
