//! Ranked-list accuracy metrics and edit distance.

use crate::corpus::InvocationId;

/// Number of the first `n` recommendations found in `ground_truth`
/// (a sorted set).
pub fn matches_at(recommended: &[InvocationId], ground_truth: &[InvocationId], n: usize) -> usize {
    recommended
        .iter()
        .take(n)
        .filter(|id| ground_truth.binary_search(id).is_ok())
        .count()
}

/// P@N. The denominator is always `n`, even for shorter lists.
pub fn precision_at(recommended: &[InvocationId], ground_truth: &[InvocationId], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    matches_at(recommended, ground_truth, n) as f64 / n as f64
}

/// R@N, defined as 0 for an empty ground truth.
pub fn recall_at(recommended: &[InvocationId], ground_truth: &[InvocationId], n: usize) -> f64 {
    if ground_truth.is_empty() {
        return 0.0;
    }
    matches_at(recommended, ground_truth, n) as f64 / ground_truth.len() as f64
}

pub fn hit_at(recommended: &[InvocationId], ground_truth: &[InvocationId], n: usize) -> bool {
    matches_at(recommended, ground_truth, n) > 0
}

/// Percentage of projects with at least one hit; 0 for no projects.
pub fn success_rate(hits: &[bool]) -> f64 {
    if hits.is_empty() {
        return 0.0;
    }
    100.0 * hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64
}

/// Edit distance with unit insertion, deletion and substitution costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
