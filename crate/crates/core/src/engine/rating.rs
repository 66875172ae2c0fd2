//! Missing-rating prediction over the rating tensor.
//!
//! A declaration lives in exactly one project, so the combined rating of a
//! neighbor declaration `e` only sums over the neighbor project that holds
//! `e`. It reduces to the binary cell `r(e, i)` when that project has a
//! positive similarity, and to 0 otherwise. Project similarity therefore
//! acts through neighbor selection unless [`RatingMode::SimilarityWeighted`]
//! is chosen.

use serde::{Deserialize, Serialize};

use super::tensor::RatingTensor;
use crate::corpus::{Declaration, InvocationId};
use crate::error::{Error, Result};
use crate::similarity::{DeclRef, NeighborSet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatingMode {
    /// Combined rating is the binary cell of the containing neighbor project.
    #[default]
    Selection,
    /// Experimental: the cell is additionally multiplied by the containing
    /// project's similarity.
    SimilarityWeighted,
}

/// Fraction of the vocabulary a declaration invokes.
pub fn mean_rating(d: &Declaration, vocabulary_size: usize) -> f64 {
    row_mean(d.invocation_set().len(), vocabulary_size)
}

pub(crate) fn row_mean(unique: usize, vocabulary_size: usize) -> f64 {
    unique as f64 / vocabulary_size as f64
}

/// Combined rating of neighbor declaration `e` for invocation `i` across the
/// neighbor projects that contain it.
pub fn combined_rating(
    tensor: &RatingTensor,
    e: DeclRef,
    i: InvocationId,
    topsim_p: &NeighborSet<usize>,
    mode: RatingMode,
) -> Result<f64> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut found = false;
    for q in topsim_p.neighbors.iter().filter(|n| n.key == e.project) {
        found = true;
        numerator += f64::from(tensor.rating(e, i)) * q.score;
        denominator += q.score;
    }
    if !found {
        return Err(Error::NotANeighbor(format!("#{}", e.project)));
    }
    if denominator == 0.0 {
        return Ok(0.0);
    }
    let combined = numerator / denominator;
    Ok(match mode {
        RatingMode::Selection => combined,
        RatingMode::SimilarityWeighted => combined * denominator,
    })
}

/// Predicted score of invocation `i` for the active declaration, given its
/// mean rating and its neighbor declarations. The score is unbounded and
/// only meaningful for ranking.
pub fn predict_rating(
    tensor: &RatingTensor,
    active_mean: f64,
    i: InvocationId,
    topsim_d: &NeighborSet<DeclRef>,
    topsim_p: &NeighborSet<usize>,
    mode: RatingMode,
) -> Result<f64> {
    let vocabulary_size = tensor.vocabulary_size();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for e in &topsim_d.neighbors {
        let combined = combined_rating(tensor, e.key, i, topsim_p, mode)?;
        let mean = row_mean(tensor.row(e.key).len(), vocabulary_size);
        numerator += (combined - mean) * e.score;
        denominator += e.score;
    }
    if denominator == 0.0 {
        return Err(Error::NoContext);
    }
    Ok(active_mean + numerator / denominator)
}
