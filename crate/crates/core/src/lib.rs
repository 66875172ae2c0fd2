//! Context-aware collaborative filtering for API invocation recommendation.
//!
//! Projects play the role of contexts, method declarations the role of
//! users and API invocations the role of items. Given a partially written
//! declaration inside a partially written project, the [`engine`] ranks the
//! invocations most likely to come next and retrieves matching code from
//! similar projects of a background [`corpus`].

pub mod corpus;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod similarity;
pub mod synth;

pub use corpus::{
    load_snippets, parse_facts, write_facts, write_snippets, Corpus, CorpusBuilder, Declaration,
    InvocationId, Project, Vocabulary,
};
pub use engine::{
    popularity_baseline, ActiveQuery, ApiRecommendation, Params, RatingMode, RatingTensor,
    RecommendationList, Recommender, ScoredInvocation, SnippetRecommendation,
};
pub use error::{Error, Result};
pub use evaluation::{run_evaluation, Configuration, EvalConfig, EvalReport, FoldScheme};
pub use similarity::{
    cosine, jaccard, project_features, top_k_projects, top_m_declarations, DeclRef, FeatureVector,
    Neighbor, NeighborSet,
};
