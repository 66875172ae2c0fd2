//! JSON-over-HTTP front end for the recommender.
//!
//! `POST /api/v1/recommend` treats the request body as a transient active
//! project and answers with ranked invocations and code snippets.
//! `GET /api/v1/health` reports whether the corpus is loaded.

use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use apirec_core::engine::{DEFAULT_K, DEFAULT_M, DEFAULT_N, DEFAULT_QUERY_SIZE, DEFAULT_SNIPPETS};
use apirec_core::{load_snippets, parse_facts, ActiveQuery, Corpus, Params, Recommender};
use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

/// Project id given to request contexts.
pub const REQUEST_PROJECT: &str = "<request>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclarationInput {
    pub name: String,
    #[serde(default)]
    pub invocations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendRequest {
    #[serde(default)]
    pub context_declarations: Vec<DeclarationInput>,
    pub active: DeclarationInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, rename = "M", alias = "m", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, rename = "N", alias = "n", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiItem {
    pub invocation: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetItem {
    pub declaration: String,
    pub project: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    pub sequence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub apis: Vec<ApiItem>,
    pub snippets: Vec<SnippetItem>,
    pub fallback_used: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("corpus is still loading")]
    NotLoaded,
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::NotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

fn positive(value: Option<usize>, default: usize, name: &str) -> Result<usize, ServiceError> {
    match value {
        None => Ok(default),
        Some(0) => Err(ServiceError::BadRequest(format!("{name} must be a positive integer"))),
        Some(v) => Ok(v),
    }
}

/// Answers one request against a loaded engine. The request never touches
/// the corpus.
pub fn handle_recommend(engine: &Recommender, request: &RecommendRequest) -> Result<RecommendResponse, ServiceError> {
    let params = Params {
        k: positive(request.k, DEFAULT_K, "k")?,
        m: positive(request.m, DEFAULT_M, "M")?,
        n: positive(request.n, DEFAULT_N, "N")?,
        ..Params::default()
    };
    let snippet_count = positive(request.snippet_count, DEFAULT_SNIPPETS, "snippet_count")?;
    let context: Vec<(String, Vec<String>)> = request
        .context_declarations
        .iter()
        .map(|d| (d.name.clone(), d.invocations.clone()))
        .collect();
    let query = ActiveQuery::from_strings(
        engine.corpus(),
        REQUEST_PROJECT,
        &context,
        (&request.active.name, &request.active.invocations),
    )
    .map_err(|e| ServiceError::BadRequest(e.to_string()))?;

    let rec = engine
        .recommend_apis(&query, &params)
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
    let snippets = engine.recommend_snippets(
        &rec.list,
        query.declaration(),
        &rec.projects,
        DEFAULT_QUERY_SIZE,
        snippet_count,
    );
    Ok(RecommendResponse {
        apis: rec
            .list
            .items
            .iter()
            .enumerate()
            .map(|(i, s)| ApiItem {
                invocation: s.canonical.clone(),
                score: s.score,
                rank: i + 1,
            })
            .collect(),
        snippets: snippets
            .into_iter()
            .map(|s| SnippetItem {
                declaration: s.declaration_name,
                project: s.project_id,
                score: s.jaccard_score,
                body: s.body,
                sequence: s.invocation_sequence,
            })
            .collect(),
        fallback_used: rec.list.fallback_used,
        elapsed_ms: rec.list.elapsed_secs * 1e3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub projects: usize,
    pub declarations: usize,
    pub vocabulary: usize,
}

impl CorpusSummary {
    pub fn of(corpus: &Corpus) -> Self {
        Self {
            projects: corpus.len(),
            declarations: corpus.declaration_total(),
            vocabulary: corpus.vocabulary().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub corpus: Option<CorpusSummary>,
}

/// Shared server state; the engine is set once, after loading.
#[derive(Debug, Default)]
pub struct AppState {
    engine: OnceLock<Recommender>,
}

impl AppState {
    pub fn loading() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn ready(engine: Recommender) -> Arc<Self> {
        let state = Self::default();
        state.engine.set(engine).expect("fresh state");
        Arc::new(state)
    }

    /// Returns false if an engine was already installed.
    pub fn install(&self, engine: Recommender) -> bool {
        self.engine.set(engine).is_ok()
    }

    pub fn engine(&self) -> Option<&Recommender> {
        self.engine.get()
    }

    pub fn health(&self) -> Health {
        match self.engine() {
            None => Health {
                status: "loading".into(),
                corpus: None,
            },
            Some(e) => Health {
                status: "ok".into(),
                corpus: Some(CorpusSummary::of(e.corpus())),
            },
        }
    }
}

async fn recommend(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<RecommendResponse>, ServiceError> {
    let engine = state.engine().ok_or(ServiceError::NotLoaded)?;
    let request: RecommendRequest =
        serde_json::from_slice(&body).map_err(|e| ServiceError::BadRequest(format!("malformed request: {e}")))?;
    handle_recommend(engine, &request).map(Json)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(state.health())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/recommend", post(recommend))
        .route("/api/v1/health", get(health))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Reads a FACTS file and, optionally, a SNIPPETS file.
pub fn load_corpus(facts: &Path, snippets: Option<&Path>) -> apirec_core::Result<Corpus> {
    let corpus = parse_facts(BufReader::new(File::open(facts)?))?;
    Ok(match snippets {
        Some(path) => corpus.with_snippets(load_snippets(BufReader::new(File::open(path)?))?),
        None => corpus,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot listen on {0}: {1}")]
    Bind(SocketAddr, std::io::Error),
    #[error("loading corpus: {0}")]
    Load(#[from] apirec_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binds `listen`, then loads the corpus in the background; requests that
/// arrive earlier get 503.
pub async fn serve(listen: SocketAddr, facts: PathBuf, snippets: Option<PathBuf>) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .map_err(|e| ServeError::Bind(listen, e))?;
    let state = AppState::loading();
    let app = router(Arc::clone(&state));
    let server = tokio::spawn(async move { axum::serve(listener, app).await });

    let corpus = tokio::task::spawn_blocking(move || load_corpus(&facts, snippets.as_deref()))
        .await
        .map_err(|e| ServeError::Io(std::io::Error::other(e)))??;
    let summary = CorpusSummary::of(&corpus);
    state.install(Recommender::new(Arc::new(corpus)));
    tracing::info!(
        projects = summary.projects,
        declarations = summary.declarations,
        vocabulary = summary.vocabulary,
        "corpus loaded, serving on {listen}"
    );
    server.await.map_err(|e| ServeError::Io(std::io::Error::other(e)))??;
    Ok(())
}
