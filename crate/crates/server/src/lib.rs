//! HTTP service over a QED corpus: browsing, validated annotation writes,
//! pattern previews and judging sessions.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/examples?offset=&limit=` | page of ids with label and version |
//! | GET | `/examples/{id}` | current example and its version |
//! | POST | `/examples/{id}/annotation` | validated write, optimistic on `version` |
//! | POST | `/examples/{id}/pattern-preview` | entailment pattern of a draft or the stored explanation |
//! | GET | `/judge/next?condition=&session=` | next instance for a session, highlights per condition |
//! | POST | `/judge/verdict` | records a verdict |
//! | GET | `/reports/rater?weighting=` | live rater report |
//! | GET | `/reports/stats?sample=&seed=` | corpus statistics |
//!
//! Errors are JSON objects with an `error` code and a `message`.

mod store;

use std::collections::HashMap;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qed_core::analysis::corpus_stats;
use qed_core::corpus::CorpusDocument;
use qed_core::rater::{
    aggregate_judgments_with, Condition, JudgmentRecord, RaterReport, Weighting,
};
use qed_core::validate::{Validator, Violation};
use qed_core::{
    extract_pattern, AnswerAnnotation, Explanation, ExplanationLabel, QedExample,
    ReferentialEquality, TextSpan,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use store::{AnnotationEntry, JudgeInstance, SessionEntry, Store};

/// Environment variable naming the default state directory.
pub const STATE_DIR_ENV: &str = "QED_STATE_DIR";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: json!({ "error": code, "message": message.into() }),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UNKNOWN_ID", format!("no example {id:?}"))
    }

    fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.body[key] = json!(value);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<io::Error> for ApiError {
    fn from(e: io::Error) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "IO_ERROR", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_PAYLOAD", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "USAGE", e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct AppState {
    corpus: CorpusDocument,
    index: HashMap<String, usize>,
    pool: Vec<JudgeInstance>,
    validator: Validator,
    store: RwLock<Store>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    /// Opens (or creates) the state directory for `corpus`. Without a pool,
    /// every explained example is judged with its gold answer.
    pub fn open(
        corpus: CorpusDocument,
        state_dir: impl Into<PathBuf>,
        pool: Option<Vec<JudgeInstance>>,
    ) -> io::Result<SharedState> {
        let index: HashMap<String, usize> = corpus
            .examples
            .iter()
            .enumerate()
            .map(|(i, ex)| (ex.id.clone(), i))
            .collect();
        if index.len() != corpus.examples.len() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "duplicate example ids"));
        }
        let pool = pool.unwrap_or_else(|| JudgeInstance::from_corpus(&corpus));
        if let Some(bad) = pool.iter().find(|p| !index.contains_key(&p.example_id)) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("judge pool refers to unknown example {:?}", bad.example_id),
            ));
        }
        let store = Store::open(state_dir)?;
        Ok(Arc::new(Self {
            corpus,
            index,
            pool,
            validator: Validator::default(),
            store: RwLock::new(store),
        }))
    }

    fn base(&self, id: &str) -> ApiResult<&QedExample> {
        self.index
            .get(id)
            .map(|&i| &self.corpus.examples[i])
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// The example with its latest accepted annotation applied.
    fn current(&self, store: &Store, id: &str) -> ApiResult<QedExample> {
        let base = self.base(id)?;
        Ok(match store.annotations.get(id) {
            Some(entry) => entry.apply(base),
            None => base.clone(),
        })
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/examples", get(list_examples))
        .route("/examples/{id}", get(get_example))
        .route("/examples/{id}/annotation", post(post_annotation))
        .route("/examples/{id}/pattern-preview", post(pattern_preview))
        .route("/judge/next", get(judge_next))
        .route("/judge/verdict", post(post_verdict))
        .route("/reports/rater", get(rater_report))
        .route("/reports/stats", get(stats_report))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: SharedState) -> io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

// ---------------------------------------------------------------------------
// examples

#[derive(Deserialize)]
struct Page {
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Serialize)]
struct ExampleSummary<'a> {
    id: &'a str,
    label: ExplanationLabel,
    version: u64,
}

async fn list_examples(
    State(state): State<SharedState>,
    page: Result<Query<Page>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(page) = page?;
    let offset = page.offset.unwrap_or(0);
    let limit = page.limit.unwrap_or(50).clamp(1, 500);
    let store = state.read();
    let items: Vec<ExampleSummary> = state
        .corpus
        .examples
        .iter()
        .skip(offset)
        .take(limit)
        .map(|ex| {
            let entry = store.annotations.get(&ex.id);
            ExampleSummary {
                id: &ex.id,
                label: entry.map_or(ex.label, |e| e.label),
                version: entry.map_or(0, |e| e.version),
            }
        })
        .collect();
    Ok(Json(json!({
        "total": state.corpus.examples.len(),
        "offset": offset,
        "limit": limit,
        "items": items,
    }))
    .into_response())
}

async fn get_example(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let store = state.read();
    let example = state.current(&store, &id)?;
    Ok(Json(json!({ "version": store.version(&id), "example": example })).into_response())
}

#[derive(Deserialize)]
struct AnnotationRequest {
    label: ExplanationLabel,
    #[serde(default)]
    explanation: Option<Explanation>,
    #[serde(default)]
    answers: Vec<AnswerAnnotation>,
    /// Version the client last read; 0 for a never-annotated example.
    #[serde(default)]
    version: u64,
}

async fn post_annotation(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Result<Json<AnnotationRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let base = state.base(&id)?;
    let Json(req) = body?;
    let mut candidate = QedExample {
        label: req.label,
        explanation: req.explanation,
        answers: req.answers,
        ..base.clone()
    };
    candidate.hydrate();

    let mut store = state.write();
    let current = store.version(&id);
    if req.version != current {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "VERSION_CONFLICT",
            format!("example is at version {current}, request was based on {}", req.version),
        )
        .with("version", current));
    }
    let report = state.validator.validate(&candidate);
    if !report.is_valid() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "INVALID_ANNOTATION",
            "annotation failed validation",
        )
        .with("violations", &report.violations));
    }
    let entry = AnnotationEntry {
        id: id.clone(),
        version: current + 1,
        label: candidate.label,
        explanation: candidate.explanation,
        answers: candidate.answers,
    };
    let version = entry.version;
    store.put_annotation(entry)?;
    let warnings: Vec<&Violation> = report.violations.iter().collect();
    Ok(Json(json!({ "id": id, "version": version, "violations": warnings })).into_response())
}

#[derive(Deserialize)]
struct PreviewRequest {
    explanation: Explanation,
}

async fn pattern_preview(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let mut example = state.current(&state.read(), &id)?;
    if !body.iter().all(u8::is_ascii_whitespace) {
        let req: PreviewRequest = serde_json::from_slice(&body).map_err(|e| {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_PAYLOAD", e.to_string())
        })?;
        example.label = ExplanationLabel::ValidExplanation;
        example.explanation = Some(req.explanation);
        example.answers.clear();
        example.hydrate();
    }
    match extract_pattern(&example) {
        Ok(pattern) => Ok(Json(pattern).into_response()),
        Err(e) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// judging

#[derive(Deserialize)]
struct NextQuery {
    condition: String,
    session: String,
}

/// What a rater sees. Fields beyond the condition's entitlement are absent.
#[derive(Debug, Serialize)]
struct JudgeItem {
    session: String,
    condition: Condition,
    instance_id: String,
    title: String,
    question: String,
    passage: String,
    answer: TextSpan,
    #[serde(skip_serializing_if = "Option::is_none")]
    sentence: Option<TextSpan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equalities: Option<Vec<ReferentialEquality>>,
}

fn judge_item(session: &str, condition: Condition, inst: &JudgeInstance, ex: &QedExample) -> JudgeItem {
    let answer = TextSpan::from_host(&ex.passage, inst.answer.0, inst.answer.1)
        .unwrap_or_else(|| TextSpan::new(inst.answer.0, inst.answer.1, ""));
    let explanation = ex.explanation.as_ref();
    let sentence = || {
        explanation
            .map(|e| e.selected_sentence.0.clone())
            .or_else(|| ex.sentence_index_of(&answer).map(|i| ex.sentence_boundaries[i].clone()))
    };
    let equalities = || explanation.map(|e| e.equalities.clone()).unwrap_or_default();
    let (sentence, equalities) = match condition {
        Condition::None => (None, None),
        Condition::Sentence => (sentence(), None),
        Condition::Qed => (sentence(), Some(equalities())),
    };
    JudgeItem {
        session: session.to_owned(),
        condition,
        instance_id: inst.instance_id.clone(),
        title: ex.title.clone(),
        question: ex.question.clone(),
        passage: ex.passage.clone(),
        answer,
        sentence,
        equalities,
    }
}

async fn judge_next(
    State(state): State<SharedState>,
    query: Result<Query<NextQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let condition: Condition = q
        .condition
        .parse()
        .map_err(|e: qed_core::Error| ApiError::new(StatusCode::BAD_REQUEST, "USAGE", e.to_string()))?;
    if q.session.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "USAGE", "session must not be empty"));
    }
    let mut store = state.write();
    match store.sessions.get(&q.session) {
        Some(&bound) if bound != condition => {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "CONDITION_MISMATCH",
                format!("session {:?} judges under condition {bound}", q.session),
            )
            .with("condition", bound));
        }
        Some(_) => {}
        None => store.put_session(&q.session, condition)?,
    }
    let next = state.pool.iter().find(|inst| {
        !store
            .judgments
            .iter()
            .any(|j| j.rater_id == q.session && j.instance_id == inst.instance_id)
    });
    let Some(inst) = next else {
        return Ok(StatusCode::NO_CONTENT.into_response());
    };
    let ex = state.current(&store, &inst.example_id)?;
    Ok(Json(judge_item(&q.session, condition, inst, &ex)).into_response())
}

#[derive(Deserialize)]
struct VerdictRequest {
    session: String,
    instance_id: String,
    verdict: bool,
    #[serde(default)]
    confidence: Option<u8>,
}

async fn post_verdict(
    State(state): State<SharedState>,
    body: Result<Json<VerdictRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let inst = state
        .pool
        .iter()
        .find(|i| i.instance_id == req.instance_id)
        .ok_or_else(|| {
            ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_ID", format!("no instance {:?}", req.instance_id))
        })?;
    let mut store = state.write();
    let condition = *store.sessions.get(&req.session).ok_or_else(|| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "UNKNOWN_SESSION",
            format!("session {:?} has not requested an instance", req.session),
        )
    })?;
    if store
        .judgments
        .iter()
        .any(|j| j.rater_id == req.session && j.instance_id == req.instance_id)
    {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "DUPLICATE_JUDGMENT",
            format!("session {:?} already judged {:?}", req.session, req.instance_id),
        ));
    }
    let record = JudgmentRecord {
        rater_id: req.session,
        instance_id: inst.instance_id.clone(),
        condition,
        instance_correct: inst.correct,
        error_type: inst.error_type,
        verdict: req.verdict,
        confidence: req.confidence,
    };
    record
        .check()
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.code(), e.to_string()))?;
    store.put_judgment(record.clone())?;
    Ok(Json(record).into_response())
}

// ---------------------------------------------------------------------------
// reports

#[derive(Deserialize)]
struct RaterQuery {
    #[serde(default)]
    weighting: Weighting,
}

async fn rater_report(
    State(state): State<SharedState>,
    query: Result<Query<RaterQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let store = state.read();
    let report = if store.judgments.is_empty() {
        RaterReport {
            weighting: q.weighting,
            judgments: 0,
            conditions: Vec::new(),
        }
    } else {
        aggregate_judgments_with(&store.judgments, q.weighting)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.code(), e.to_string()))?
    };
    Ok(Json(report).into_response())
}

#[derive(Deserialize)]
struct StatsQuery {
    #[serde(default = "default_sample")]
    sample: usize,
    #[serde(default)]
    seed: u64,
}

fn default_sample() -> usize {
    100
}

async fn stats_report(
    State(state): State<SharedState>,
    query: Result<Query<StatsQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let store = state.read();
    let examples = state
        .corpus
        .examples
        .iter()
        .map(|ex| state.current(&store, &ex.id))
        .collect::<ApiResult<Vec<_>>>()?;
    let doc = CorpusDocument::new(examples, state.corpus.provenance.clone());
    Ok(Json(corpus_stats(&doc, q.sample, q.seed)).into_response())
}
