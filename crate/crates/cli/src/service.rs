//! HTTP front end. Every response is an envelope: `{"ok": true, "data": ...}` or
//! `{"ok": false, "error": {"code": ..., "message": ...}}`.
//!
//! | route | |
//! |---|---|
//! | `GET /documents` | id and page size of every loaded document |
//! | `GET /documents/{id}` | the document in its wire format |
//! | `POST /select` | body: a pattern selection; returns the graph summary and the mined table of its document |
//! | `POST /mine-corpus` | body: `{pattern_id, selection?, doc_ids?}`; returns results ranked by confidence |
//! | `GET /report?source=lab\|client` | evaluation against the loaded ground truth |

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use argmine::pattern_graph::ArgSummary;
use argmine::{
    rank_results, report, Document, EvalReport, GroundTruthTable, PatternSelection, PatternSource, TableResult,
    Zone,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::engine::{load_named_selection, load_results, Engine};

pub struct AppState {
    pub engine: Engine,
    pub docs: BTreeMap<String, Document>,
    pub patterns_dir: Option<PathBuf>,
    pub gt: Option<Vec<GroundTruthTable>>,
    pub results_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<argmine::Error> for ApiError {
    fn from(e: argmine::Error) -> Self {
        use argmine::Error as E;
        let status = match &e {
            E::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            E::NoTokenInBox { .. }
            | E::NoFieldOverlap { .. }
            | E::DuplicateField { .. }
            | E::NoLabeledNode
            | E::DocMismatch { .. }
            | E::UnmatchedDocs(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<argmine::Error>() {
            Some(inner) => ApiError {
                message: format!("{e:#}"),
                ..ApiError::new(StatusCode::BAD_REQUEST, inner.code(), "")
            },
            None => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("{e:#}")),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"ok": false, "error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

fn ok<T: Serialize>(data: T) -> Response {
    Json(json!({"ok": true, "data": data})).into_response()
}

type Shared = Arc<AppState>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/documents", get(list_documents))
        .route("/documents/{id}", get(get_document))
        .route("/select", post(select))
        .route("/mine-corpus", post(mine_corpus))
        .route("/report", get(get_report))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(Arc::new(state))
}

#[derive(Serialize)]
struct DocEntry<'a> {
    doc_id: &'a str,
    page_w: i64,
    page_h: i64,
    tokens: usize,
}

async fn list_documents(State(s): State<Shared>) -> Response {
    let list: Vec<DocEntry> = s
        .docs
        .values()
        .map(|d| DocEntry {
            doc_id: d.doc_id(),
            page_w: d.page_w(),
            page_h: d.page_h(),
            tokens: d.tokens().len(),
        })
        .collect();
    ok(list)
}

fn document<'a>(s: &'a AppState, id: &str) -> Result<&'a Document, ApiError> {
    s.docs
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_document", format!("no document {id}")))
}

async fn get_document(State(s): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(ok(document(&s, &id)?))
}

/// Runs engine work off the async workers.
async fn blocking<T, F>(s: &Shared, f: F) -> Result<T, ApiError>
where
    F: FnOnce(&AppState) -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    let s = Arc::clone(s);
    tokio::task::spawn_blocking(move || f(&s))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

#[derive(Serialize)]
struct SelectResponse {
    arg: ArgSummary,
    result: TableResult,
}

pub const SELECTION_PATTERN_ID: &str = "selection";

async fn select(State(s): State<Shared>, body: String) -> Result<Response, ApiError> {
    let sel = PatternSelection::from_json(&body)?;
    let out = blocking(&s, move |s| {
        let doc = document(s, &sel.doc_id)?;
        let q = s.engine.pattern(&sel, doc)?;
        let result = s.engine.mine(&q, doc, SELECTION_PATTERN_ID);
        Ok(SelectResponse { arg: q.summary(), result })
    })
    .await?;
    Ok(ok(out))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MineRequest {
    pattern_id: String,
    /// Inline selection; otherwise `<patterns dir>/<pattern_id>.json`.
    #[serde(default)]
    selection: Option<PatternSelection>,
    /// Defaults to every loaded document.
    #[serde(default)]
    doc_ids: Option<Vec<String>>,
}

fn bad_request(e: serde_json::Error) -> ApiError {
    let code = if e.is_data() { "schema_violation" } else { "malformed_json" };
    ApiError::new(StatusCode::BAD_REQUEST, code, e.to_string())
}

async fn mine_corpus(State(s): State<Shared>, body: String) -> Result<Response, ApiError> {
    let req: MineRequest = serde_json::from_str(&body).map_err(bad_request)?;
    let ranked = blocking(&s, move |s| {
        let sel = match req.selection {
            Some(sel) => {
                sel.validate()?;
                sel
            }
            None => {
                let Some(dir) = &s.patterns_dir else {
                    return Err(ApiError::new(
                        StatusCode::NOT_FOUND,
                        "unknown_pattern",
                        "no inline selection and no pattern directory configured",
                    ));
                };
                let path = dir.join(format!("{}.json", req.pattern_id));
                if !path.is_file() {
                    return Err(ApiError::new(
                        StatusCode::NOT_FOUND,
                        "unknown_pattern",
                        format!("no pattern {}", req.pattern_id),
                    ));
                }
                load_named_selection(&path)?.1
            }
        };
        let source = document(s, &sel.doc_id)?;
        let q = s.engine.pattern(&sel, source)?;
        let targets: Vec<&Document> = match &req.doc_ids {
            Some(ids) => ids.iter().map(|id| document(s, id)).collect::<Result<_, _>>()?,
            None => s.docs.values().collect(),
        };
        let results = s.engine.mine_all(&q, targets, &req.pattern_id);
        let keyed = results.into_iter().map(|r| (r.doc_id.clone(), r)).collect();
        Ok(rank_results(keyed).into_iter().map(|(_, r)| r).collect::<Vec<_>>())
    })
    .await?;
    Ok(ok(ranked))
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    source: Option<PatternSource>,
}

#[derive(Serialize)]
struct ReportResponse {
    source: PatternSource,
    report: EvalReport,
    table: String,
}

async fn get_report(State(s): State<Shared>, Query(q): Query<ReportQuery>) -> Result<Response, ApiError> {
    let source = q.source.unwrap_or(PatternSource::Lab);
    let out = blocking(&s, move |s| {
        let Some(gt) = &s.gt else {
            return Err(ApiError::new(StatusCode::NOT_FOUND, "no_ground_truth", "service started without --gt"));
        };
        let mut zones: HashMap<String, Zone> = HashMap::new();
        let mut own: Vec<TableResult> = Vec::new();
        if let Some(dir) = &s.patterns_dir {
            for g in gt {
                let path = dir.join(format!("{}.json", g.doc_id));
                if !path.is_file() {
                    continue;
                }
                let (pid, sel) = load_named_selection(&path)?;
                zones.insert(g.doc_id.clone(), sel.zone);
                if s.results_dir.is_none() {
                    let doc = document(s, &g.doc_id)?;
                    let result = match s.engine.pattern(&sel, doc) {
                        Ok(q) => s.engine.mine(&q, doc, &pid),
                        // an unusable pattern extracts nothing
                        Err(_) => TableResult::empty(doc.doc_id(), pid),
                    };
                    own.push(result);
                }
            }
        }
        let results = match &s.results_dir {
            Some(dir) => load_results(std::slice::from_ref(dir))?,
            None if s.patterns_dir.is_some() => own,
            None => {
                return Err(ApiError::new(
                    StatusCode::NOT_FOUND,
                    "no_results",
                    "service started without --results or --patterns",
                ))
            }
        };
        let report = report(gt, &results, &zones)?;
        Ok(ReportResponse {
            source,
            table: report.to_table(source),
            report,
        })
    })
    .await?;
    Ok(ok(out))
}
