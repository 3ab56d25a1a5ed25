//! HTTP routes.
//!
//! | Method | Path | Body / query | Success |
//! |---|---|---|---|
//! | POST | `/api/recognize` | multipart: `file`, `sign_type`, optional `kind` | [`RecognizeResponse`] |
//! | POST | `/api/sessions/{token}/confirm` | [`ConfirmRequest`] | [`ConfirmResponse`] |
//! | GET | `/api/sessions/{token}` | | [`LookupSession`] |
//! | GET | `/api/stats` | | [`ConfirmationStats`] |
//! | GET | `/api/signs/{entry_id}` | | `EntryView` |
//! | GET | `/api/search` | `gloss`, `word`, `start_hs`, `end_hs` | [`SearchResponse`] |
//! | GET | `/api/handshapes` | | list of labels |
//!
//! Errors carry an [`ErrorBody`](crate::error::ErrorBody). Exemplar `media` paths resolve under `/media/`.

use crate::error::ApiError;
use crate::session::{ConfirmError, LookupSession, Selection, SessionState};
use crate::state::{AppState, Ledger, LifecycleEvent, Snapshot};
use crate::stats::{ConfirmationStats, StatsEvent};
use axum::extract::multipart::{Field, MultipartRejection};
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use signlookup_core::intake::{
    extract_features, probe_duration, validate, IntakeError, SpoolEntry, UploadDescriptor, UploadKind,
};
use signlookup_core::signbank::{ExemplarView, SearchQuery, SignBankError};
use signlookup_core::{Bank, CandidateList, QueryMode};
use std::sync::Arc;
use tower_http::services::{ServeDir, ServeFile};

const FLUSH_BYTES: usize = 256 * 1024;
const MAX_TEXT_FIELD: usize = 256;

pub fn router(state: Arc<AppState>) -> Router {
    let recognize_route = post(recognize)
        .layer(DefaultBodyLimit::disable())
        .layer(middleware::from_fn_with_state(state.clone(), announce_response));
    let mut app = Router::new()
        .route("/api/recognize", recognize_route)
        .route("/api/sessions/{token}/confirm", post(confirm))
        .route("/api/sessions/{token}", get(session))
        .route("/api/stats", get(stats))
        .route("/api/signs/{entry_id}", get(sign))
        .route("/api/search", get(search))
        .route("/api/handshapes", get(handshapes))
        .route("/api", get(api_not_found))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found))
        .with_state(state.clone());
    if let Some(dir) = state.media_dir() {
        app = app.nest_service("/media", ServeDir::new(dir));
    }
    if let Some(dir) = state.webui_dir() {
        app = app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html"))));
    }
    app
}

async fn announce_response(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let resp = next.run(req).await;
    state.emit(LifecycleEvent::Responded {
        status: resp.status().as_u16(),
    });
    resp
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizeResponse {
    pub token: String,
    pub sign_type: QueryMode,
    pub expires_at_ms: u64,
    /// Best first, in matcher order.
    pub candidates: Vec<CandidateOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOut {
    pub rank: usize,
    pub entry_id: String,
    pub base_gloss: String,
    pub score: f64,
    pub variants: Vec<VariantOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantOut {
    pub variant_id: String,
    pub label: String,
    pub score: f64,
    pub previews: Vec<ExemplarView>,
}

struct Upload {
    filename: String,
    content_type: Option<String>,
    entry: Option<SpoolEntry>,
}

#[derive(Default)]
struct Form {
    upload: Option<Upload>,
    sign_type: Option<String>,
    kind: Option<String>,
}

struct Recognized {
    list: CandidateList,
    sign_type: QueryMode,
    snapshot: Arc<Snapshot>,
}

async fn recognize(State(state): State<Arc<AppState>>, multipart: Result<Multipart, MultipartRejection>) -> Response {
    let mut form = Form::default();
    let read = match multipart {
        Ok(mp) => read_form(&state, mp, &mut form).await,
        Err(e) => Err(ApiError::bad_request("bad_multipart", e.body_text())),
    };
    let st = state.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        let result = read.and_then(|()| run_pipeline(&st, &form));
        if let Some(entry) = form.upload.take().and_then(|u| u.entry) {
            purge(&st, entry);
        }
        result
    })
    .await
    .unwrap_or_else(|e| Err(ApiError::internal(format!("recognition task failed: {e}"))));

    match outcome {
        Ok(r) => Json(respond(&state, r)).into_response(),
        Err(e) => e.into_response(),
    }
}

fn purge(state: &AppState, entry: SpoolEntry) {
    let path = entry.path().to_path_buf();
    match state.spool().purge(entry) {
        Ok(()) => state.emit(LifecycleEvent::Purged { path }),
        Err(e) => state.emit(LifecycleEvent::PurgeFailed {
            path,
            message: e.to_string(),
        }),
    }
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    let status = e.status();
    let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "too_large" } else { "bad_multipart" };
    ApiError::new(status, code, e.body_text())
}

async fn read_text(mut field: Field<'_>, name: &str) -> Result<String, ApiError> {
    let mut buf = Vec::new();
    while let Some(chunk) = field.chunk().await.map_err(multipart_error)? {
        buf.extend_from_slice(&chunk);
        if buf.len() > MAX_TEXT_FIELD {
            return Err(ApiError::bad_request("bad_field", format!("field {name:?} is too long")));
        }
    }
    String::from_utf8(buf).map_err(|_| ApiError::bad_request("bad_field", format!("field {name:?} is not UTF-8")))
}

async fn flush(slot: &mut Option<SpoolEntry>, buf: Vec<u8>) -> Result<(), ApiError> {
    let mut entry = slot.take().ok_or_else(|| ApiError::internal("spool entry missing"))?;
    let (entry, r) = tokio::task::spawn_blocking(move || {
        let r = entry.write_chunk(&buf).and_then(|()| if buf.is_empty() { entry.finish() } else { Ok(()) });
        (entry, r)
    })
    .await
    .map_err(|e| ApiError::internal(format!("spool write failed: {e}")))?;
    *slot = Some(entry);
    Ok(r?)
}

async fn read_form(state: &AppState, mut mp: Multipart, form: &mut Form) -> Result<(), ApiError> {
    while let Some(mut field) = mp.next_field().await.map_err(multipart_error)? {
        match field.name().unwrap_or("") {
            "file" => {
                if form.upload.is_some() {
                    return Err(ApiError::bad_request("bad_field", "more than one file field"));
                }
                let entry = state.spool().create()?;
                state.emit(LifecycleEvent::Spooled {
                    path: entry.path().to_path_buf(),
                });
                let upload = form.upload.insert(Upload {
                    filename: field.file_name().unwrap_or("").to_string(),
                    content_type: field.content_type().map(str::to_string),
                    entry: Some(entry),
                });
                let limit = state.spool().max_bytes();
                let mut buf = Vec::with_capacity(FLUSH_BYTES);
                let mut seen = 0u64;
                while let Some(chunk) = field.chunk().await.map_err(multipart_error)? {
                    seen += chunk.len() as u64;
                    if seen > limit {
                        return Err(IntakeError::TooLarge { limit }.into());
                    }
                    buf.extend_from_slice(&chunk);
                    if buf.len() >= FLUSH_BYTES {
                        flush(&mut upload.entry, std::mem::take(&mut buf)).await?;
                    }
                }
                if !buf.is_empty() {
                    flush(&mut upload.entry, buf).await?;
                }
                flush(&mut upload.entry, Vec::new()).await?;
            }
            "sign_type" => form.sign_type = Some(read_text(field, "sign_type").await?),
            "kind" => form.kind = Some(read_text(field, "kind").await?),
            other => {
                return Err(ApiError::bad_request("bad_field", format!("unexpected field {other:?}")));
            }
        }
    }
    Ok(())
}

fn upload_kind(form: &Form, upload: &Upload) -> Result<UploadKind, ApiError> {
    if let Some(k) = &form.kind {
        return UploadKind::parse(k.trim()).ok_or_else(|| {
            ApiError::bad_request("bad_field", format!("unknown kind {k:?} (expected video_mp4, video_mov or features)"))
        });
    }
    upload
        .content_type
        .as_deref()
        .and_then(UploadKind::from_content_type)
        .or_else(|| UploadKind::from_filename(&upload.filename))
        .ok_or_else(|| {
            ApiError::bad_request(
                "unknown_kind",
                format!("cannot tell the upload kind of {:?}; use .mp4, .mov or .features", upload.filename),
            )
        })
}

/// validate → extract → recognize. Runs on a blocking thread.
fn run_pipeline(state: &AppState, form: &Form) -> Result<Recognized, ApiError> {
    let upload = form
        .upload
        .as_ref()
        .ok_or_else(|| ApiError::bad_request("missing_field", "multipart field \"file\" is required"))?;
    let sign_type: QueryMode = form
        .sign_type
        .as_deref()
        .ok_or_else(|| ApiError::bad_request("missing_field", "multipart field \"sign_type\" is required"))?
        .trim()
        .parse()
        .map_err(|e: String| ApiError::bad_request("bad_field", e))?;
    let kind = upload_kind(form, upload)?;
    let entry = upload.entry.as_ref().ok_or_else(|| ApiError::internal("spool entry missing"))?;

    let (duration_s, probe_error) = if entry.is_empty() {
        (0.0, None)
    } else {
        match probe_duration(kind, entry, state.extractor()) {
            Ok(d) => (d, None),
            Err(e) => (0.0, Some(e)),
        }
    };
    let desc = UploadDescriptor {
        filename: upload.filename.clone(),
        payload_len: entry.len(),
        declared_kind: kind,
        sign_type,
        duration_s,
    };
    let report = validate(&desc);
    if !report.accepted {
        return Err(ApiError::validation(report));
    }
    if let Some(e) = probe_error {
        return Err(e.into());
    }
    let features = extract_features(&desc, entry, state.extractor())?;

    let snapshot = state.snapshot();
    let list = snapshot.recognizer.recognize(&features, sign_type)?;
    if list.mode != sign_type {
        return Err(ApiError::internal("recognizer answered in the wrong mode"));
    }
    list.check(snapshot.recognizer.k())
        .map_err(|e| ApiError::internal(format!("recognizer broke its contract: {e}")))?;
    Ok(Recognized {
        list,
        sign_type,
        snapshot,
    })
}

/// Candidate list as served by `/api/recognize`, with exemplar previews.
pub fn candidates_out(bank: &Bank, list: &CandidateList) -> Vec<CandidateOut> {
    list.candidates
        .iter()
        .enumerate()
        .map(|(i, c)| CandidateOut {
            rank: i + 1,
            entry_id: c.entry_id.clone(),
            base_gloss: c.base_gloss.clone(),
            score: c.score,
            variants: c
                .variants
                .iter()
                .map(|v| VariantOut {
                    variant_id: v.variant_id.clone(),
                    label: v.label.clone(),
                    score: v.score,
                    previews: bank
                        .variant(&v.variant_id)
                        .map(|sv| {
                            bank.exemplars_of(sv)
                                .map(|x| ExemplarView {
                                    exemplar_id: x.exemplar_id.clone(),
                                    media: x.media.clone(),
                                    source_utterance: x.source_utterance.clone(),
                                })
                                .collect()
                        })
                        .unwrap_or_default(),
                })
                .collect(),
        })
        .collect()
}

fn respond(state: &AppState, r: Recognized) -> RecognizeResponse {
    let candidates = candidates_out(&r.snapshot.bank, &r.list);
    let now = state.now_ms();
    let mut ledger = state.ledger();
    let ttl = ledger.sessions.ttl_ms();
    let session = ledger.sessions.create(r.list, r.sign_type, now);
    RecognizeResponse {
        token: session.token.clone(),
        sign_type: r.sign_type,
        expires_at_ms: now.saturating_add(ttl),
        candidates,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfirmRequest {
    pub selection: Selection,
}

/// Where the UI should go next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Redirect {
    /// The confirmed sign's entry page.
    Entry { entry_id: String, api: String },
    /// The main sign-bank search page.
    Search { api: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfirmResponse {
    pub token: String,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_rank: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_variant: Option<String>,
    pub redirect: Redirect,
}

async fn confirm(
    State(state): State<Arc<AppState>>,
    Path(token): Path<String>,
    body: Result<Json<ConfirmRequest>, JsonRejection>,
) -> Result<Json<ConfirmResponse>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request("bad_body", e.body_text()))?;
    let session = tokio::task::spawn_blocking(move || {
        let now = state.now_ms();
        let mut ledger = state.ledger();
        let Ledger { sessions, stats } = &mut *ledger;
        sessions.confirm(&token, &req.selection, now, |s, outcome| {
            stats.append(&StatsEvent {
                sign_type: s.sign_type,
                outcome,
                at_ms: now,
            })
        })
    })
    .await
    .map_err(|e| ApiError::internal(format!("confirm task failed: {e}")))?
    .map_err(|e| match e {
        ConfirmError::NotFound => ApiError::not_found("unknown session token"),
        ConfirmError::AlreadyTerminal(s) => {
            ApiError::new(StatusCode::CONFLICT, "already_terminal", format!("session is already {s:?}"))
        }
        ConfirmError::Expired => ApiError::new(StatusCode::GONE, "expired", "session expired"),
        ConfirmError::BadSelection(m) => ApiError::bad_request("bad_selection", m),
        ConfirmError::Commit(e) => ApiError::internal(e.to_string()),
    })?;

    let redirect = match session.confirmed_rank {
        Some(rank) => {
            let entry_id = session.candidates.candidates[rank as usize - 1].entry_id.clone();
            Redirect::Entry {
                api: format!("/api/signs/{entry_id}"),
                entry_id,
            }
        }
        None => Redirect::Search {
            api: "/api/search".into(),
        },
    };
    Ok(Json(ConfirmResponse {
        token: session.token,
        state: session.state,
        confirmed_rank: session.confirmed_rank,
        confirmed_variant: session.confirmed_variant,
        redirect,
    }))
}

async fn session(State(state): State<Arc<AppState>>, Path(token): Path<String>) -> Result<Json<LookupSession>, ApiError> {
    state
        .ledger()
        .sessions
        .get(&token)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found("unknown session token"))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<ConfirmationStats> {
    Json(state.stats())
}

async fn sign(State(state): State<Arc<AppState>>, Path(entry_id): Path<String>) -> Response {
    match state.snapshot().bank.entry_view(&entry_id) {
        Ok(view) => Json(view).into_response(),
        Err(e) => ApiError::from(e).into_response(),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    pub gloss: Option<String>,
    pub word: Option<String>,
    pub start_hs: Option<String>,
    pub end_hs: Option<String>,
}

impl SearchParams {
    /// Blank parameters count as absent.
    pub fn to_query(&self) -> SearchQuery {
        let keep = |v: &Option<String>| v.as_ref().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
        SearchQuery {
            gloss_substring: keep(&self.gloss),
            english_word: keep(&self.word),
            start_handshape: keep(&self.start_hs),
            end_handshape: keep(&self.end_hs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub variant_id: String,
    pub label: String,
    pub entry_id: String,
    pub base_gloss: String,
    pub start_handshape_dom: String,
    pub end_handshape_dom: String,
    pub related_english_words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: SearchQuery,
    pub variants: Vec<SearchHit>,
}

async fn search(
    State(state): State<Arc<AppState>>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> Result<Json<SearchResponse>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::bad_request("bad_query", e.body_text()))?;
    Ok(Json(search_bank(&state.snapshot().bank, params.to_query())?))
}

pub fn search_bank(bank: &Bank, query: SearchQuery) -> Result<SearchResponse, SignBankError> {
    let variants = bank
        .search(&query)?
        .into_iter()
        .map(|v| SearchHit {
            variant_id: v.variant_id.clone(),
            label: v.label.clone(),
            entry_id: v.entry_id.clone(),
            base_gloss: bank.entry(&v.entry_id).map(|e| e.base_gloss.clone()).unwrap_or_default(),
            start_handshape_dom: v.start_handshape_dom.clone(),
            end_handshape_dom: v.end_handshape_dom.clone(),
            related_english_words: v.related_english_words.clone(),
        })
        .collect();
    Ok(SearchResponse { query, variants })
}

async fn handshapes(State(state): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(state.snapshot().bank.handshapes().labels().to_vec())
}
