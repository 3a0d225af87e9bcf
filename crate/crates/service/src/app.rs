//! HTTP layer. All requests run under one lock: each first closes any study
//! days that have ended, then reads or appends events. An event is applied
//! to memory, appended and synced before the response is sent.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{Duration, NaiveDateTime};
use coach_core::{
    validate_intention, Catalog, Clock, JudgmentMeasurement, RawIntention, ReportStatus, StudyCondition,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::ServiceConfig;
use crate::error::{ApiError, ServiceError};
use crate::events::{Event, EventLog, EventRecord};
use crate::state::{assign_condition, replay, StudyState};

pub const TEST_CLOCK_HEADER: &str = "x-test-clock";
pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

#[derive(Debug, Clone)]
pub enum Reply {
    Json(StatusCode, Value),
    Csv(String),
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        match self {
            Reply::Json(status, v) => (status, Json(v)).into_response(),
            Reply::Csv(body) => ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response(),
        }
    }
}

type Outcome = Result<Reply, ApiError>;

struct Inner {
    state: StudyState,
    log: EventLog,
    idempotent: HashMap<String, Outcome>,
    /// Set when an append failed; memory may then be ahead of disk.
    poisoned: bool,
}

pub struct App {
    config: ServiceConfig,
    catalog: Catalog,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

/// One request's view of the state.
pub struct Txn<'a> {
    pub now: NaiveDateTime,
    catalog: &'a Catalog,
    inner: &'a mut Inner,
}

impl Txn<'_> {
    pub fn state(&self) -> &StudyState {
        &self.inner.state
    }

    fn commit(&mut self, trainee_id: &str, event: Event) -> Result<(), ApiError> {
        if self.inner.poisoned {
            return Err(ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "storage_unavailable", "event log write failed earlier; restart required"));
        }
        let rec = EventRecord { seq: self.inner.state.last_seq() + 1, ts: self.now, trainee_id: trainee_id.to_string(), event };
        self.inner.state.apply(self.catalog, &rec)?;
        if let Err(e) = self.inner.log.append(&rec) {
            tracing::error!(error = %e, "event log append failed");
            self.inner.poisoned = true;
            return Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failure", e.to_string()));
        }
        Ok(())
    }

    fn sweep(&mut self) -> Result<(), ApiError> {
        for (id, day) in self.inner.state.due_closures(self.now) {
            let at = self.now;
            self.commit(&id, Event::DayClosed { day, at })?;
        }
        Ok(())
    }
}

impl App {
    /// Loads the catalog, replays the event log and refuses to start on a
    /// corrupt log.
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Arc<Self>, ServiceError> {
        let catalog = config.catalog()?;
        std::fs::create_dir_all(&config.data_dir)?;
        let (log, records) = EventLog::open(&config.log_path())?;
        let state = replay(&catalog, &records)?;
        tracing::info!(events = records.len(), trainees = state.trainees().count(), "state restored");
        Ok(Arc::new(Self {
            config,
            catalog,
            clock,
            inner: Mutex::new(Inner { state, log, idempotent: HashMap::new(), poisoned: false }),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Copy of the current state, for inspection.
    pub fn snapshot(&self) -> StudyState {
        self.inner.lock().expect("state lock poisoned").state.clone()
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new()
            .route("/healthz", get(healthz))
            .route("/goals", get(goals))
            .route("/trainees", post(enroll))
            .route("/trainees/{id}/behaviors", get(behaviors))
            .route("/trainees/{id}/behavior", post(select_behavior))
            .route("/trainees/{id}/intention", post(set_intention))
            .route("/trainees/{id}/reminders/pending", get(pending))
            .route("/reminders/{id}/ack", post(ack))
            .route("/trainees/{id}/reports", post(report))
            .route("/trainees/{id}/ledger", get(ledger))
            .route("/export/dataset.csv", get(export))
            .layer(middleware::from_fn_with_state(Arc::clone(self), guard))
            .with_state(Arc::clone(self))
    }

    fn now(&self, headers: &HeaderMap) -> Result<NaiveDateTime, ApiError> {
        match headers.get(TEST_CLOCK_HEADER) {
            Some(v) if self.config.test_mode => v
                .to_str()
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| ApiError::bad_request("bad_test_clock", "X-Test-Clock must be YYYY-MM-DDTHH:MM:SS")),
            _ => Ok(self.clock.now()),
        }
    }

    /// Runs `f` under the lock after the day-close sweep. Requests carrying
    /// an idempotency key replay the first outcome for that key and route.
    fn run(&self, headers: &HeaderMap, route: Option<String>, f: impl FnOnce(&mut Txn) -> Outcome) -> Response {
        let now = match self.now(headers) {
            Ok(t) => t,
            Err(e) => return e.into_response(),
        };
        let mut guard = self.inner.lock().expect("state lock poisoned");
        let key = route.zip(headers.get(IDEMPOTENCY_HEADER).and_then(|v| v.to_str().ok())).map(|(r, k)| format!("{k} {r}"));
        if let Some(hit) = key.as_ref().and_then(|k| guard.idempotent.get(k)) {
            return respond(hit.clone());
        }
        let mut txn = Txn { now, catalog: &self.catalog, inner: &mut guard };
        let outcome = txn.sweep().and_then(|()| f(&mut txn));
        if let Some(k) = key {
            if !matches!(&outcome, Err(e) if e.status.is_server_error()) {
                guard.idempotent.insert(k, outcome.clone());
            }
        }
        respond(outcome)
    }
}

fn respond(outcome: Outcome) -> Response {
    match outcome {
        Ok(r) => r.into_response(),
        Err(e) => e.into_response(),
    }
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_body", e.to_string()))
}

fn ok(status: StatusCode, v: impl serde::Serialize) -> Outcome {
    Ok(Reply::Json(status, serde_json::to_value(v).expect("responses serialize")))
}

async fn guard(State(app): State<Arc<App>>, req: Request, next: Next) -> Response {
    let (method, path) = (req.method().clone(), req.uri().path().to_string());
    if let Some(token) = &app.config.api_token {
        let expected = format!("Bearer {token}");
        let given = req.headers().get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
        if path != "/healthz" && given != Some(expected.as_str()) {
            tracing::info!(%method, %path, status = 401, "request");
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token").into_response();
        }
    }
    let resp = next.run(req).await;
    tracing::info!(%method, %path, status = resp.status().as_u16(), "request");
    resp
}

async fn healthz(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    app.run(&headers, None, |tx| ok(StatusCode::OK, json!({ "status": "ok", "events": tx.state().last_seq(), "state_hash": tx.state().hash() })))
}

async fn goals(State(app): State<Arc<App>>) -> Response {
    Reply::Json(StatusCode::OK, serde_json::to_value(app.catalog.goals()).expect("goals serialize")).into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnrollBody {
    goal_id: String,
    /// Fixed condition; accepted in test mode only.
    condition: Option<StudyCondition>,
}

async fn enroll(State(app): State<Arc<App>>, headers: HeaderMap, body: Bytes) -> Response {
    app.run(&headers, Some("POST /trainees".into()), |tx| {
        let b: EnrollBody = parse(&body)?;
        if b.condition.is_some() && !app.config.test_mode {
            return Err(ApiError::bad_request("condition_forbidden", "conditions are assigned by the server"));
        }
        let id = tx.state().next_trainee_id();
        let index = tx.state().trainees().count();
        let condition = b.condition.unwrap_or_else(|| assign_condition(app.config.assignment_seed, index));
        tx.commit(&id, Event::Enrolled { goal_id: b.goal_id.clone(), condition })?;
        ok(StatusCode::CREATED, json!({ "trainee_id": id, "goal_id": b.goal_id, "condition": condition }))
    })
}

async fn behaviors(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    app.run(&headers, None, |tx| {
        let t = tx.state().trainee(&id)?;
        let trio = app
            .catalog
            .candidate_behaviors(&t.goal_id, t.condition.difficulty_arm)
            .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
        ok(StatusCode::OK, trio)
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BehaviorBody {
    behavior_id: String,
    self_efficacy: u8,
}

async fn select_behavior(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    app.run(&headers, Some(format!("POST /trainees/{id}/behavior")), |tx| {
        let b: BehaviorBody = parse(&body)?;
        tx.commit(&id, Event::BehaviorSelected { behavior_id: b.behavior_id.clone(), initial_self_efficacy: b.self_efficacy })?;
        ok(StatusCode::OK, json!({ "trainee_id": id, "behavior_id": b.behavior_id, "initial_self_efficacy": b.self_efficacy }))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntentionBody {
    behavior_id: Option<String>,
    context_slot: String,
    location: String,
    person: String,
    specific_time: String,
    reminder_lead_minutes: i64,
}

async fn set_intention(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    app.run(&headers, Some(format!("POST /trainees/{id}/intention")), |tx| {
        let b: IntentionBody = parse(&body)?;
        let t = tx.state().trainee(&id)?;
        let Some(selected) = t.behavior_id.clone() else {
            return Err(ApiError::conflict("behavior_not_selected", "select a behavior first"));
        };
        let family = app.catalog.goal(&t.goal_id).expect("enrolled goals exist").slot_family;
        let raw = RawIntention {
            behavior_id: b.behavior_id.unwrap_or_else(|| selected.clone()),
            context_slot: b.context_slot,
            location: b.location,
            person: b.person,
            specific_time: b.specific_time,
            reminder_lead_minutes: b.reminder_lead_minutes,
        };
        let intention = validate_intention(&raw, family)?;
        // The study runs from the day after onboarding.
        let study_start = tx.now.date() + Duration::days(1);
        tx.commit(&id, Event::IntentionSet { intention: intention.clone(), study_start })?;
        let reminders = tx.state().reminders().iter().filter(|r| r.trainee_id == id).count();
        ok(StatusCode::CREATED, json!({ "trainee_id": id, "intention": intention, "study_start": study_start, "reminders": reminders }))
    })
}

async fn pending(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    app.run(&headers, None, |tx| ok(StatusCode::OK, tx.state().pending_reminders(&id, tx.now)?))
}

async fn ack(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    app.run(&headers, Some(format!("POST /reminders/{id}/ack")), |tx| {
        let trainee = tx
            .state()
            .reminders()
            .get(&id)
            .map(|r| r.trainee_id.clone())
            .ok_or_else(|| ApiError::not_found("unknown_reminder", format!("no reminder {id:?}")))?;
        let at = tx.now;
        tx.commit(&trainee, Event::ReminderAcked { reminder_id: id.clone(), at })?;
        let state = tx.state().reminders().get(&id).expect("just acknowledged").ack_state;
        ok(StatusCode::OK, json!({ "reminder_id": id, "state": state }))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentBody {
    difficulty: u8,
    self_efficacy: u8,
    affective_attitude: u8,
    instrumental_attitude: u8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportBody {
    day: u8,
    status: ReportStatus,
    judgments: Option<JudgmentBody>,
}

async fn report(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Response {
    app.run(&headers, Some(format!("POST /trainees/{id}/reports")), |tx| {
        let b: ReportBody = parse(&body)?;
        let judgments = b
            .judgments
            .map(|j| JudgmentMeasurement::new(j.difficulty, j.self_efficacy, j.affective_attitude, j.instrumental_attitude))
            .transpose()?;
        let at = tx.now;
        tx.commit(&id, Event::Reported { day: b.day, status: b.status, judgments, at })?;
        let entry = tx.state().trainee(&id)?.ledger.as_ref().and_then(|l| l.entry(b.day)).cloned();
        ok(StatusCode::CREATED, entry)
    })
}

async fn ledger(State(app): State<Arc<App>>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    app.run(&headers, None, |tx| ok(StatusCode::OK, tx.state().ledger_view(&id, tx.now)?))
}

async fn export(State(app): State<Arc<App>>, headers: HeaderMap) -> Response {
    app.run(&headers, None, |tx| Ok(Reply::Csv(tx.state().export().to_csv_string())))
}
