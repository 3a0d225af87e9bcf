#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{NaiveDate, NaiveDateTime};
use coach_core::ManualClock;
use coach_service::{App, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn at(day: u32, hh: u32, mm: u32) -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 5, day).unwrap().and_hms_opt(hh, mm, 0).unwrap()
}

pub fn stamp(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S").to_string()
}

pub fn test_config(dir: &std::path::Path) -> ServiceConfig {
    ServiceConfig { data_dir: dir.to_path_buf(), test_mode: true, ..ServiceConfig::default() }
}

pub fn open(cfg: ServiceConfig) -> Arc<App> {
    App::open(cfg, Arc::new(ManualClock::new(at(1, 0, 0)))).unwrap()
}

pub struct Client {
    pub router: Router,
    pub token: Option<String>,
}

impl Client {
    pub fn new(app: &Arc<App>) -> Self {
        Self { router: app.router(), token: None }
    }

    pub async fn send(&self, method: &str, uri: &str, now: NaiveDateTime, body: Option<Value>, key: Option<&str>) -> (StatusCode, Value, String) {
        let mut req = Request::builder().method(method).uri(uri).header("x-test-clock", stamp(now));
        if let Some(k) = key {
            req = req.header("idempotency-key", k);
        }
        if let Some(t) = &self.token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let body = body.map_or_else(Body::empty, |b| Body::from(b.to_string()));
        let resp = self.router.clone().oneshot(req.body(body).unwrap()).await.unwrap();
        let status = resp.status();
        let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        let v = serde_json::from_str(&text).unwrap_or(Value::Null);
        (status, v, text)
    }

    pub async fn get(&self, uri: &str, now: NaiveDateTime) -> (StatusCode, Value) {
        let (s, v, _) = self.send("GET", uri, now, None, None).await;
        (s, v)
    }

    pub async fn post(&self, uri: &str, now: NaiveDateTime, body: Value) -> (StatusCode, Value) {
        let (s, v, _) = self.send("POST", uri, now, Some(body), None).await;
        (s, v)
    }

    /// Enrolls, selects the first offered behavior and sets an intention
    /// for the evening. Returns the trainee id.
    pub async fn onboard(&self, now: NaiveDateTime, condition: Option<Value>) -> String {
        let mut body = json!({ "goal_id": "walk" });
        if let Some(c) = condition {
            body["condition"] = c;
        }
        let (s, v) = self.post("/trainees", now, body).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        let id = v["trainee_id"].as_str().unwrap().to_string();
        let (_, offered) = self.get(&format!("/trainees/{id}/behaviors"), now).await;
        let behavior = offered[0]["id"].as_str().unwrap().to_string();
        let (s, v) = self.post(&format!("/trainees/{id}/behavior"), now, json!({ "behavior_id": behavior, "self_efficacy": 3 })).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        let (s, v) = self.post(&format!("/trainees/{id}/intention"), now, intention_body()).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        id
    }
}

pub fn intention_body() -> Value {
    json!({
        "context_slot": "evening",
        "location": "the park",
        "person": "my neighbour",
        "specific_time": "19:00",
        "reminder_lead_minutes": 30
    })
}

pub fn reminded_condition() -> Value {
    json!({ "difficulty_arm": "hard", "reminders_on": true, "distribution": "uniform", "reminder_count": 14 })
}

pub fn judgments() -> Value {
    json!({ "difficulty": 2, "self_efficacy": 4, "affective_attitude": 4, "instrumental_attitude": 5 })
}
