use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use coach_core::{AckError, DomainError, IntentionError, LedgerError};
use serde::Serialize;
use thiserror::Error;

/// Failures that stop the service from starting or persisting.
#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("event log line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorDetail {
    pub code: &'static str,
    pub message: String,
}

/// An error as returned to HTTP clients: `{code, message}` plus, for
/// multi-field validation, the individual violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ErrorDetail>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), errors: Vec::new() }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn unknown_trainee(id: &str) -> Self {
        Self::not_found("unknown_trainee", format!("no trainee {id:?}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        let status = match e {
            LedgerError::BackReport { .. } | LedgerError::FutureReport { .. } | LedgerError::DuplicateReport(_) => {
                StatusCode::CONFLICT
            }
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<AckError> for ApiError {
    fn from(e: AckError) -> Self {
        let status = match e {
            AckError::UnknownReminder(_) => StatusCode::NOT_FOUND,
            AckError::AlreadyAcked | AckError::TooEarly => StatusCode::CONFLICT,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let code = match e {
            DomainError::UnknownVariant { .. } => "unknown_variant",
            DomainError::BadLead(_) => "bad_lead",
            DomainError::BadCondition(_) => "bad_condition",
            DomainError::JudgmentOutOfRange { .. } => "judgment_out_of_range",
            DomainError::DayOutOfRange(_) => "day_out_of_range",
            DomainError::MissingJudgments => "missing_judgments",
            DomainError::UnexpectedJudgments => "unexpected_judgments",
        };
        Self::bad_request(code, e.to_string())
    }
}

impl From<Vec<IntentionError>> for ApiError {
    /// A slot from the wrong family is a semantic mismatch (422); every
    /// other violation is plain validation (400).
    fn from(errs: Vec<IntentionError>) -> Self {
        let slot = errs.iter().any(|e| matches!(e, IntentionError::SlotMismatch { .. }));
        let (status, code) =
            if slot { (StatusCode::UNPROCESSABLE_ENTITY, "slot_mismatch") } else { (StatusCode::BAD_REQUEST, "invalid_intention") };
        let message = errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        let errors = errs.iter().map(|e| ErrorDetail { code: e.code(), message: e.to_string() }).collect();
        Self { status, code, message, errors }
    }
}
