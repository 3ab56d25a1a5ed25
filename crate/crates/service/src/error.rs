use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use signlookup_core::intake::{IntakeError, ValidationReport};
use signlookup_core::matcher::RecognitionError;
use signlookup_core::signbank::SignBankError;

/// JSON error body: `{"code": "...", "message": "...", "report": {...}?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                report: None,
            },
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn validation(report: ValidationReport) -> Self {
        let message = report.violations.iter().map(|v| v.message()).collect::<Vec<_>>().join("; ");
        Self {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                code: "validation".into(),
                message,
                report: Some(report),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<IntakeError> for ApiError {
    fn from(e: IntakeError) -> Self {
        let (status, code) = match &e {
            IntakeError::Parse(_) => (StatusCode::UNPROCESSABLE_ENTITY, "parse"),
            IntakeError::Extractor(_) => (StatusCode::UNPROCESSABLE_ENTITY, "extraction"),
            IntakeError::ExtractorUnavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "extractor_unavailable"),
            IntakeError::TooLarge { .. } => (StatusCode::PAYLOAD_TOO_LARGE, "too_large"),
            IntakeError::Io(_) | IntakeError::Purge { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<RecognitionError> for ApiError {
    fn from(e: RecognitionError) -> Self {
        match &e {
            _ if e.is_empty_gallery() => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_gallery", e.to_string()),
            RecognitionError::Match(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "recognition", e.to_string()),
            RecognitionError::Contract(_) | RecognitionError::Backend(_) => Self::internal(e.to_string()),
        }
    }
}

impl From<SignBankError> for ApiError {
    fn from(e: SignBankError) -> Self {
        match &e {
            SignBankError::EmptyQuery => Self::bad_request("empty_query", e.to_string()),
            SignBankError::NotFound { .. } => Self::not_found(e.to_string()),
        }
    }
}
