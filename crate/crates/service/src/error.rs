use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use tenun_core::Error;

use crate::store::StoreError;

/// JSON error body: `{"error": {"code", "message", ...}}`.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required_shafts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_revision: Option<u64>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                path: None,
                required_shafts: None,
                current_revision: None,
            },
        }
    }

    pub fn bad_request(path: &str, message: impl Into<String>) -> Self {
        let mut err = Self::new(StatusCode::BAD_REQUEST, "schema", message);
        err.body.path = Some(path.to_string());
        err
    }

    pub fn too_large(message: impl Into<String>) -> Self {
        Self::new(StatusCode::PAYLOAD_TOO_LARGE, "too_large", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Capacity { .. } => StatusCode::CONFLICT,
            Error::RepairDiverged(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut err = Self::new(status, e.code(), e.to_string());
        match e {
            Error::Schema { path, .. } => err.body.path = Some(path),
            Error::Capacity { required, .. } => err.body.required_shafts = Some(required),
            _ => {}
        }
        err
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, "not_found", e.to_string()),
            StoreError::Stale { current, .. } => {
                let mut err = Self::new(StatusCode::CONFLICT, "stale_revision", e.to_string());
                err.body.current_revision = Some(current);
                err
            }
            StoreError::Core(inner) => inner.into(),
            StoreError::Snapshot { .. } => {
                tracing::error!("{e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "snapshot", e.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}
