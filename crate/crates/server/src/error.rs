use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use texelatt_core::descriptor::COMPONENT_LABELS;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown image `{0}`")]
    UnknownImage(String),
    #[error("session `{0}` is busy with another feedback request")]
    Busy(String),
    #[error("session `{0}` expired")]
    Expired(String),
    #[error("session `{0}` has used all {1} iterations")]
    Exhausted(String, u32),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Internal(#[from] texelatt_core::Error),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession(_) | ApiError::UnknownImage(_) => StatusCode::NOT_FOUND,
            ApiError::Busy(_) => StatusCode::CONFLICT,
            ApiError::Expired(_) | ApiError::Exhausted(..) => StatusCode::GONE,
            ApiError::UnknownAttribute(_) | ApiError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!("{self}");
        }
        let body = match &self {
            ApiError::UnknownAttribute(_) => json!({ "error": self.to_string(), "attributes": COMPONENT_LABELS.as_slice() }),
            _ => json!({ "error": self.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}
