use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::{json, Value};

use motioncomic_core::analysis::AnalysisError;
use motioncomic_core::design_space::DesignSpaceError;
use motioncomic_core::document::DocumentError;
use motioncomic_core::render::RenderError;

/// Every non-2xx body: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

pub type ApiResult<T> = Result<T, ApiError>;

/// The HTTP status a typed error code maps to.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownProject" | "UnknownScene" | "UnknownEntity" | "UnknownVariant" | "UnknownAsset" | "UnknownElement"
        | "UnknownAction" | "UnknownClip" | "UnknownTemplate" | "UnknownRoute" | "UnknownRevision" | "UnknownFrame" => {
            StatusCode::NOT_FOUND
        }
        "DuplicateEntity" | "DuplicateVariant" | "EmptyVariant" | "LastSlot" | "ElementInUse" | "UnclassifiedAction"
        | "TemplateMismatch" | "UnsavedLayout" | "NothingToExport" => StatusCode::CONFLICT,
        "PayloadTooLarge" => StatusCode::PAYLOAD_TOO_LARGE,
        "UnsupportedMedia" => StatusCode::UNSUPPORTED_MEDIA_TYPE,
        "MethodNotAllowed" => StatusCode::METHOD_NOT_ALLOWED,
        "AnalyzerUnavailable" => StatusCode::BAD_GATEWAY,
        "EmptyStory" | "NotText" | "InvalidBody" | "InvalidPath" | "InvalidQuery" | "EmptyUpload" => {
            StatusCode::BAD_REQUEST
        }
        "Io" | "IoError" | "CorruptDocument" | "SchemaMismatch" | "Internal" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status_for(code),
            code: code.into(),
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn unknown_project(id: &str) -> Self {
        ApiError::new("UnknownProject", format!("no project `{id}`"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new("Internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

fn analysis_detail(e: &AnalysisError) -> Value {
    match e {
        AnalysisError::InvalidSpans(v) => json!({ "violations": v }),
        AnalysisError::MalformedResponse { kind, reason } => json!({ "step": kind.as_str(), "reason": reason }),
        AnalysisError::MissingField { kind, path } => json!({ "step": kind.as_str(), "field": path }),
        AnalysisError::MissingFixture { kind, sha256 } => json!({ "step": kind.as_str(), "sha256": sha256 }),
        _ => Value::Null,
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        let detail = match &e {
            DocumentError::Analysis(a) => json!({ "pipeline": a.code(), "info": analysis_detail(a) }),
            DocumentError::TemplateMismatch {
                template,
                template_category,
                action_category,
            } => json!({
                "template": template,
                "template_category": template_category,
                "action_category": action_category,
            }),
            DocumentError::Invalid(problems) => json!({ "problems": problems }),
            _ => Value::Null,
        };
        ApiError::new(e.code(), e.to_string()).with_detail(detail)
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        DocumentError::Analysis(e).into()
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Document(d) => d.into(),
            e => ApiError::new(e.code(), e.to_string()),
        }
    }
}

impl From<DesignSpaceError> for ApiError {
    fn from(e: DesignSpaceError) -> Self {
        let code = match e {
            DesignSpaceError::UnclassifiedAction(_) => "UnclassifiedAction",
            DesignSpaceError::UnknownTemplate(_) => "UnknownTemplate",
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        ApiError::internal(format!("worker failed: {e}"))
    }
}
