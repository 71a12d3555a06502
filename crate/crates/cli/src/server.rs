//! JSON API. Every request carries its full input; presets and calibration
//! tables are compiled in, so handlers share no mutable state.

use std::net::SocketAddr;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::Path;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use roofkit::presets::{self, PresetKind};
use roofkit::scenario::{self, AnalyzeRequest, HardwareSpec, ReverseRequest, SizeRequest, TimelineRequest};
use roofkit::{CalibrationProfile, Error};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::EnvironmentError;

pub fn router() -> Router {
    Router::new()
        .route("/api/presets", get(preset_index))
        .route("/api/presets/{name}", get(preset))
        .route("/api/analyze", post(analyze))
        .route("/api/size", post(size))
        .route("/api/timeline", post(timeline))
        .route("/api/reverse", post(reverse))
        .layer(CorsLayer::permissive())
}

pub fn serve(host: &str, port: u16) -> anyhow::Result<()> {
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad listen address `{host}:{port}`"))?;
    let rt = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| EnvironmentError(format!("cannot listen on {addr}: {e}")))?;
        eprintln!("roofkit API listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router())
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| anyhow::Error::new(EnvironmentError(format!("server failed: {e}"))))
    })
}

/// Error body: `{"error": kind, "message": text}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, kind) = match &e {
            Error::Parse { .. } => (StatusCode::BAD_REQUEST, "parse"),
            Error::Validation { .. } => (StatusCode::BAD_REQUEST, "validation"),
            Error::Degenerate(_) => (StatusCode::BAD_REQUEST, "degenerate"),
            Error::UnknownPreset(_) => (StatusCode::BAD_REQUEST, "unknown-preset"),
            Error::Infeasible(_) => (StatusCode::UNPROCESSABLE_ENTITY, "infeasible"),
        };
        ApiError { status, kind, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.kind, "message": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." { String::new() } else { format!(" at `{path}`") };
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "parse",
            message: format!("request body{at}: {inner}"),
        }
    })
}

/// The API accepts shipped calibration presets only, never file paths.
fn no_files(name: &str) -> roofkit::Result<CalibrationProfile> {
    Err(Error::Validation {
        what: "calibration".into(),
        reason: format!("`{name}` is not a calibration preset (the API does not read files)"),
    })
}

async fn preset_index() -> Json<presets::PresetIndex> {
    Json(presets::index())
}

#[derive(Serialize)]
struct PresetBody {
    name: String,
    kind: PresetKind,
    content: Value,
}

async fn preset(Path(name): Path<String>) -> ApiResult<PresetBody> {
    let Some((kind, text)) = presets::raw(&name) else {
        let mut e = ApiError::from(Error::UnknownPreset(name));
        e.status = StatusCode::NOT_FOUND;
        return Err(e);
    };
    let content = match kind {
        PresetKind::Hardware => serde_json::to_value(HardwareSpec::from_toml(text)?),
        PresetKind::Network => serde_json::to_value(presets::network(&name)?),
        PresetKind::Calibration => serde_json::from_str(text),
    }
    .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, kind: "internal", message: e.to_string() })?;
    Ok(Json(PresetBody { name: name.clone(), kind, content }))
}

async fn analyze(body: Bytes) -> ApiResult<roofkit::RooflineReport> {
    let req: AnalyzeRequest = parse_body(&body)?;
    Ok(Json(scenario::analyze(&req, &no_files)?))
}

async fn size(body: Bytes) -> ApiResult<roofkit::SizingResult> {
    let req: SizeRequest = parse_body(&body)?;
    Ok(Json(scenario::size(&req, &no_files)?))
}

async fn timeline(body: Bytes) -> ApiResult<roofkit::TimelineTrace> {
    let req: TimelineRequest = parse_body(&body)?;
    Ok(Json(scenario::timeline(&req)?))
}

async fn reverse(body: Bytes) -> ApiResult<roofkit::roofline::ReverseDesign> {
    let req: ReverseRequest = parse_body(&body)?;
    Ok(Json(scenario::reverse(&req, &no_files)?))
}
