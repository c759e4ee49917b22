//! Local HTTP service backing the diagram editor.
//!
//! Every endpoint takes a JSON body with a `project` field plus the same
//! options as the command line, and answers with the same bytes the CLI
//! would print.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;
use tower_http::timeout::TimeoutLayer;
use ttc_core::io::{TensorDoc, TensorSet};
use ttc_core::validate_project;
use ttc_core::Dialect;

use crate::pipeline::{self, Failure};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Largest multiplication count `/api/contract` will execute.
    pub budget: u128,
    /// Directory with the editor's static files, served at `/`.
    pub static_dir: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            budget: 100_000_000,
            static_dir: None,
            timeout: Duration::from_secs(65),
        }
    }
}

pub const DEFAULT_FUNCTION_NAME: &str = "tensor_network";

#[derive(Debug, Deserialize)]
struct ApiRequest {
    project: Value,
    mode: Option<String>,
    seed: Option<u64>,
    dims: Option<BTreeMap<String, u64>>,
    env_search: Option<String>,
    lang: Option<String>,
    function_name: Option<String>,
    network: Option<u8>,
    env: Option<usize>,
    tensors: Option<TensorSet>,
}

impl ApiRequest {
    fn parse(body: &[u8]) -> Result<Self, Failure> {
        serde_json::from_slice(body).map_err(|e| {
            let path = if e.is_syntax() || e.is_eof() {
                format!("body (line {}, column {})", e.line(), e.column())
            } else {
                "body".to_string()
            };
            Failure::parse(&path, e.to_string())
        })
    }

    fn options(&self) -> Result<ttc_core::AnalysisOptions, Failure> {
        pipeline::options(
            self.mode.as_deref(),
            self.seed,
            self.dims.clone(),
            self.env_search.as_deref(),
        )
    }
}

fn failure_response(f: &Failure) -> Response {
    let status = StatusCode::from_u16(f.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, axum::Json(f.to_json())).into_response()
}

fn json_response(v: Value) -> Response {
    (StatusCode::OK, axum::Json(v)).into_response()
}

/// Runs `work` on the blocking pool and turns failures into responses.
async fn blocking<F>(work: F) -> Response
where
    F: FnOnce() -> Result<Response, Failure> + Send + 'static,
{
    match tokio::task::spawn_blocking(work).await {
        Ok(Ok(r)) => r,
        Ok(Err(f)) => failure_response(&f),
        Err(e) => failure_response(&Failure::Internal(format!("worker failed: {e}"))),
    }
}

async fn validate(body: Bytes) -> Response {
    blocking(move || {
        let req = ApiRequest::parse(&body)?;
        let project = pipeline::load_value(req.project, "project")?;
        let report = validate_project(&project);
        let v = serde_json::to_value(&report).map_err(|e| Failure::Internal(e.to_string()))?;
        Ok(json_response(v))
    })
    .await
}

async fn analyze(body: Bytes) -> Response {
    blocking(move || {
        let req = ApiRequest::parse(&body)?;
        let opts = req.options()?;
        let project = pipeline::load_value(req.project, "project")?;
        let analysis = pipeline::analyze(&project, &opts)?;
        if !analysis.validation.is_valid() {
            return Err(Failure::Invalid(Box::new(analysis.validation)));
        }
        let v = serde_json::to_value(analysis.to_document()).map_err(|e| Failure::Internal(e.to_string()))?;
        Ok(json_response(v))
    })
    .await
}

async fn export(body: Bytes) -> Response {
    blocking(move || {
        let req = ApiRequest::parse(&body)?;
        let opts = req.options()?;
        let dialect: Dialect = req
            .lang
            .as_deref()
            .unwrap_or("python")
            .parse()
            .map_err(|e: String| Failure::parse("lang", e))?;
        let name = req
            .function_name
            .as_deref()
            .unwrap_or(DEFAULT_FUNCTION_NAME)
            .to_string();
        let project = pipeline::load_value(req.project, "project")?;
        let text = pipeline::export(&project, &opts, dialect, &name)?;
        Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
    })
    .await
}

async fn contract(budget: u128, body: Bytes) -> Response {
    blocking(move || {
        let req = ApiRequest::parse(&body)?;
        let opts = req.options()?;
        let net = req.network.unwrap_or(1);
        let env = req.env.unwrap_or(0);
        let tensors = req
            .tensors
            .ok_or_else(|| Failure::parse("tensors", "missing field `tensors`"))?;
        let project = pipeline::load_value(req.project, "project")?;
        let out = pipeline::contract(&project, &opts, net, env, &tensors, Some(budget))?;
        let v = serde_json::to_value(TensorDoc::from_tensor(&out)).map_err(|e| Failure::Internal(e.to_string()))?;
        Ok(json_response(v))
    })
    .await
}

async fn health() -> Response {
    json_response(json!({"status": "ok", "version": ttc_core::VERSION}))
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>ttc</title>\n<p>ttc service is running. \
Start it with <code>--static-dir</code> to serve the editor.</p>\n";

pub fn router(config: ServiceConfig) -> Router {
    let budget = config.budget;
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/validate", post(validate))
        .route("/api/analyze", post(analyze))
        .route("/api/export", post(export))
        .route("/api/contract", post(move |body: Bytes| contract(budget, body)));
    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    };
    app.layer(TimeoutLayer::with_status_code(
        StatusCode::REQUEST_TIMEOUT,
        config.timeout,
    ))
}
