//! JSON HTTP API.
//!
//! Every response is an envelope: `{"ok": true, "result": ...}` on success,
//! `{"ok": false, "error": {"code", "message", "field"}}` otherwise.

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, Query};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fivenum_skew::meta::{vitamin_d, FlowOptions, StudyRecord};
use fivenum_skew::{CriticalValueSource, Error, Scenario, Seed, SummaryRecord};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::service::{self, error_field, probability};

/// Largest Monte Carlo replication count a request may ask for.
pub const MAX_REPS: u64 = 1_000_000;

#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

pub struct Failure {
    status: StatusCode,
    error: ApiError,
}

impl Failure {
    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Failure {
            status: StatusCode::BAD_REQUEST,
            error: ApiError { code: code.into(), message: message.into(), field: None },
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Failure {
            status,
            error: ApiError {
                code: e.code().into(),
                message: e.to_string(),
                field: error_field(&e).map(str::to_string),
            },
        }
    }
}

impl From<JsonRejection> for Failure {
    fn from(r: JsonRejection) -> Self {
        Failure::bad_request("malformed_body", r.body_text())
    }
}

impl From<QueryRejection> for Failure {
    fn from(r: QueryRejection) -> Self {
        Failure::bad_request("malformed_query", r.body_text())
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let body = Envelope::<()> { ok: false, result: None, error: Some(self.error) };
        (self.status, Json(body)).into_response()
    }
}

/// JSON body extractor whose rejections use the error envelope.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(Failure))]
pub struct Body<T>(T);

type Reply<T> = Result<Json<Envelope<T>>, Failure>;

fn ok<T>(result: T) -> Reply<T> {
    Ok(Json(Envelope { ok: true, result: Some(result), error: None }))
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, Failure>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, Error> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(Failure::from),
        Err(e) => Err(Failure {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            error: ApiError { code: "internal".into(), message: e.to_string(), field: None },
        }),
    }
}

/// A source given either by name (`"approx"`) or as a tagged object
/// (`{"kind": "monte-carlo", "reps": 100000, "seed": 7}`).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Name(String),
    Full(CriticalValueSource),
}

fn resolve_source(
    spec: Option<SourceSpec>,
    reps: Option<u64>,
    seed: Option<u64>,
    default: CriticalValueSource,
) -> Result<CriticalValueSource, Failure> {
    let source = match spec {
        None => default,
        Some(SourceSpec::Full(s)) => s,
        Some(SourceSpec::Name(name)) => match name.parse()? {
            CriticalValueSource::MonteCarlo { .. } => {
                let seed = seed.ok_or_else(|| {
                    let mut f = Failure::bad_request("invalid_argument", "Monte Carlo source needs an explicit seed");
                    f.error.field = Some("seed".into());
                    f
                })?;
                CriticalValueSource::MonteCarlo { reps: reps.unwrap_or(100_000), seed: Seed(seed) }
            }
            other => other,
        },
    };
    if let CriticalValueSource::MonteCarlo { reps, .. } = source {
        if reps > MAX_REPS {
            let mut f = Failure::bad_request("invalid_argument", format!("reps may not exceed {MAX_REPS}"));
            f.error.field = Some("reps".into());
            return Err(f);
        }
    }
    Ok(source)
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Deserialize)]
pub struct TestRequest {
    #[serde(flatten)]
    pub summary: SummaryRecord,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub reps: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

async fn test(Body(req): Body<TestRequest>) -> Reply<service::TestReport> {
    let source = resolve_source(req.source, req.reps, req.seed, CriticalValueSource::ApproxFormula)?;
    ok(blocking(move || service::test(&req.summary, req.alpha, source)).await?)
}

async fn estimate(Body(summary): Body<SummaryRecord>) -> Reply<fivenum_skew::MomentEstimate> {
    ok(service::estimate(&summary)?)
}

#[derive(Debug, Deserialize)]
pub struct MetaRequest {
    pub studies: Vec<StudyRecord>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub reps: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub force_include: bool,
}

async fn meta(Body(req): Body<MetaRequest>) -> Reply<service::MetaReport> {
    let opts = FlowOptions {
        alpha: probability(req.alpha)?,
        source: resolve_source(req.source, req.reps, req.seed, CriticalValueSource::ApproxFormula)?,
        force_include: req.force_include,
    };
    ok(blocking(move || service::meta(&req.studies, &opts)).await?)
}

#[derive(Debug, Deserialize)]
pub struct CriticalQuery {
    pub scenario: Scenario,
    pub n: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub source: Option<String>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
}

async fn critical_value(
    query: Result<Query<CriticalQuery>, QueryRejection>,
) -> Reply<service::CriticalReport> {
    let Query(q) = query?;
    let source = match q.source {
        None => None,
        Some(name) => Some(resolve_source(
            Some(SourceSpec::Name(name)),
            q.reps,
            q.seed,
            CriticalValueSource::ExactTable,
        )?),
    };
    ok(blocking(move || service::critical(q.scenario, q.n, q.alpha, source)).await?)
}

async fn dataset() -> Reply<Vec<StudyRecord>> {
    ok(vitamin_d())
}

async fn healthz() -> &'static str {
    "ok"
}

async fn not_found() -> Failure {
    Failure {
        status: StatusCode::NOT_FOUND,
        error: ApiError { code: "not_found".into(), message: "no such route".into(), field: None },
    }
}

/// The API router. `cors_origin` restricts cross-origin access to one origin.
pub fn router(cors_origin: Option<&str>) -> Result<Router, Error> {
    let origin = match cors_origin {
        Some(o) => AllowOrigin::exact(
            HeaderValue::from_str(o).map_err(|e| Error::InvalidArgument(format!("bad CORS origin {o:?}: {e}")))?,
        ),
        None => AllowOrigin::from(Any),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any);
    Ok(Router::new()
        .route("/api/test", post(test))
        .route("/api/estimate", post(estimate))
        .route("/api/meta", post(meta))
        .route("/api/critical-value", get(critical_value))
        .route("/api/dataset/vitamind", get(dataset))
        .route("/healthz", get(healthz))
        .fallback(not_found)
        .layer(cors))
}

/// Serves until interrupted.
pub async fn serve(bind: &str, port: u16, cors_origin: Option<&str>) -> Result<(), Error> {
    let app = router(cors_origin)?;
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
