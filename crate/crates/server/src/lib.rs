//! HTTP API over one compiled network.
//!
//! | method | path               | body / query                          |
//! |--------|--------------------|---------------------------------------|
//! | GET    | `/api/network`     |                                       |
//! | POST   | `/api/infer`       | `{"evidence": {node: number\|label}}` |
//! | POST   | `/api/mpe`         | `{"evidence": ..., "restrictTo": [..]}` |
//! | GET    | `/api/sensitivity` | `?target=ID[&state=LABEL][&candidates=A,B]` |
//! | GET    | `/`                | static assets                         |
//!
//! Evidence uses the scenario file format. Malformed bodies get 400, unknown
//! nodes 404 and evidence of probability zero 409. The network never changes
//! after startup, so handlers share it without locks.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use qualinet::analysis::{
    restricted_mpe, resolve_evidence, run_scenario, sensitivity, AnalysisError, MomentTable,
    Observation, Scenario, SwingStatistic,
};
use qualinet::inference::{InferenceError, Posterior};
use qualinet::{json, Network};

const INDEX: &str = "<!doctype html>\n<title>qualinet</title>\n<p>Endpoints: \
GET /api/network, POST /api/infer, POST /api/mpe, GET /api/sensitivity?target=ID</p>\n";

#[derive(Clone)]
struct AppState {
    net: Arc<Network>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InferRequest {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    evidence: BTreeMap<String, Observation>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct MpeRequest {
    #[serde(default)]
    evidence: BTreeMap<String, Observation>,
    #[serde(default)]
    restrict_to: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
struct SensitivityQuery {
    target: String,
    state: Option<String>,
    candidates: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct InferResponse<'a> {
    evidence_probability: f64,
    posteriors: &'a Posterior<f64>,
    moments: &'a MomentTable<f64>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    warnings: &'a [String],
}

/// Error body: `{"error": message, "node"?: id}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    node: Option<String>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            node: None,
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let node = e.unknown_node().map(str::to_owned);
        let status = if node.is_some() {
            StatusCode::NOT_FOUND
        } else if e == AnalysisError::Inference(InferenceError::ImpossibleEvidence) {
            StatusCode::CONFLICT
        } else {
            StatusCode::BAD_REQUEST
        };
        ApiError {
            status,
            message: e.to_string(),
            node,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body {
            error: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            node: Option<String>,
        }
        let body = json::to_string(&Body {
            error: self.message,
            node: self.node,
        });
        (self.status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))
}

async fn network(State(state): State<AppState>) -> Response {
    json_response(state.net.to_json())
}

/// Body of a successful `/api/infer` call for `evidence`; shared with the
/// CLI parity tests.
pub fn infer_json(
    net: &Network,
    evidence: &BTreeMap<String, Observation>,
) -> Result<String, AnalysisError> {
    let scenario = Scenario {
        name: String::new(),
        evidence: evidence.clone(),
    };
    let report = run_scenario(net, &scenario)?;
    Ok(json::to_string(&InferResponse {
        evidence_probability: report.evidence_probability,
        posteriors: &report.posteriors,
        moments: &report.moments,
        warnings: &report.warnings,
    }))
}

async fn infer(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: InferRequest = parse_body(&body)?;
    log::debug!("infer {:?} with {} observations", request.name, request.evidence.len());
    Ok(json_response(infer_json(&state.net, &request.evidence)?))
}

async fn most_probable(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: MpeRequest = parse_body(&body)?;
    let (evidence, _) = resolve_evidence(&state.net, &request.evidence)?;
    let explanation = restricted_mpe(&state.net, &evidence, request.restrict_to.as_deref())?;
    Ok(json_response(json::to_string(&explanation)))
}

async fn swings(
    State(state): State<AppState>,
    Query(query): Query<SensitivityQuery>,
) -> Result<Response, ApiError> {
    let net = &state.net;
    let target = net
        .get(&query.target)
        .ok_or_else(|| AnalysisError::UnknownNode(query.target.clone()))?;
    let statistic = match &query.state {
        None => None,
        Some(label) => Some(SwingStatistic::Probability(target.state_index(label).ok_or_else(
            || AnalysisError::UnknownState {
                node: query.target.clone(),
                state: label.clone(),
            },
        )?)),
    };
    let candidates: Vec<String> = match &query.candidates {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect(),
        None => net
            .fact_indicators()
            .into_iter()
            .map(|i| net.node(i).id.clone())
            .filter(|id| *id != query.target)
            .collect(),
    };
    let result = sensitivity(net, &query.target, statistic, &candidates, &Default::default())?;
    Ok(json_response(json::to_string(&result)))
}

/// Routes for `net`; static files come from `static_dir` when given.
pub fn router(net: Network, static_dir: Option<PathBuf>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let api = Router::new()
        .route("/api/network", get(network))
        .route("/api/infer", post(infer))
        .route("/api/mpe", post(most_probable))
        .route("/api/sensitivity", get(swings))
        .with_state(AppState { net: Arc::new(net) });
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX) })),
    };
    app.layer(cors)
        .layer(tower_http::set_header::SetResponseHeaderLayer::if_not_present(
            header::CACHE_CONTROL,
            HeaderValue::from_static("no-store"),
        ))
}

/// Serves until the process is stopped.
pub async fn serve(
    net: Network,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(net, static_dir)).await
}
