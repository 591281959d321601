use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use tenun_core::draft::DEFAULT_SHAFT_CAPACITY;
use tenun_core::io::{
    decode_image, decode_json, document_draft, document_metrics, document_png, export_wif, generate_document,
    raster_document, run_sweep, Colorway, PatternDocument, RuleRecord, SweepParams, SweepReport,
};
use tenun_core::raster::{image_dimensions, ImageFormat, RasterOutcome};
use tenun_core::{EvolutionConfig, RasterConfig, RuleMetrics, RuleSpec, WeavabilityConfig};

use crate::error::ApiError;
use crate::AppState;

type Shared = State<Arc<AppState>>;

/// Evolution size limit for a single request, in cells.
const MAX_CELLS: usize = 1 << 22;
/// Per-rule size limit of a sweep, in cells.
const MAX_SWEEP_CELLS: usize = 1 << 18;
const MAX_RENDER_SIDE: usize = 8192;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepQuery {
    pub width: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub hmax: Option<f64>,
    pub maxfloat: Option<usize>,
}

impl SweepQuery {
    pub fn params(&self) -> SweepParams {
        let defaults = SweepParams::default();
        SweepParams {
            width: self.width.unwrap_or(defaults.width),
            steps: self.steps.unwrap_or(defaults.steps),
            seed: self.seed.unwrap_or(defaults.seed),
            h_max: self.hmax.unwrap_or(defaults.h_max),
            max_float: self.maxfloat.unwrap_or(defaults.max_float),
            ..defaults
        }
    }
}

/// A rule in a request. `k`, `r` and `w` default to the elementary family,
/// where `id` is the decimal rule number.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleInput {
    pub id: String,
    #[serde(default = "two")]
    pub k: u8,
    #[serde(default = "one")]
    pub r: usize,
    #[serde(default = "one")]
    pub w: usize,
    #[serde(default)]
    pub table: Option<Vec<u8>>,
}

fn two() -> u8 {
    2
}

fn one() -> usize {
    1
}

impl RuleInput {
    pub fn to_rule(&self) -> tenun_core::Result<RuleSpec> {
        RuleRecord { id: self.id.clone(), k: self.k, r: self.r, w: self.w, table: self.table.clone() }.to_rule()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreatePattern {
    pub rule: RuleInput,
    pub config: EvolutionConfig,
    #[serde(default)]
    pub colorway: Option<Colorway>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdatePattern {
    #[serde(default)]
    pub config: Option<EvolutionConfig>,
    #[serde(default)]
    pub colorway: Option<Colorway>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternEnvelope {
    pub session_id: String,
    pub revision: u64,
    pub document: PatternDocument,
}

#[derive(Serialize)]
struct RasterResponse {
    session_id: String,
    revision: u64,
    document: PatternDocument,
    #[serde(flatten)]
    outcome: RasterOutcome,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderQuery {
    pub cellpx: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DraftQuery {
    pub capacity: Option<usize>,
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request("query", e.body_text()))
}

fn envelope(session: crate::Session) -> Response {
    let etag = HeaderValue::from_str(&format!("\"{}\"", session.revision)).expect("ascii etag");
    let body = PatternEnvelope { session_id: session.id, revision: session.revision, document: session.document };
    ([(header::ETAG, etag)], Json(body)).into_response()
}

fn check_size(config: &EvolutionConfig, rule: &RuleSpec) -> Result<(), ApiError> {
    let rows = config.steps.saturating_add(rule.window());
    if config.width.saturating_mul(rows) > MAX_CELLS {
        return Err(ApiError::bad_request(
            "config",
            format!("{} x {rows} cells exceeds the limit of {MAX_CELLS}", config.width),
        ));
    }
    Ok(())
}

pub async fn elementary_rules(q: Result<Query<SweepQuery>, QueryRejection>) -> Result<Json<SweepReport>, ApiError> {
    let params = query(q)?.params();
    if params.width.saturating_mul(params.steps + 1) > MAX_SWEEP_CELLS {
        return Err(ApiError::bad_request("query", format!("sweep grids are limited to {MAX_SWEEP_CELLS} cells")));
    }
    let report = tokio::task::spawn_blocking(move || run_sweep(&params))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(report))
}

pub async fn create_pattern(State(app): Shared, body: Bytes) -> Result<Response, ApiError> {
    let req: CreatePattern = decode_json(&body)?;
    let rule = req.rule.to_rule()?;
    check_size(&req.config, &rule)?;
    let doc = generate_document(&rule, &req.config, req.colorway)?;
    let session = app.store.create(doc)?;
    let mut response = envelope(session);
    *response.status_mut() = StatusCode::CREATED;
    Ok(response)
}

pub async fn get_pattern(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(envelope(app.store.get(&id)?))
}

fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let text = value.to_str().unwrap_or_default().trim();
    let text = text.strip_prefix("W/").unwrap_or(text).trim_matches('"');
    text.parse().map(Some).map_err(|_| ApiError::bad_request("If-Match", format!("`{text}` is not a revision number")))
}

pub async fn update_pattern(
    State(app): Shared,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let expected = if_match(&headers)?;
    let req: UpdatePattern = decode_json(&body)?;
    let current = app.store.get(&id)?;
    let rule = current.document.rule_spec()?;
    if let Some(config) = &req.config {
        let Some(rule) = &rule else {
            return Err(ApiError::bad_request("config", "this session has no rule to evolve"));
        };
        check_size(config, rule)?;
    }
    let session = app.store.update(&id, expected, |doc| {
        let colorway = req.colorway.clone().or_else(|| doc.colorway.clone());
        match (&rule, req.config.clone().or_else(|| doc.config.clone())) {
            (Some(rule), Some(config)) => generate_document(rule, &config, colorway),
            _ => {
                let mut next = doc.clone();
                next.colorway = colorway;
                next.validate()?;
                Ok(next)
            }
        }
    })?;
    Ok(envelope(session))
}

pub async fn render_png(
    State(app): Shared,
    Path(id): Path<String>,
    q: Result<Query<RenderQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let cell_px = query(q)?.cellpx.unwrap_or(4);
    if cell_px == 0 {
        return Err(ApiError::bad_request("query.cellpx", "must be at least 1"));
    }
    let session = app.store.get(&id)?;
    let grid = &session.document.grid;
    if grid.width.max(grid.height).saturating_mul(cell_px) > MAX_RENDER_SIDE {
        return Err(ApiError::bad_request(
            "query.cellpx",
            format!("render would exceed {MAX_RENDER_SIDE} pixels per side"),
        ));
    }
    let png = document_png(&session.document, cell_px)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

pub async fn draft_wif(
    State(app): Shared,
    Path(id): Path<String>,
    q: Result<Query<DraftQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let capacity = query(q)?.capacity.unwrap_or(DEFAULT_SHAFT_CAPACITY);
    let session = app.store.get(&id)?;
    let draft = document_draft(&session.document, capacity)?;
    let disposition = format!("attachment; filename=\"{}.wif\"", session.id);
    Ok((
        [(header::CONTENT_TYPE, "text/plain; charset=utf-8".to_string()), (header::CONTENT_DISPOSITION, disposition)],
        export_wif(&draft),
    )
        .into_response())
}

pub async fn pattern_metrics(State(app): Shared, Path(id): Path<String>) -> Result<Json<RuleMetrics>, ApiError> {
    let session = app.store.get(&id)?;
    Ok(Json(document_metrics(&session.document)?))
}

pub async fn raster(State(app): Shared, mut multipart: Multipart) -> Result<Response, ApiError> {
    let limits = &app.config;
    let mut image = None;
    let mut config = None;
    let mut weavability = WeavabilityConfig::default();
    let mut repair = true;
    let multipart_err = |e: axum::extract::multipart::MultipartError| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::too_large(format!("upload exceeds {} bytes", limits.upload_limit))
        } else {
            ApiError::bad_request("multipart", e.body_text())
        }
    };
    while let Some(field) = multipart.next_field().await.map_err(multipart_err)? {
        let name = field.name().unwrap_or_default().to_string();
        let data = field.bytes().await.map_err(multipart_err)?;
        match name.as_str() {
            "image" => image = Some(data),
            "config" => config = Some(decode_json::<RasterConfig>(&data).map_err(|e| prefix("config", e))?),
            "weavability" => weavability = decode_json(&data).map_err(|e| prefix("weavability", e))?,
            "repair" => {
                repair = match &data[..] {
                    b"true" | b"1" | b"on" => true,
                    b"false" | b"0" | b"off" => false,
                    _ => return Err(ApiError::bad_request("repair", "expected true or false")),
                }
            }
            other => return Err(ApiError::bad_request(other, "unknown multipart field")),
        }
    }
    let image = image.ok_or_else(|| ApiError::bad_request("image", "missing field"))?;
    let config = config.ok_or_else(|| ApiError::bad_request("config", "missing field"))?;
    if image.len() > limits.upload_limit {
        return Err(ApiError::too_large(format!(
            "image is {} bytes, the limit is {}",
            image.len(),
            limits.upload_limit
        )));
    }
    let side = limits.max_image_side;
    if config.target_width > side || config.target_height > side {
        return Err(ApiError::too_large(format!("target dimensions exceed {side}x{side}")));
    }
    let format = ImageFormat::detect(&image)
        .ok_or_else(|| ApiError::bad_request("image", "unrecognized image format (PGM, PPM or PNG)"))?;
    let (w, h) = image_dimensions(&image, format)?;
    if w > side || h > side {
        return Err(ApiError::too_large(format!("image is {w}x{h}, the limit is {side}x{side}")));
    }
    let matrix = decode_image(&image)?;
    let (document, outcome) = raster_document(&matrix, &config, &weavability, repair)?;
    let session = app.store.create(document.clone())?;
    let body = RasterResponse { session_id: session.id, revision: session.revision, document, outcome };
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn prefix(field: &str, e: tenun_core::Error) -> ApiError {
    match e {
        tenun_core::Error::Schema { path, message } => {
            let path = if path.is_empty() { field.to_string() } else { format!("{field}.{path}") };
            ApiError::bad_request(&path, message)
        }
        other => other.into(),
    }
}
