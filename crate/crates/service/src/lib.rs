//! HTTP JSON API over the design engine, with a session store for documents
//! under edit.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | GET | `/api/rules/elementary` | `width, steps, seed, hmax, maxfloat` |
//! | POST | `/api/patterns` | `{rule, config, colorway?}` |
//! | GET | `/api/patterns/{id}` | |
//! | PUT | `/api/patterns/{id}` | `{config?, colorway?}`, optional `If-Match: <revision>` |
//! | POST | `/api/raster` | multipart `image`, `config`, `weavability?`, `repair?` |
//! | GET | `/api/patterns/{id}/render.png` | `cellpx` |
//! | GET | `/api/patterns/{id}/draft.wif` | `capacity` |
//! | GET | `/api/patterns/{id}/metrics` | |

mod error;
mod routes;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::{ApiError, ErrorBody};
pub use routes::{CreatePattern, PatternEnvelope, RuleInput, SweepQuery, UpdatePattern};
pub use store::{Session, SessionStore, StoreError};

pub const DEFAULT_UPLOAD_LIMIT: usize = 4 * 1024 * 1024;
pub const DEFAULT_MAX_IMAGE_SIDE: usize = 4096;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub state_dir: Option<PathBuf>,
    /// Allowed browser origin; any origin when unset.
    pub cors_origin: Option<String>,
    pub upload_limit: usize,
    pub max_image_side: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            state_dir: None,
            cors_origin: None,
            upload_limit: DEFAULT_UPLOAD_LIMIT,
            max_image_side: DEFAULT_MAX_IMAGE_SIDE,
        }
    }
}

pub struct AppState {
    pub store: SessionStore,
    pub config: ServiceConfig,
}

pub fn router(config: ServiceConfig) -> Result<Router, StoreError> {
    let store = match &config.state_dir {
        Some(dir) => SessionStore::with_state_dir(dir)?,
        None => SessionStore::in_memory(),
    };
    let cors = cors_layer(config.cors_origin.as_deref())
        .map_err(|message| StoreError::Snapshot { path: PathBuf::new(), message })?;
    let body_limit = config.upload_limit + 64 * 1024;
    let state = Arc::new(AppState { store, config });
    Ok(Router::new()
        .route("/api/rules/elementary", get(routes::elementary_rules))
        .route("/api/patterns", post(routes::create_pattern))
        .route("/api/patterns/{id}", get(routes::get_pattern).put(routes::update_pattern))
        .route("/api/patterns/{id}/render.png", get(routes::render_png))
        .route("/api/patterns/{id}/draft.wif", get(routes::draft_wif))
        .route("/api/patterns/{id}/metrics", get(routes::pattern_metrics))
        .route("/api/raster", post(routes::raster))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state))
}

fn cors_layer(origin: Option<&str>) -> Result<CorsLayer, String> {
    let allow = match origin {
        Some(o) => AllowOrigin::exact(HeaderValue::from_str(o).map_err(|e| format!("CORS origin `{o}`: {e}"))?),
        None => AllowOrigin::any(),
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::PUT])
        .allow_headers([header::CONTENT_TYPE, header::IF_MATCH])
        .expose_headers([header::ETAG]))
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    let app = router(config).map_err(std::io::Error::other)?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}
