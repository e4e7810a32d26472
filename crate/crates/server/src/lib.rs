//! Read-only HTTP service over a compiled bundle: the Exhibit data, faceted
//! item queries, analytics and the page images.

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, RawQuery, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use rave_core::analytics::FacetSelection;
use rave_core::api;
use rave_core::bundle::{load_bundle, LoadedBundle};
use rave_core::{BundleError, SelectionError};
use thiserror::Error;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub addr: IpAddr,
    pub port: u16,
    pub bundle_dir: PathBuf,
    /// Static files for the browser client; the bundle's own page is served
    /// at `/` when absent.
    pub ui_dir: Option<PathBuf>,
    /// Origin allowed to call the API from another host.
    pub cors_origin: Option<String>,
}

impl ServerConfig {
    pub fn new(bundle_dir: impl Into<PathBuf>) -> Self {
        Self {
            addr: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            bundle_dir: bundle_dir.into(),
            ui_dir: None,
            cors_origin: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port must be between 1 and 65535")]
    Port,
    #[error("invalid CORS origin {0:?}")]
    CorsOrigin(String),
    #[error("UI directory {0} does not exist")]
    UiDir(PathBuf),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    pub bundle: LoadedBundle,
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, code: &str, detail: &str) -> Response {
    json(status, api::error_document(code, detail))
}

fn selection_error(e: &SelectionError) -> Response {
    let code = match e {
        SelectionError::UnknownFacet(_) => "unknown_facet",
        SelectionError::BadValue { .. } => "bad_value",
    };
    error(StatusCode::BAD_REQUEST, code, &e.to_string())
}

fn selection(state: &AppState, raw: Option<&str>) -> Result<FacetSelection, SelectionError> {
    let pairs: Vec<(String, String)> = form_urlencoded::parse(raw.unwrap_or("").as_bytes())
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect();
    FacetSelection::from_pairs(
        &state.bundle.collection,
        pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())),
    )
}

async fn collection(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, state.bundle.exhibit_json.clone())
}

async fn items(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Response {
    let result = selection(&state, raw.as_deref())
        .and_then(|sel| api::items_document(&state.bundle.collection, &sel));
    match result {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => selection_error(&e),
    }
}

async fn facets(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Response {
    let result = selection(&state, raw.as_deref())
        .and_then(|sel| api::facets_document(&state.bundle.collection, &sel));
    match result {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => selection_error(&e),
    }
}

async fn workers(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, api::workers_document(&state.bundle.analytics))
}

async fn rankers(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, api::rankers_document(&state.bundle.analytics))
}

async fn units(State(state): State<Arc<AppState>>) -> Response {
    json(StatusCode::OK, api::units_document(&state.bundle.analytics))
}

/// Plain file names only; anything that could leave the images directory
/// is refused.
fn safe_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && !name.contains(['/', '\\', '\0'])
        && Path::new(name).components().count() == 1
}

fn content_type(name: &str) -> &'static str {
    match Path::new(name).extension().and_then(|e| e.to_str()) {
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        _ => "application/octet-stream",
    }
}

async fn image(State(state): State<Arc<AppState>>, UrlPath(name): UrlPath<String>) -> Response {
    if !safe_name(&name) {
        return error(StatusCode::BAD_REQUEST, "bad_path", &name);
    }
    match tokio::fs::read(state.bundle.images_dir().join(&name)).await {
        Ok(bytes) => (
            StatusCode::OK,
            [(header::CONTENT_TYPE, content_type(&name))],
            bytes,
        )
            .into_response(),
        Err(_) => error(StatusCode::NOT_FOUND, "not_found", &name),
    }
}

async fn bundle_index(State(state): State<Arc<AppState>>) -> Html<String> {
    Html(state.bundle.index_html.clone())
}

/// Checks the configuration and loads the bundle.
pub fn load_state(config: &ServerConfig) -> Result<AppState, ServeError> {
    if config.port == 0 {
        return Err(ServeError::Port);
    }
    if let Some(ui) = &config.ui_dir {
        if !ui.is_dir() {
            return Err(ServeError::UiDir(ui.clone()));
        }
    }
    Ok(AppState {
        bundle: load_bundle(&config.bundle_dir)?,
    })
}

pub fn router(state: AppState, config: &ServerConfig) -> Result<Router, ServeError> {
    let api = Router::new()
        .route("/api/collection", get(collection))
        .route("/api/items", get(items))
        .route("/api/facets", get(facets))
        .route("/api/analytics/workers", get(workers))
        .route("/api/analytics/rankers", get(rankers))
        .route("/api/analytics/units", get(units))
        .route("/images/{name}", get(image));
    let app = match &config.ui_dir {
        Some(ui) => api.fallback_service(ServeDir::new(ui)),
        None => api.route("/", get(bundle_index)),
    };
    let app = app.with_state(Arc::new(state));
    Ok(match &config.cors_origin {
        Some(origin) => {
            let origin = HeaderValue::from_str(origin)
                .map_err(|_| ServeError::CorsOrigin(origin.clone()))?;
            app.layer(
                CorsLayer::new()
                    .allow_origin(origin)
                    .allow_methods([Method::GET]),
            )
        }
        None => app,
    })
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

/// Loads the bundle, binds and serves until interrupted.
pub async fn run(config: ServerConfig) -> Result<(), ServeError> {
    let state = load_state(&config)?;
    let items = state.bundle.collection.items().len();
    let app = router(state, &config)?;
    let addr = SocketAddr::new(config.addr, config.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    tracing::info!(%addr, items, bundle = %config.bundle_dir.display(), "serving");
    serve_on(listener, app, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
