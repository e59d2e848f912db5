//! HTTP service for the motion comic studio.

pub mod error;
pub mod extract;
pub mod openapi;
pub mod routes;
pub mod state;

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::Arc;

use axum::http::HeaderValue;
use axum::Router;
use tower_http::cors::{Any, CorsLayer};

pub use error::{ApiError, ApiResult};
pub use state::{AppState, SharedState};

pub const ENV_PORT: &str = "DB_PORT";
pub const ENV_UI_ORIGIN: &str = "DB_UI_ORIGIN";
pub const DEFAULT_PORT: u16 = 8008;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ServiceConfigError {
    #[error("{ENV_PORT} is not a port number: `{0}`")]
    BadPort(String),
    #[error("{ENV_UI_ORIGIN} is not a valid origin: `{0}`")]
    BadOrigin(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub host: IpAddr,
    pub port: u16,
    pub ui_origin: Option<String>,
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, ServiceConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ServiceConfigError> {
        let port = match get(ENV_PORT) {
            Some(p) => p.trim().parse().map_err(|_| ServiceConfigError::BadPort(p))?,
            None => DEFAULT_PORT,
        };
        let ui_origin = get(ENV_UI_ORIGIN).filter(|o| !o.trim().is_empty());
        if let Some(o) = &ui_origin {
            HeaderValue::from_str(o).map_err(|_| ServiceConfigError::BadOrigin(o.clone()))?;
        }
        Ok(ServiceConfig {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port,
            ui_origin,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.port)
    }
}

/// The router with CORS opened to the configured studio origin.
pub fn app(state: AppState, config: &ServiceConfig) -> Router {
    let router = routes::router(Arc::new(state));
    match &config.ui_origin {
        Some(origin) => router.layer(
            CorsLayer::new()
                .allow_origin(HeaderValue::from_str(origin).expect("origin checked at config time"))
                .allow_methods(Any)
                .allow_headers(Any),
        ),
        None => router,
    }
}

pub async fn serve(state: AppState, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(state, &config)).await
}
