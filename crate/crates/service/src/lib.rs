//! HTTP service for screening sessions and palette adaptation.
//!
//! Sessions live in memory and every change is appended to a JSON-lines event
//! log, which is replayed on startup.

pub mod adaptation;
pub mod api;
pub mod events;
pub mod store;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use tokio::net::TcpListener;

pub use adaptation::{Catalog, CatalogError, SessionAdaptation};
pub use api::{router, AppState};
pub use store::{OpenError, SeedMode, Store};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub port: u16,
    pub state_path: PathBuf,
    pub seed_mode: SeedMode,
    /// Directory of alternative schemes; the built-in ones when absent.
    pub catalog_dir: Option<PathBuf>,
    pub default_palette: Option<PathBuf>,
    /// Allowed CORS origins; any origin when empty.
    pub allowed_origins: Vec<String>,
}

impl ServerConfig {
    pub fn new(port: u16, state_path: impl Into<PathBuf>) -> Self {
        ServerConfig {
            port,
            state_path: state_path.into(),
            seed_mode: SeedMode::PerSession,
            catalog_dir: None,
            default_palette: None,
            allowed_origins: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("port must be in 1..=65535")]
    Port,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    State(#[from] OpenError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Loads the catalog and replays the state file.
pub fn open_state(config: &ServerConfig) -> Result<AppState, ServeError> {
    if config.port == 0 {
        return Err(ServeError::Port);
    }
    let catalog = Catalog::load(config.default_palette.as_deref(), config.catalog_dir.as_deref())?;
    let store = Store::open(&config.state_path, catalog, config.seed_mode)?;
    Ok(AppState::new(store))
}

/// Serves until `shutdown` resolves.
pub async fn serve(config: ServerConfig, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    let state = open_state(&config)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], config.port));
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    axum::serve(listener, router(state, &config.allowed_origins))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
