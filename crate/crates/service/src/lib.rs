//! HTTP service for video-example sign lookup: upload recognition,
//! candidate confirmation with persistent statistics, and sign-bank
//! browsing. See [`api`] for the routes.

pub mod api;
pub mod clock;
pub mod config;
pub mod error;
pub mod session;
pub mod state;
pub mod stats;

pub use api::router;
pub use config::ServiceConfig;
pub use state::{AppState, LifecycleEvent, Snapshot};

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;
use tokio::net::TcpListener;

/// How often sessions are swept and failed spool deletions retried.
pub const HOUSEKEEPING_INTERVAL: Duration = Duration::from_secs(60);

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    state: Arc<AppState>,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let keeper = {
        let state = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(HOUSEKEEPING_INTERVAL);
            loop {
                tick.tick().await;
                let state = state.clone();
                let _ = tokio::task::spawn_blocking(move || state.housekeeping()).await;
            }
        })
    };
    let result = axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await;
    keeper.abort();
    result
}
