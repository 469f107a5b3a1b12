//! JSON:API backend for EMA studies.
//!
//! Participants log in anonymously, subscribe to studies and submit
//! answersheets; collaborators and administrators seed questionnaire
//! documents. All state lives in one SQLite database.

pub mod api;
pub mod auth;
pub mod clock;
pub mod jsonapi;
pub mod state;
pub mod stats;
pub mod store;

pub use api::router;
pub use clock::Clock;
pub use jsonapi::MEDIA_TYPE;
pub use state::{AppState, ServiceConfig};
pub use stats::{compute_summary, Summary, SummaryStats};
pub use store::{Store, StoreError};

/// Serves the API on `listener` until `shutdown` resolves, then lets
/// in-flight requests finish.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
