//! REST service for the habit coach. State is the fold of an append-only
//! event log; see [`events`] for the durability contract.

pub mod app;
pub mod config;
pub mod error;
pub mod events;
pub mod state;

use std::sync::Arc;

use coach_core::{Clock, SystemClock};

pub use app::{App, Reply, IDEMPOTENCY_HEADER, TEST_CLOCK_HEADER};
pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use events::{parse_log, Event, EventLog, EventRecord};
pub use state::{assign_condition, replay, trainee_id, LedgerView, ReminderView, StudyState, TraineeRecord};

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    serve_with_clock(config, Arc::new(SystemClock)).await
}

pub async fn serve_with_clock(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<(), ServiceError> {
    let app = App::open(config, clock)?;
    let listener = tokio::net::TcpListener::bind(app.config().bind).await?;
    tracing::info!(addr = %listener.local_addr()?, test_mode = app.config().test_mode, "listening");
    axum::serve(listener, app.router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
