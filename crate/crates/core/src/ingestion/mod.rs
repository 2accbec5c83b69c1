//! Building fact stores from offline snapshots or from the live hosting API.

mod budget;
mod github;
mod pages;
mod snapshot;

use thiserror::Error;

use crate::fact_model::FactError;

pub use budget::{BudgetTracker, FetchBudget};
pub use github::{fetch_contributors, fetch_repository, GitHubClient, Scope, DEFAULT_API_BASE, TOKEN_VAR};
pub use pages::{fetch_external_page, PageFetcher, ALLOWED_HOSTS};
pub use snapshot::{build_store, load_snapshot, save_snapshot, snapshot_from_str, Snapshot, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot access `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("`{path}` is not valid JSON: {message}")]
    Json { path: String, message: String },
    #[error("unsupported snapshot formatVersion {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("invalid snapshot at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error(transparent)]
    Invalid(#[from] FactError),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limit reached after {used} requests")]
    RateLimited { used: u32 },
    #[error("request budget exhausted after {used} requests")]
    BudgetExhausted { used: u32 },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("incomplete fetch; missing: {}", missing.join(", "))]
    Partial { missing: Vec<String> },
    #[error("HTTP {status} from {url}")]
    Http { url: String, status: u16 },
    #[error("request to {url} failed: {message}")]
    Network { url: String, message: String },
    #[error("unexpected response from {url}: {message}")]
    Response { url: String, message: String },
    #[error("host not allowed for page retrieval: {0}")]
    DisallowedHost(String),
    #[error("invalid fetch budget: {0}")]
    InvalidBudget(String),
    #[error("invalid URL `{0}`")]
    InvalidUrl(String),
}
