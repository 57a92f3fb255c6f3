//! External-data access for the deployment pipeline: node JSON-RPC,
//! explorer metadata, and selector resolution, unified behind one client
//! with record/replay snapshots so every downstream computation can run
//! byte-identically offline.

mod benign;
mod client;
mod rlp;
pub mod rpc;
mod snapshot;
mod watch;

pub use benign::{build_benign_candidates, BenignCandidate, DEFAULT_MIN_UNIQUE_CALLERS};
pub use client::{ClientMode, ContractMeta, Endpoints, ExternalClient, TransferView};
pub use rlp::derive_contract_address;
pub use rpc::{BlockView, ReceiptView, TxView};
pub use snapshot::{RequestKey, Service, SnapshotError, SnapshotStore, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};
pub use watch::{watch_blocks, BlockWatcher, DeploymentEvent, RetryPolicy, WatchGap};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("replay snapshot has no entry for {method} (key {key})")]
    ReplayMiss { method: String, key: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("{method} failed upstream: {message}")]
    Service { method: String, message: String },
    #[error("{context}: {message}")]
    Malformed { context: String, message: String },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}
