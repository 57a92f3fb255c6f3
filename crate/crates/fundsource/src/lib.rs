//! Funding-source classification for contract deployers.
//!
//! Adversarial deployers overwhelmingly fund themselves through mixers and
//! cross-chain bridges rather than exchanges with identity checks. This
//! crate walks the "who funded whom first" graph from a deployer back to
//! the nearest labeled entity and maps it to one of four categories:
//! Safe, Anonymous, Bridge, or Unknown.
//!
//! The walk is bounded, cycle-safe, and degrades to `Unknown` instead of
//! failing: a funding trace must never take the deployment pipeline down.

pub mod fixture;
pub mod labels;
pub mod trace;

pub use fixture::{FixtureGraph, Transfer};
pub use labels::{AddressLabelDB, FundSourceCategory};
pub use trace::{trace_fund_source, CachedTracer, FundTrace, FundingGraphProvider, DEFAULT_MAX_DEPTH};

/// Provider-side failure. Carries the backend's own message; the tracer
/// turns it into a diagnostic on the degraded result.
#[derive(Debug, thiserror::Error)]
#[error("funding graph provider: {0}")]
pub struct ProviderError(pub String);

#[derive(Debug, thiserror::Error)]
pub enum FundSourceError {
    #[error("unknown fund source category `{0}`")]
    BadCategory(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FundSourceError {
    fn parse(line: usize, message: impl Into<String>) -> FundSourceError {
        FundSourceError::Parse {
            line,
            message: message.into(),
        }
    }
}
