//! Feature extraction for deployed contracts: what the creation
//! transaction looked like (deployment features) and what the code can do
//! (implementation features), plus the one-hot + z-score encoding that
//! turns a record into a model input.
//!
//! Extraction is pure: the same lifted contract, transaction view, and
//! selector configuration always produce the same record, so records can
//! be computed in parallel per contract. Normalizer statistics are fitted
//! once on training data and immutable afterwards.

mod deployment;
mod implementation;
mod normalize;
mod record;
mod selectors;

pub use deployment::{
    extract_deployment_features, CreationReceipt, CreationTx, DeploymentFeatures,
};
pub use implementation::{extract_implementation_features, ImplementationFeatures};
pub use normalize::{
    encode, encode_all, fit_normalizer, numeric_row, NormalizerStats, NUMERIC_COLUMNS,
};
pub use record::{
    compute_rescue_window, encoded_columns, read_dataset, write_dataset, FeatureRecord,
    DATASET_FORMAT, DATASET_VERSION,
};
pub use selectors::{
    SelectorConfig, SelectorSet, FLASHLOAN_CALLBACK_SIGNATURES, TOKEN_CALL_SIGNATURES,
};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("transaction has a recipient, not a contract creation")]
    NotADeployment,
    #[error("receipt unusable: {0}")]
    BadReceipt(String),
    #[error("label {0} outside {{0,1}}")]
    BadLabel(u8),
    #[error("need at least {minimum} records, got {found}")]
    TooFewRecords { found: usize, minimum: usize },
    #[error("first adversarial transaction predates deployment")]
    AttackBeforeDeploy,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset is {found}, this build reads {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(String),
}

impl FeatureError {
    pub(crate) fn json(e: serde_json::Error) -> FeatureError {
        FeatureError::Json(e.to_string())
    }
}
