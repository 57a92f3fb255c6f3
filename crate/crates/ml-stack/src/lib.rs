//! Learning machinery for the deployment-screening pipeline.
//!
//! Two base models look at a contract from different angles: a feature
//! classifier over the encoded deployment/implementation vector, and a
//! small transformer encoder over the contract's behavioral text. A meta
//! classifier stacks their two probabilities into the final verdict.
//! Everything trains from a fixed seed and reproduces bit-for-bit; all
//! evaluation splits are chronological, never random, because the
//! deployment stream only moves forward.

pub mod adasyn;
pub mod bundle;
pub mod candidates;
pub mod importance;
pub mod linear;
pub mod meta;
pub mod metrics;
pub mod nn;
pub mod predict;
pub mod split;
pub mod transformer;
pub mod tree;
pub mod vocab;

pub use adasyn::{adasyn, adasyn_trace, SyntheticSample};
pub use bundle::{
    bundle_hash, load_bundle, save_bundle, ModelBundle, BUNDLE_FORMAT, BUNDLE_VERSION,
};
pub use candidates::{
    select_candidate, train_candidate, CandidateHyperparams, CandidateKind, CandidateModel,
};
pub use importance::permutation_importance;
pub use linear::{fit_logistic, fit_linear_svm, LinearModel};
pub use meta::{train_meta, train_meta_with, MetaKind, MetaModel, MetaParams};
pub use metrics::{evaluate, f1_score, EvalReport};
pub use predict::{predict_contract, Prediction, PredictionStack};
pub use split::{chrono_split, expanding_window_cv, ChronoSplit, CvOutcome, FoldReport};
pub use transformer::{
    parameter_count, train_transformer, LabeledDoc, TransformerConfig, TransformerModel,
};
pub use vocab::{build_vocab, TokenVocabulary, CLS_ID, PAD_ID, UNK_ID};

/// Probability output over a row of encoded features. Trees, forests, and
/// linear models all expose this so evaluation code does not care which
/// one it is holding.
pub trait ProbPredictor {
    fn predict_proba(&self, row: &[f64]) -> f64;

    fn predict_label(&self, row: &[f64], threshold: f64) -> u8 {
        u8::from(self.predict_proba(row) >= threshold)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MlError {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("{0}")]
    BadInput(String),
    #[error("too few records: found {found}, need at least {minimum}")]
    TooFewRecords { found: usize, minimum: usize },
    #[error("component mismatch: {0}")]
    Mismatch(String),
    #[error("bundle format {found} is not the supported {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error("bundle integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(String),
}
