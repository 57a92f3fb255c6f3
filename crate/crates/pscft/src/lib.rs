//! Call-flow text summaries of lifted contracts.
//!
//! A lifted contract is far too noisy to classify directly: most
//! instructions are stack shuffling and arithmetic. This crate reduces a
//! contract to the part that matters for adversarial detection, namely
//! which functions make which calls to whom, and renders it as a small,
//! deterministic text document:
//!
//! 1. [`filter_call_statements`] keeps only call-shaped statements.
//! 2. [`prune_cfg`] removes the now-empty blocks, preserving exactly
//!    which calls can reach which.
//! 3. [`canonical_rename`] fixes function order and block numbering so
//!    equivalent contracts produce identical text.
//! 4. [`recover_semantics`] swaps raw selectors and addresses for names
//!    like `UniswapV3.flash(...args)`.
//! 5. [`serialize_pscft`] emits the document and its token stream.
//!
//! [`detect_standard_contract`] is a cheap pre-filter: complete token
//! interfaces and proxy shells can skip the pipeline entirely.

pub mod filter;
pub mod gen;
pub mod prune;
pub mod rename;
pub mod semantics;
pub mod serialize;
pub mod standard;
pub mod statement;

pub use filter::{filter_call_statements, CallContract};
pub use prune::{prune_cfg, prune_contract};
pub use rename::{canonical_rename, natural_cmp};
pub use semantics::{
    recover_semantics, resolve_public_names, ChainedSignatures, LabelDbTargeter, MemoResolver,
    ResolveError, SignatureDb, SignatureResolver, TargetLabeler,
};
pub use serialize::{read_pscft, serialize_pscft, tokenize, PscftDocument, ReadFunction};
pub use standard::{detect_standard_contract, erc1967_implementation_slot, StandardKind};
pub use statement::{CallKind, CallStatement, UNKNOWN_FUNC, UNKNOWN_TARGET};

use evm_lift::ir::ContractIR;

#[derive(Debug, thiserror::Error)]
pub enum PscftError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PscftError {
    fn parse(line: usize, message: impl Into<String>) -> PscftError {
        PscftError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// The whole pipeline: filter, prune, resolve public names, rename,
/// annotate call sites, serialize.
pub fn build_pscft(
    ir: &ContractIR,
    signatures: &dyn SignatureResolver,
    labels: &dyn TargetLabeler,
) -> (PscftDocument, CallContract) {
    let mut contract = filter_call_statements(ir);
    prune_contract(&mut contract);
    resolve_public_names(&mut contract, signatures);
    let mut contract = canonical_rename(contract);
    recover_semantics(&mut contract, signatures, labels);
    let doc = serialize_pscft(&contract);
    (doc, contract)
}
