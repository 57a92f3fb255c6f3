//! End-to-end inference over one contract record: encode the tabular
//! features, run both base models, fuse with the meta model. Assembly
//! checks the cross-component invariants once, up front, so the per
//! contract path can stay unchecked and fast.

use contract_features::{encode, FeatureRecord};

use crate::bundle::ModelBundle;
use crate::candidates::CandidateKind;
use crate::meta::MetaKind;
use crate::{MlError, ProbPredictor};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Prediction {
    /// 1 flags the contract as adversarial.
    pub label: u8,
    /// fused probability, the number the label is thresholded from
    pub probability: f64,
    pub p_candidate: f64,
    pub p_transformer: f64,
}

/// A validated, ready-to-serve model quintet.
#[derive(Debug, Clone)]
pub struct PredictionStack {
    bundle: ModelBundle,
}

impl PredictionStack {
    /// Rejects bundles whose parts were not trained together: the sequence
    /// model must carry the vocabulary's content hash and the tabular
    /// model must expect exactly the encoder's output width.
    pub fn assemble(bundle: ModelBundle) -> Result<PredictionStack, MlError> {
        if bundle.transformer.vocab_hash() != bundle.vocab.content_hash() {
            return Err(MlError::Mismatch(
                "sequence model was trained against a different vocabulary".into(),
            ));
        }
        let expected = bundle.normalizer.encoded_dim();
        let found = bundle.candidate.n_features();
        if found != expected {
            return Err(MlError::Mismatch(format!(
                "tabular model takes {found} features but the encoder produces {expected}"
            )));
        }
        Ok(PredictionStack { bundle })
    }

    pub fn bundle(&self) -> &ModelBundle {
        &self.bundle
    }

    pub fn into_bundle(self) -> ModelBundle {
        self.bundle
    }

    pub fn candidate_kind(&self) -> CandidateKind {
        self.bundle.candidate.kind()
    }

    pub fn meta_kind(&self) -> MetaKind {
        self.bundle.meta.kind()
    }

    pub fn predict(&self, record: &FeatureRecord) -> Result<Prediction, MlError> {
        predict_contract(self, record)
    }
}

pub fn predict_contract(
    stack: &PredictionStack,
    record: &FeatureRecord,
) -> Result<Prediction, MlError> {
    let b = &stack.bundle;
    let row = encode(record, &b.normalizer);
    let p_candidate = b.candidate.predict_proba(&row);
    let p_transformer = b.transformer.predict_doc(&record.pscft_text, &b.vocab)?;
    let probability = b.meta.predict_proba((p_candidate, p_transformer));
    Ok(Prediction {
        label: u8::from(probability >= 0.5),
        probability,
        p_candidate,
        p_transformer,
    })
}
