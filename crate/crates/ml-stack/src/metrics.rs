//! Confusion counts and the derived metrics. The false-positive rate gets
//! first-class treatment: flagging a benign deployment costs an analyst
//! triage time, so the operating point cares about FPR as much as recall.

use serde::{Deserialize, Serialize};

use crate::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
}

/// `2PR/(P+R)`, zero when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        return 0.0;
    }
    2.0 * precision * recall / (precision + recall)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> EvalReport {
        let n = tp + fp + tn + fn_;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        EvalReport {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, n),
            precision,
            recall,
            f1: f1_score(precision, recall),
            fpr: ratio(fp, fp + tn),
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Thresholds the probabilities and counts the confusion matrix.
pub fn evaluate(predictions: &[f64], labels: &[u8], threshold: f64) -> Result<EvalReport, MlError> {
    if predictions.is_empty() {
        return Err(MlError::Empty("evaluation set"));
    }
    if predictions.len() != labels.len() {
        return Err(MlError::BadInput(format!(
            "{} predictions against {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &y) in predictions.iter().zip(labels) {
        if y > 1 {
            return Err(MlError::BadInput(format!("label {y} is not binary")));
        }
        match (p >= threshold, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, tn, fn_))
}
