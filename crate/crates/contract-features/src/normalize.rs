//! Z-score normalization fitted on training data only, and the fixed
//! encoded-vector layout.
//!
//! Layout: 4 one-hot funding columns, the two 0/1 flags, then the numeric
//! columns standardized with the fitted statistics. Dropping the
//! `verified` flag (for the no-explorer ablation) removes exactly one
//! column; everything else keeps its relative position.

use serde::{Deserialize, Serialize};

use crate::record::FeatureRecord;
use crate::FeatureError;

/// Numeric (z-scored) columns in encode order.
pub const NUMERIC_COLUMNS: [&str; 13] = [
    "nonce",
    "input_data_length",
    "gas_used",
    "func_count",
    "public_func_count",
    "flashloan_callback_count",
    "flashloan_callback_ratio",
    "token_call_count",
    "token_call_ratio",
    "max_token_call_count",
    "avg_token_call_count",
    "delegate_call_count",
    "selfdestruct_count",
];

/// Raw values of the numeric columns, same order as [`NUMERIC_COLUMNS`].
pub fn numeric_row(r: &FeatureRecord) -> [f64; NUMERIC_COLUMNS.len()] {
    let d = &r.deployment;
    let i = &r.implementation;
    [
        d.nonce as f64,
        d.input_data_length as f64,
        d.gas_used as f64,
        i.func_count as f64,
        i.public_func_count as f64,
        i.flashloan_callback_count as f64,
        i.flashloan_callback_ratio,
        i.token_call_count as f64,
        i.token_call_ratio,
        i.max_token_call_count as f64,
        i.avg_token_call_count as f64,
        i.delegate_call_count as f64,
        i.selfdestruct_count as f64,
    ]
}

/// Per-column statistics frozen at fit time. Immutable afterwards; encode
/// never mutates, so one instance serves any number of threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerStats {
    pub means: Vec<f64>,
    /// population standard deviation; exactly-constant columns carry the
    /// sentinel 1.0 so they encode to 0 instead of NaN
    pub stds: Vec<f64>,
    /// one-hot order, recorded for bundle self-description
    pub categories: Vec<String>,
    pub include_verified: bool,
}

impl NormalizerStats {
    pub fn encoded_dim(&self) -> usize {
        self.categories.len() + 1 + usize::from(self.include_verified) + self.means.len()
    }
}

pub fn fit_normalizer(
    records: &[FeatureRecord],
    include_verified: bool,
) -> Result<NormalizerStats, FeatureError> {
    if records.len() < 2 {
        return Err(FeatureError::TooFewRecords { found: records.len(), minimum: 2 });
    }
    let rows: Vec<[f64; NUMERIC_COLUMNS.len()]> = records.iter().map(numeric_row).collect();
    let n = rows.len() as f64;
    let mut means = vec![0.0; NUMERIC_COLUMNS.len()];
    let mut stds = vec![0.0; NUMERIC_COLUMNS.len()];
    for c in 0..NUMERIC_COLUMNS.len() {
        let constant = rows.iter().all(|r| r[c] == rows[0][c]);
        if constant {
            means[c] = rows[0][c];
            stds[c] = 1.0;
            continue;
        }
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        means[c] = mean;
        stds[c] = var.sqrt();
    }
    Ok(NormalizerStats {
        means,
        stds,
        categories: fundsource::FundSourceCategory::ALL.iter().map(|c| c.to_string()).collect(),
        include_verified,
    })
}

/// Fixed-layout numeric vector for one record.
pub fn encode(record: &FeatureRecord, stats: &NormalizerStats) -> Vec<f64> {
    let mut v = Vec::with_capacity(stats.encoded_dim());
    let mut one_hot = [0.0; 4];
    one_hot[record.deployment.fund_source.index()] = 1.0;
    v.extend_from_slice(&one_hot);
    v.push(if record.deployment.value_flag { 1.0 } else { 0.0 });
    if stats.include_verified {
        v.push(if record.deployment.verified { 1.0 } else { 0.0 });
    }
    let row = numeric_row(record);
    for c in 0..row.len() {
        v.push((row[c] - stats.means[c]) / stats.stds[c]);
    }
    v
}

pub fn encode_all(records: &[FeatureRecord], stats: &NormalizerStats) -> Vec<Vec<f64>> {
    records.iter().map(|r| encode(r, stats)).collect()
}
