//! The per-contract record the dataset and the models consume, plus the
//! line-delimited dataset file format.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deployment::DeploymentFeatures;
use crate::implementation::ImplementationFeatures;
use crate::normalize::NUMERIC_COLUMNS;
use crate::FeatureError;

pub const DATASET_FORMAT: &str = "deploywatch-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub contract_id: String,
    pub deployment: DeploymentFeatures,
    pub implementation: ImplementationFeatures,
    /// rendered call-flow text, carried inline so a dataset is
    /// self-contained for sequence-model training
    pub pscft_text: String,
    /// 0 benign, 1 adversarial; absent for unlabeled records
    pub label: Option<u8>,
    pub deploy_timestamp: u64,
}

impl FeatureRecord {
    fn validate(&self) -> Result<(), FeatureError> {
        match self.label {
            Some(l) if l > 1 => Err(FeatureError::BadLabel(l)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    version: u32,
    /// encoded-vector layout, recorded so a reader can cross-check the
    /// normalizer it pairs the file with
    columns: Vec<String>,
}

/// Column names of the full encoded layout, in order.
pub fn encoded_columns() -> Vec<String> {
    let mut cols: Vec<String> = fundsource::FundSourceCategory::ALL
        .iter()
        .map(|c| format!("fund_source={c}"))
        .collect();
    cols.push("value_flag".into());
    cols.push("verified".into());
    cols.extend(NUMERIC_COLUMNS.iter().map(|c| c.to_string()));
    cols
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[FeatureRecord]) -> Result<(), FeatureError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = DatasetHeader {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        columns: encoded_columns(),
    };
    serde_json::to_writer(&mut out, &header).map_err(FeatureError::json)?;
    out.write_all(b"\n")?;
    for r in records {
        r.validate()?;
        serde_json::to_writer(&mut out, r).map_err(FeatureError::json)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<FeatureRecord>, FeatureError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| FeatureError::Parse { line: 1, message: "empty dataset file".into() })??;
    let header: DatasetHeader = serde_json::from_str(&header_line)
        .map_err(|e| FeatureError::Parse { line: 1, message: e.to_string() })?;
    if header.format != DATASET_FORMAT || header.version != DATASET_VERSION {
        return Err(FeatureError::VersionMismatch {
            found: format!("{} v{}", header.format, header.version),
            expected: format!("{DATASET_FORMAT} v{DATASET_VERSION}"),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FeatureRecord = serde_json::from_str(&line)
            .map_err(|e| FeatureError::Parse { line: i + 2, message: e.to_string() })?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

/// Seconds left for intervention once a prediction lands: time from
/// deployment to the first adversarial transaction, minus the time the
/// prediction itself took. Negative means the window was missed.
pub fn compute_rescue_window(
    t_first_attack: u64,
    t_deploy: u64,
    t_prediction: u64,
) -> Result<i64, FeatureError> {
    if t_first_attack < t_deploy {
        return Err(FeatureError::AttackBeforeDeploy);
    }
    Ok((t_first_attack - t_deploy) as i64 - t_prediction as i64)
}
