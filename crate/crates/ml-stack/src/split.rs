//! Chronological data splitting. Random splits would let the models peek
//! at the future: a contract deployed in March must never be scored by a
//! model that saw April. Everything here sorts by deployment time first
//! and only ever cuts forward.

use contract_features::FeatureRecord;

use crate::metrics::EvalReport;
use crate::MlError;

#[derive(Debug, Clone)]
pub struct ChronoSplit {
    pub base_train: Vec<FeatureRecord>,
    pub meta_train: Vec<FeatureRecord>,
    pub test: Vec<FeatureRecord>,
}

/// Sorts by (deploy_timestamp, contract_id) and cuts: earliest
/// `train_fraction` forms the training pool, the latest `meta_fraction`
/// of that pool trains the meta model, the rest of the pool trains the
/// base models, and the newest remainder is the held-out test set.
pub fn chrono_split(
    records: &[FeatureRecord],
    train_fraction: f64,
    meta_fraction: f64,
) -> Result<ChronoSplit, MlError> {
    if records.len() < 5 {
        return Err(MlError::TooFewRecords { found: records.len(), minimum: 5 });
    }
    if !(0.0..1.0).contains(&train_fraction) || train_fraction == 0.0 {
        return Err(MlError::BadInput(format!("train_fraction {train_fraction} not in (0,1)")));
    }
    if !(0.0..1.0).contains(&meta_fraction) || meta_fraction == 0.0 {
        return Err(MlError::BadInput(format!("meta_fraction {meta_fraction} not in (0,1)")));
    }
    let mut sorted: Vec<FeatureRecord> = records.to_vec();
    sorted.sort_by(|a, b| {
        a.deploy_timestamp.cmp(&b.deploy_timestamp).then_with(|| a.contract_id.cmp(&b.contract_id))
    });

    let n = sorted.len();
    let pool_len = ((n as f64) * train_fraction).floor() as usize;
    let meta_len = ((pool_len as f64) * meta_fraction).floor() as usize;
    let base_len = pool_len - meta_len;
    if base_len == 0 || meta_len == 0 || pool_len == n {
        return Err(MlError::BadInput(format!(
            "fractions ({train_fraction}, {meta_fraction}) leave an empty slice for {n} records"
        )));
    }

    let test = sorted.split_off(pool_len);
    let meta_train = sorted.split_off(base_len);
    Ok(ChronoSplit { base_train: sorted, meta_train, test })
}

#[derive(Debug, Clone)]
pub struct FoldReport {
    /// 1-based fold number; fold i trains on splits 1..=i.
    pub fold: usize,
    pub train_len: usize,
    pub test_len: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub folds: Vec<FoldReport>,
    pub mean_f1: f64,
    /// One entry per skipped fold (single-class training slice).
    pub diagnostics: Vec<String>,
}

/// Cuts the record stream into `n_splits` equal chronological chunks and
/// evaluates `trainer` on an expanding window: train on chunks `1..=i`,
/// test on chunk `i+1`. Folds whose training slice holds a single class
/// are skipped with a diagnostic instead of failing the whole run.
pub fn expanding_window_cv(
    records: &[FeatureRecord],
    n_splits: usize,
    trainer: &mut dyn FnMut(&[FeatureRecord], &[FeatureRecord]) -> Result<EvalReport, MlError>,
) -> Result<CvOutcome, MlError> {
    if n_splits < 2 {
        return Err(MlError::BadInput(format!("n_splits {n_splits} must be at least 2")));
    }
    if records.len() < n_splits {
        return Err(MlError::TooFewRecords { found: records.len(), minimum: n_splits });
    }
    let mut sorted: Vec<FeatureRecord> = records.to_vec();
    sorted.sort_by(|a, b| {
        a.deploy_timestamp.cmp(&b.deploy_timestamp).then_with(|| a.contract_id.cmp(&b.contract_id))
    });

    let n = sorted.len();
    let boundary = |i: usize| i * n / n_splits;
    let mut folds = Vec::new();
    let mut diagnostics = Vec::new();
    for i in 1..n_splits {
        let train = &sorted[..boundary(i)];
        let test = &sorted[boundary(i)..boundary(i + 1)];
        let classes: std::collections::BTreeSet<Option<u8>> =
            train.iter().map(|r| r.label).collect();
        if classes.len() < 2 {
            diagnostics.push(format!(
                "fold {i}: training window holds a single class, skipped ({} records)",
                train.len()
            ));
            continue;
        }
        let report = trainer(train, test)?;
        folds.push(FoldReport { fold: i, train_len: train.len(), test_len: test.len(), report });
    }
    let mean_f1 = if folds.is_empty() {
        0.0
    } else {
        folds.iter().map(|f| f.report.f1).sum::<f64>() / folds.len() as f64
    };
    Ok(CvOutcome { folds, mean_f1, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(id: &str, ts: u64, label: u8) -> FeatureRecord {
        FeatureRecord {
            contract_id: id.to_string(),
            deployment: Default::default(),
            implementation: Default::default(),
            pscft_text: String::new(),
            label: Some(label),
            deploy_timestamp: ts,
        }
    }

    fn timestamps(rs: &[FeatureRecord]) -> Vec<u64> {
        rs.iter().map(|r| r.deploy_timestamp).collect()
    }

    #[test]
    fn ten_timestamps_cut_six_two_two() {
        let records: Vec<_> =
            (1..=10).map(|t| record(&format!("c{t}"), t, (t % 2) as u8)).collect();
        let s = chrono_split(&records, 0.8, 0.25).unwrap();
        assert_eq!(timestamps(&s.base_train), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(timestamps(&s.meta_train), vec![7, 8]);
        assert_eq!(timestamps(&s.test), vec![9, 10]);
    }

    #[test]
    fn shuffled_input_is_sorted_first() {
        let order = [7u64, 1, 9, 3, 10, 5, 2, 8, 6, 4];
        let records: Vec<_> =
            order.iter().map(|&t| record(&format!("c{t}"), t, (t % 2) as u8)).collect();
        let s = chrono_split(&records, 0.8, 0.25).unwrap();
        assert_eq!(timestamps(&s.test), vec![9, 10]);
        let max_pool = s
            .base_train
            .iter()
            .chain(&s.meta_train)
            .map(|r| r.deploy_timestamp)
            .max()
            .unwrap();
        assert!(max_pool <= s.test[0].deploy_timestamp);
    }

    #[test]
    fn duplicate_timestamps_split_by_id() {
        let records: Vec<_> = ["e", "b", "a", "d", "c", "f"]
            .iter()
            .map(|id| record(id, 5, 0))
            .collect();
        let s1 = chrono_split(&records, 0.8, 0.25).unwrap();
        let s2 = chrono_split(&records, 0.8, 0.25).unwrap();
        let ids = |rs: &[FeatureRecord]| -> Vec<String> {
            rs.iter().map(|r| r.contract_id.clone()).collect()
        };
        assert_eq!(ids(&s1.test), ids(&s2.test));
        assert_eq!(ids(&s1.test), vec!["e", "f"]);
    }

    #[test]
    fn too_few_records_is_an_error() {
        let records: Vec<_> = (1..=4).map(|t| record(&format!("c{t}"), t, 0)).collect();
        assert!(matches!(
            chrono_split(&records, 0.8, 0.25),
            Err(MlError::TooFewRecords { found: 4, minimum: 5 })
        ));
    }

    #[test]
    fn expanding_window_grows_by_one_chunk() {
        let records: Vec<_> =
            (0..25).map(|t| record(&format!("c{t:02}"), t, (t % 2) as u8)).collect();
        let mut seen = Vec::new();
        let out = expanding_window_cv(&records, 5, &mut |train, test| {
            seen.push((train.len(), test.len()));
            let max_train = train.iter().map(|r| r.deploy_timestamp).max().unwrap();
            let min_test = test.iter().map(|r| r.deploy_timestamp).min().unwrap();
            assert!(max_train < min_test, "test fold must be strictly newer");
            Ok(EvalReport::from_counts(1, 0, 1, 0))
        })
        .unwrap();
        assert_eq!(seen, vec![(5, 5), (10, 5), (15, 5), (20, 5)]);
        assert_eq!(out.folds.len(), 4);
        assert_eq!(out.mean_f1, 1.0);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn two_splits_make_one_fold() {
        let records: Vec<_> =
            (0..8).map(|t| record(&format!("c{t}"), t, (t % 2) as u8)).collect();
        let out = expanding_window_cv(&records, 2, &mut |_, _| {
            Ok(EvalReport::from_counts(1, 1, 1, 1))
        })
        .unwrap();
        assert_eq!(out.folds.len(), 1);
        assert_eq!(out.folds[0].train_len, 4);
    }

    #[test]
    fn single_class_training_window_is_skipped_with_note() {
        // first chunk all label 0: fold 1 must be skipped, later folds run
        let mut records: Vec<_> = (0..20)
            .map(|t| record(&format!("c{t:02}"), t, if t < 5 { 0 } else { (t % 2) as u8 }))
            .collect();
        records.reverse(); // exercise the defensive sort too
        let out = expanding_window_cv(&records, 4, &mut |_, _| {
            Ok(EvalReport::from_counts(1, 0, 1, 0))
        })
        .unwrap();
        assert_eq!(out.folds.len(), 2);
        assert_eq!(out.folds[0].fold, 2);
        assert_eq!(out.diagnostics.len(), 1);
        assert!(out.diagnostics[0].contains("fold 1"));
    }
}
