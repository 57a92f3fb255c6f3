//! Second-stage fusion. A meta model sees exactly two numbers per
//! contract, the tabular candidate's probability and the sequence model's
//! probability, and folds them into the final score. Four shapes are
//! supported; nearest-neighbors is the default because the base
//! probability plane is tiny and its decision regions are easy to audit.
//!
//! Training is permissive about class balance (a nearest-neighbors or
//! tree meta copes with a lopsided slice), but strict about geometry:
//! both coordinates must be probabilities in [0, 1].

use crate::linear::{fit_linear_svm, fit_logistic, LinearModel};
use crate::tree::{SplitCriterion, Tree, TreeConfig};
use crate::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetaKind {
    NearestNeighbors,
    LogisticRegression,
    LinearSvm,
    DecisionTree,
}

impl MetaKind {
    pub const ALL: [MetaKind; 4] = [
        MetaKind::NearestNeighbors,
        MetaKind::LogisticRegression,
        MetaKind::LinearSvm,
        MetaKind::DecisionTree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetaKind::NearestNeighbors => "nearest_neighbors",
            MetaKind::LogisticRegression => "logistic_regression",
            MetaKind::LinearSvm => "linear_svm",
            MetaKind::DecisionTree => "decision_tree",
        }
    }

    pub fn parse(s: &str) -> Option<MetaKind> {
        MetaKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaParams {
    pub knn_k: usize,
    pub lr_rate: f64,
    pub lr_iters: usize,
    pub lr_l2: f64,
    pub svm_rate: f64,
    pub svm_iters: usize,
    pub svm_l2: f64,
    pub tree_max_depth: usize,
}

impl Default for MetaParams {
    fn default() -> MetaParams {
        MetaParams {
            knn_k: 5,
            lr_rate: 0.5,
            lr_iters: 400,
            lr_l2: 1e-4,
            svm_rate: 0.1,
            svm_iters: 600,
            svm_l2: 1e-4,
            tree_max_depth: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetaModel {
    NearestNeighbors { k: usize, points: Vec<(f64, f64, u8)> },
    LogisticRegression(LinearModel),
    LinearSvm(LinearModel),
    DecisionTree(Tree),
}

impl MetaModel {
    pub fn kind(&self) -> MetaKind {
        match self {
            MetaModel::NearestNeighbors { .. } => MetaKind::NearestNeighbors,
            MetaModel::LogisticRegression(_) => MetaKind::LogisticRegression,
            MetaModel::LinearSvm(_) => MetaKind::LinearSvm,
            MetaModel::DecisionTree(_) => MetaKind::DecisionTree,
        }
    }

    pub fn predict_proba(&self, pair: (f64, f64)) -> f64 {
        let row = [pair.0, pair.1];
        match self {
            MetaModel::NearestNeighbors { k, points } => knn_proba(*k, points, pair),
            MetaModel::LogisticRegression(m) | MetaModel::LinearSvm(m) => m.proba(&row),
            MetaModel::DecisionTree(t) => t.predict(&row),
        }
    }

    pub fn predict_label(&self, pair: (f64, f64), threshold: f64) -> u8 {
        u8::from(self.predict_proba(pair) >= threshold)
    }
}

fn knn_proba(k: usize, points: &[(f64, f64, u8)], query: (f64, f64)) -> f64 {
    let mut ranked: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (dx, dy) = (p.0 - query.0, p.1 - query.1);
            (dx * dx + dy * dy, i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distance").then(a.1.cmp(&b.1)));
    let votes = ranked[..k].iter().filter(|(_, i)| points[*i].2 == 1).count();
    if 2 * votes == k {
        // even k can deadlock the vote; lean 1/(2k) toward the closest point
        let lean = if points[ranked[0].1].2 == 1 { 1.0 } else { -1.0 };
        0.5 + lean / (2.0 * k as f64)
    } else {
        votes as f64 / k as f64
    }
}

fn validate(base: &[(f64, f64)], y: &[u8]) -> Result<(), MlError> {
    if base.is_empty() {
        return Err(MlError::Empty("meta training set"));
    }
    if base.len() != y.len() {
        return Err(MlError::BadInput(format!("{} pairs against {} labels", base.len(), y.len())));
    }
    for (i, (a, b)) in base.iter().enumerate() {
        if !(0.0..=1.0).contains(a) || !(0.0..=1.0).contains(b) {
            return Err(MlError::BadInput(format!(
                "pair {i} = ({a}, {b}) is not a pair of probabilities"
            )));
        }
    }
    if y.iter().any(|&l| l > 1) {
        return Err(MlError::BadInput("labels must be 0 or 1".into()));
    }
    Ok(())
}

pub fn train_meta_with(
    kind: MetaKind,
    base: &[(f64, f64)],
    y: &[u8],
    params: &MetaParams,
) -> Result<MetaModel, MlError> {
    validate(base, y)?;
    let rows: Vec<Vec<f64>> = base.iter().map(|(a, b)| vec![*a, *b]).collect();
    Ok(match kind {
        MetaKind::NearestNeighbors => {
            if params.knn_k == 0 || params.knn_k > base.len() {
                return Err(MlError::BadInput(format!(
                    "k = {} with {} stored points",
                    params.knn_k,
                    base.len()
                )));
            }
            MetaModel::NearestNeighbors {
                k: params.knn_k,
                points: base.iter().zip(y).map(|(&(a, b), &l)| (a, b, l)).collect(),
            }
        }
        MetaKind::LogisticRegression => MetaModel::LogisticRegression(fit_logistic(
            &rows,
            y,
            params.lr_rate,
            params.lr_iters,
            params.lr_l2,
        )?),
        MetaKind::LinearSvm => MetaModel::LinearSvm(fit_linear_svm(
            &rows,
            y,
            params.svm_rate,
            params.svm_iters,
            params.svm_l2,
        )?),
        MetaKind::DecisionTree => {
            let yf: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
            MetaModel::DecisionTree(Tree::fit(
                &rows,
                &yf,
                TreeConfig { max_depth: params.tree_max_depth, ..Default::default() },
                SplitCriterion::Gini,
                None,
            )?)
        }
    })
}

pub fn train_meta(kind: MetaKind, base: &[(f64, f64)], y: &[u8]) -> Result<MetaModel, MlError> {
    train_meta_with(kind, base, y, &MetaParams::default())
}
