//! The candidate pool: four classifiers trained on the tabular feature
//! encoding, of which exactly one is promoted into the deployed stack.
//! Selection is argmax validation F1 with a fully deterministic tiebreak
//! chain (higher recall, then lower false-positive rate, then the fixed
//! kind order below, then input position).
//!
//! Degeneracy contracts kept by construction: a forest with one tree, no
//! bootstrap, and no feature subsampling is its decision tree; boosting
//! with one round at shrinkage 1.0 is a single regression tree fit on the
//! initial gradients y - sigmoid(prior logit).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linear::{fit_logistic, LinearModel};
use crate::metrics::{evaluate, EvalReport};
use crate::nn::sigmoid;
use crate::tree::{SplitCriterion, Tree, TreeConfig};
use crate::{MlError, ProbPredictor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CandidateKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    GradientBoosting,
}

impl CandidateKind {
    pub const ALL: [CandidateKind; 4] = [
        CandidateKind::LogisticRegression,
        CandidateKind::DecisionTree,
        CandidateKind::RandomForest,
        CandidateKind::GradientBoosting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CandidateKind::LogisticRegression => "logistic_regression",
            CandidateKind::DecisionTree => "decision_tree",
            CandidateKind::RandomForest => "random_forest",
            CandidateKind::GradientBoosting => "gradient_boosting",
        }
    }

    pub fn parse(s: &str) -> Option<CandidateKind> {
        CandidateKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateHyperparams {
    pub lr_rate: f64,
    pub lr_iters: usize,
    pub lr_l2: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    pub rf_trees: usize,
    pub rf_bootstrap: bool,
    pub rf_feature_subsample: Option<usize>,
    pub gbt_rounds: usize,
    pub gbt_shrinkage: f64,
    pub gbt_max_depth: usize,
    pub seed: u64,
}

impl Default for CandidateHyperparams {
    fn default() -> CandidateHyperparams {
        CandidateHyperparams {
            lr_rate: 0.3,
            lr_iters: 300,
            lr_l2: 1e-4,
            tree_max_depth: 6,
            tree_min_leaf: 2,
            rf_trees: 40,
            rf_bootstrap: true,
            rf_feature_subsample: None,
            gbt_rounds: 60,
            gbt_shrinkage: 0.1,
            gbt_max_depth: 3,
            seed: 7,
        }
    }
}

impl CandidateHyperparams {
    fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            max_depth: self.tree_max_depth,
            min_samples_split: (2 * self.tree_min_leaf).max(2),
            min_samples_leaf: self.tree_min_leaf.max(1),
        }
    }

    fn boost_config(&self) -> TreeConfig {
        TreeConfig { max_depth: self.gbt_max_depth, min_samples_split: 2, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boost {
    pub init_logit: f64,
    pub shrinkage: f64,
    pub trees: Vec<Tree>,
}

impl Boost {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.init_logit + self.shrinkage * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateModel {
    LogisticRegression(LinearModel),
    DecisionTree(Tree),
    RandomForest(Forest),
    GradientBoosting(Boost),
}

impl CandidateModel {
    pub fn kind(&self) -> CandidateKind {
        match self {
            CandidateModel::LogisticRegression(_) => CandidateKind::LogisticRegression,
            CandidateModel::DecisionTree(_) => CandidateKind::DecisionTree,
            CandidateModel::RandomForest(_) => CandidateKind::RandomForest,
            CandidateModel::GradientBoosting(_) => CandidateKind::GradientBoosting,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            CandidateModel::LogisticRegression(m) => m.weights.len(),
            CandidateModel::DecisionTree(t) => t.n_features(),
            CandidateModel::RandomForest(f) => f.trees[0].n_features(),
            CandidateModel::GradientBoosting(b) => b.trees[0].n_features(),
        }
    }
}

impl ProbPredictor for CandidateModel {
    fn predict_proba(&self, row: &[f64]) -> f64 {
        match self {
            CandidateModel::LogisticRegression(m) => m.proba(row),
            CandidateModel::DecisionTree(t) => t.predict(row),
            CandidateModel::RandomForest(f) => f.proba(row),
            CandidateModel::GradientBoosting(b) => b.proba(row),
        }
    }
}

fn check_training_set(x: &[Vec<f64>], y: &[u8]) -> Result<(), MlError> {
    if x.is_empty() {
        return Err(MlError::Empty("candidate training set"));
    }
    if x.len() != y.len() {
        return Err(MlError::BadInput(format!("{} rows against {} labels", x.len(), y.len())));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(MlError::SingleClass);
    }
    Ok(())
}

fn fit_forest(
    x: &[Vec<f64>],
    y: &[f64],
    hp: &CandidateHyperparams,
) -> Result<Forest, MlError> {
    if hp.rf_trees == 0 {
        return Err(MlError::BadInput("forest needs at least one tree".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut trees = Vec::with_capacity(hp.rf_trees);
    for _ in 0..hp.rf_trees {
        let tree = if hp.rf_bootstrap {
            let idx: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
            let xb: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
            let yb: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            Tree::fit(
                &xb,
                &yb,
                hp.tree_config(),
                SplitCriterion::Gini,
                hp.rf_feature_subsample.map(|m| (m, &mut rng)),
            )?
        } else {
            Tree::fit(
                x,
                y,
                hp.tree_config(),
                SplitCriterion::Gini,
                hp.rf_feature_subsample.map(|m| (m, &mut rng)),
            )?
        };
        trees.push(tree);
    }
    Ok(Forest { trees })
}

fn fit_boost(x: &[Vec<f64>], y: &[f64], hp: &CandidateHyperparams) -> Result<Boost, MlError> {
    if hp.gbt_rounds == 0 {
        return Err(MlError::BadInput("boosting needs at least one round".into()));
    }
    let prior = (y.iter().sum::<f64>() / y.len() as f64).clamp(1e-6, 1.0 - 1e-6);
    let init_logit = (prior / (1.0 - prior)).ln();
    let mut scores = vec![init_logit; y.len()];
    let mut trees = Vec::with_capacity(hp.gbt_rounds);
    for _ in 0..hp.gbt_rounds {
        let residuals: Vec<f64> =
            y.iter().zip(&scores).map(|(t, s)| t - sigmoid(*s)).collect();
        let tree = Tree::fit(x, &residuals, hp.boost_config(), SplitCriterion::Variance, None)?;
        for (s, row) in scores.iter_mut().zip(x) {
            *s += hp.gbt_shrinkage * tree.predict(row);
        }
        trees.push(tree);
    }
    Ok(Boost { init_logit, shrinkage: hp.gbt_shrinkage, trees })
}

pub fn train_candidate(
    kind: CandidateKind,
    x: &[Vec<f64>],
    y: &[u8],
    hp: &CandidateHyperparams,
) -> Result<CandidateModel, MlError> {
    check_training_set(x, y)?;
    let yf: Vec<f64> = y.iter().map(|&l| f64::from(l)).collect();
    Ok(match kind {
        CandidateKind::LogisticRegression => CandidateModel::LogisticRegression(fit_logistic(
            x,
            y,
            hp.lr_rate,
            hp.lr_iters,
            hp.lr_l2,
        )?),
        CandidateKind::DecisionTree => CandidateModel::DecisionTree(Tree::fit(
            x,
            &yf,
            hp.tree_config(),
            SplitCriterion::Gini,
            None,
        )?),
        CandidateKind::RandomForest => CandidateModel::RandomForest(fit_forest(x, &yf, hp)?),
        CandidateKind::GradientBoosting => CandidateModel::GradientBoosting(fit_boost(x, &yf, hp)?),
    })
}

/// Scores every model on the validation slice at threshold 0.5 and returns
/// the winning index plus every report, so callers can log the full table.
pub fn select_candidate(
    models: &[CandidateModel],
    x: &[Vec<f64>],
    y: &[u8],
) -> Result<(usize, Vec<EvalReport>), MlError> {
    if models.is_empty() {
        return Err(MlError::Empty("candidate pool"));
    }
    let mut reports = Vec::with_capacity(models.len());
    for model in models {
        let preds: Vec<f64> = x.iter().map(|r| model.predict_proba(r)).collect();
        reports.push(evaluate(&preds, y, 0.5)?);
    }
    let mut best = 0;
    for i in 1..models.len() {
        let (a, b) = (&reports[i], &reports[best]);
        let ordering = a
            .f1
            .partial_cmp(&b.f1)
            .expect("finite f1")
            .then(a.recall.partial_cmp(&b.recall).expect("finite recall"))
            .then(b.fpr.partial_cmp(&a.fpr).expect("finite fpr"))
            .then(models[best].kind().cmp(&models[i].kind()));
        if ordering == std::cmp::Ordering::Greater {
            best = i;
        }
    }
    Ok((best, reports))
}
