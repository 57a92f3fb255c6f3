//! Permutation importance: how much a metric drops when one feature
//! column is shuffled, averaged over seeded repeats. The model is never
//! retrained, so this measures what the fitted model actually leans on.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::{evaluate, EvalReport};
use crate::{MlError, ProbPredictor};

pub fn permutation_importance(
    model: &dyn ProbPredictor,
    x: &[Vec<f64>],
    y: &[u8],
    metric: &dyn Fn(&EvalReport) -> f64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>, MlError> {
    if repeats == 0 {
        return Err(MlError::BadInput("importance needs at least one repeat".into()));
    }
    if x.is_empty() {
        return Err(MlError::Empty("importance evaluation set"));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(MlError::BadInput("ragged feature rows".into()));
    }

    let score = |rows: &[Vec<f64>]| -> Result<f64, MlError> {
        let preds: Vec<f64> = rows.iter().map(|r| model.predict_proba(r)).collect();
        Ok(metric(&evaluate(&preds, y, 0.5)?))
    };
    let baseline = score(x)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work: Vec<Vec<f64>> = x.to_vec();
    let mut importances = vec![0.0; d];
    for (feature, slot) in importances.iter_mut().enumerate() {
        let original: Vec<f64> = x.iter().map(|r| r[feature]).collect();
        let mut total_drop = 0.0;
        for _ in 0..repeats {
            let mut order: Vec<usize> = (0..x.len()).collect();
            order.shuffle(&mut rng);
            for (row, &src) in work.iter_mut().zip(&order) {
                row[feature] = original[src];
            }
            total_drop += baseline - score(&work)?;
        }
        for (row, v) in work.iter_mut().zip(&original) {
            row[feature] = *v;
        }
        *slot = total_drop / repeats as f64;
    }
    Ok(importances)
}
