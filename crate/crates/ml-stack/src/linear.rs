//! Linear classifiers: logistic regression trained by full-batch gradient
//! descent on mean log loss, and a linear SVM trained on the hinge
//! subgradient. Both share `LinearModel`; the SVM reports probabilities by
//! squashing its margin through a sigmoid, which keeps every model in the
//! stack speaking the same [0, 1] language even though the SVM itself is
//! not calibrated.
//!
//! The loss and gradient are exposed as free functions so they can be
//! checked against finite differences without touching training.

use crate::nn::sigmoid;
use crate::MlError;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.weights.len());
        self.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}

fn check_shapes(x: &[Vec<f64>], y: &[u8]) -> Result<usize, MlError> {
    if x.is_empty() {
        return Err(MlError::Empty("linear model training set"));
    }
    if x.len() != y.len() {
        return Err(MlError::BadInput(format!("{} rows against {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    if d == 0 {
        return Err(MlError::Empty("feature dimension"));
    }
    if x.iter().any(|r| r.len() != d) {
        return Err(MlError::BadInput("ragged feature rows".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(MlError::BadInput("labels must be 0 or 1".into()));
    }
    Ok(d)
}

/// Mean log loss plus an L2 penalty on the weights (never the bias).
pub fn logistic_loss(x: &[Vec<f64>], y: &[u8], weights: &[f64], bias: f64, l2: f64) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        // log(1 + e^z) - z*y, computed in the stable max form
        total += z.max(0.0) + (-z.abs()).exp().ln_1p() - z * f64::from(label);
    }
    total / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of `logistic_loss` in (weights, bias).
pub fn logistic_gradient(
    x: &[Vec<f64>],
    y: &[u8],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        let err = sigmoid(z) - f64::from(label);
        for (g, v) in gw.iter_mut().zip(row) {
            *g += err * v;
        }
        gb += err;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[u8],
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> Result<LinearModel, MlError> {
    let d = check_shapes(x, y)?;
    let mut model = LinearModel { weights: vec![0.0; d], bias: 0.0 };
    for _ in 0..iterations {
        let (gw, gb) = logistic_gradient(x, y, &model.weights, model.bias, l2);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= learning_rate * g;
        }
        model.bias -= learning_rate * gb;
    }
    Ok(model)
}

/// Hinge-loss subgradient descent on labels mapped to -1/+1. Rows with
/// margin >= 1 contribute nothing, so the update touches only violators.
pub fn fit_linear_svm(
    x: &[Vec<f64>],
    y: &[u8],
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> Result<LinearModel, MlError> {
    let d = check_shapes(x, y)?;
    let signed: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let n = x.len() as f64;
    let mut model = LinearModel { weights: vec![0.0; d], bias: 0.0 };
    for _ in 0..iterations {
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (row, &s) in x.iter().zip(&signed) {
            if s * model.decision(row) < 1.0 {
                for (g, v) in gw.iter_mut().zip(row) {
                    *g -= s * v;
                }
                gb -= s;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= learning_rate * (g / n + l2 * *w);
        }
        model.bias -= learning_rate * (gb / n);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linearly_separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 / 10.0;
                if i % 2 == 0 { vec![t, t + 2.0] } else { vec![t + 2.0, t] }
            })
            .collect();
        let y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        (x, y)
    }

    #[test]
    fn logistic_separates_an_easy_problem() {
        let (x, y) = linearly_separable();
        let m = fit_logistic(&x, &y, 0.5, 400, 0.0).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(u8::from(m.proba(row) >= 0.5), label);
        }
    }

    #[test]
    fn svm_separates_the_same_problem() {
        let (x, y) = linearly_separable();
        let m = fit_linear_svm(&x, &y, 0.1, 600, 1e-4).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(u8::from(m.proba(row) >= 0.5), label);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = vec![vec![0.3, -1.2], vec![1.7, 0.4], vec![-0.5, 0.9], vec![0.0, 2.2]];
        let y = vec![1, 0, 1, 0];
        let w = vec![0.37, -0.81];
        let b = 0.22;
        let l2 = 0.05;
        let (gw, gb) = logistic_gradient(&x, &y, &w, b, l2);
        let h = 1e-6;
        for j in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let fd = (logistic_loss(&x, &y, &wp, b, l2) - logistic_loss(&x, &y, &wm, b, l2))
                / (2.0 * h);
            let rel = (gw[j] - fd).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-6, "w[{j}]: analytic {} vs fd {fd}", gw[j]);
        }
        let fd_b =
            (logistic_loss(&x, &y, &w, b + h, l2) - logistic_loss(&x, &y, &w, b - h, l2)) / (2.0 * h);
        assert!((gb - fd_b).abs() / fd_b.abs().max(1e-12) < 1e-6);
    }

    #[test]
    fn l2_shrinks_weights() {
        let (x, y) = linearly_separable();
        let loose = fit_logistic(&x, &y, 0.5, 400, 0.0).unwrap();
        let tight = fit_logistic(&x, &y, 0.5, 400, 1.0).unwrap();
        let norm = |m: &LinearModel| m.weights.iter().map(|w| w * w).sum::<f64>();
        assert!(norm(&tight) < norm(&loose));
    }

    #[test]
    fn shape_errors_are_reported() {
        assert!(matches!(
            fit_logistic(&[], &[], 0.1, 10, 0.0),
            Err(MlError::Empty(_))
        ));
        let ragged = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(fit_logistic(&ragged, &[0, 1], 0.1, 10, 0.0).is_err());
        assert!(fit_logistic(&[vec![1.0]], &[2], 0.1, 10, 0.0).is_err());
    }
}
