//! Dense-layer primitives used by the encoder: affine maps, row-wise
//! layer normalization, masked row softmax, the smooth GELU activation,
//! and an Adam step over flat parameter slices. Forward functions return
//! whatever the matching backward needs; nothing here allocates state
//! behind the caller's back. All math is f64 so gradient checks can hold
//! tight tolerances.

use ndarray::{Array1, Array2, Axis};

pub const LN_EPS: f64 = 1e-5;

/// Keys at masked columns are invisible: their scores drop low enough
/// that the softmax assigns them exactly zero after max subtraction.
pub const MASK_SCORE: f64 = -1e30;

pub fn linear_fwd(x: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    x.dot(w) + b
}

/// Returns (dx, dw, db).
pub fn linear_bwd(
    x: &Array2<f64>,
    w: &Array2<f64>,
    dy: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array1<f64>) {
    (dy.dot(&w.t()), x.t().dot(dy), dy.sum_axis(Axis(0)))
}

pub struct LnCache {
    pub xhat: Array2<f64>,
    pub istd: Array1<f64>,
}

pub fn layernorm_fwd(
    x: &Array2<f64>,
    gamma: &Array1<f64>,
    beta: &Array1<f64>,
) -> (Array2<f64>, LnCache) {
    let d = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut istd = Array1::zeros(x.nrows());
    for (mut row, is) in xhat.rows_mut().into_iter().zip(istd.iter_mut()) {
        let mu = row.sum() / d;
        row.mapv_inplace(|v| v - mu);
        let var = row.iter().map(|v| v * v).sum::<f64>() / d;
        *is = 1.0 / (var + LN_EPS).sqrt();
        let s = *is;
        row.mapv_inplace(|v| v * s);
    }
    let y = &xhat * gamma + beta;
    (y, LnCache { xhat, istd })
}

/// Returns (dx, dgamma, dbeta).
pub fn layernorm_bwd(
    dy: &Array2<f64>,
    gamma: &Array1<f64>,
    cache: &LnCache,
) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let d = dy.ncols() as f64;
    let dbeta = dy.sum_axis(Axis(0));
    let dgamma = (dy * &cache.xhat).sum_axis(Axis(0));
    let dxhat = dy * gamma;
    let mut dx = Array2::zeros(dy.raw_dim());
    for i in 0..dy.nrows() {
        let xh = cache.xhat.row(i);
        let dxh = dxhat.row(i);
        let m1 = dxh.sum() / d;
        let m2 = dxh.iter().zip(xh.iter()).map(|(a, b)| a * b).sum::<f64>() / d;
        let istd = cache.istd[i];
        for j in 0..dy.ncols() {
            dx[[i, j]] = istd * (dxh[j] - m1 - xh[j] * m2);
        }
    }
    (dx, dgamma, dbeta)
}

/// Row-wise softmax over scores whose masked columns were already set to
/// `MASK_SCORE`. Max subtraction keeps the exponentials finite.
pub fn softmax_rows(scores: &Array2<f64>) -> Array2<f64> {
    let mut a = scores.clone();
    for mut row in a.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    a
}

/// dS = A .* (dA - rowwise(dA . A)); masked entries have A = 0 and thus
/// gradient exactly 0, so the mask needs no special casing here.
pub fn softmax_rows_bwd(a: &Array2<f64>, da: &Array2<f64>) -> Array2<f64> {
    let mut ds = Array2::zeros(a.raw_dim());
    for i in 0..a.nrows() {
        let dot: f64 = a.row(i).iter().zip(da.row(i).iter()).map(|(p, d)| p * d).sum();
        for j in 0..a.ncols() {
            ds[[i, j]] = a[[i, j]] * (da[[i, j]] - dot);
        }
    }
    ds
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

pub fn gelu_prime(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// Numerically stable binary cross entropy on a logit:
/// softplus(z) - z*y, with softplus(z) = max(z,0) + ln(1 + e^-|z|).
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p() - z * y
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// One Adam update over a flat parameter slice. `t` is the 1-based step
/// count shared by all tensors of the model.
#[allow(clippy::too_many_arguments)]
pub fn adam_step(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    let bc1 = 1.0 - beta1.powi(t as i32);
    let bc2 = 1.0 - beta2.powi(t as i32);
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / ((v[i] / bc2).sqrt() + eps);
    }
}
