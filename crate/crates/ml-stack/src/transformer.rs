//! Encoder classifier over tokenized behavioral text.
//!
//! Learned token embeddings plus fixed sinusoidal positions feed a stack
//! of encoder layers (multi-head self-attention, then a feed-forward
//! block, each wrapped in residual + layer normalization). The final
//! states are mean-pooled over real positions and squashed to a single
//! probability. Padding is invisible end to end: PAD columns are masked
//! out of every attention row and PAD rows never enter the pool, so a
//! sequence scores identically no matter how much padding trails it.
//!
//! Backpropagation is written out by hand; `param_vector`,
//! `loss_gradient_vector`, and `mean_loss` exist so tests can hold every
//! single gradient against central finite differences.

use ndarray::{s, Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{
    adam_step, bce_with_logit, gelu, gelu_prime, layernorm_bwd, layernorm_fwd, linear_bwd,
    linear_fwd, sigmoid, softmax_rows, softmax_rows_bwd, LnCache, MASK_SCORE,
};
use crate::vocab::{TokenVocabulary, CLS_ID, PAD_ID};
use crate::MlError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformerConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_len: usize,
    /// Probability of zeroing an activation during training; inference
    /// never drops.
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables
    /// early stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TransformerConfig {
    fn default() -> TransformerConfig {
        TransformerConfig {
            d_model: 64,
            n_heads: 4,
            n_layers: 2,
            d_ff: 128,
            max_len: 512,
            dropout: 0.1,
            learning_rate: 1e-3,
            batch_size: 16,
            max_epochs: 30,
            patience: 3,
            seed: 7,
        }
    }
}

impl TransformerConfig {
    pub fn validate(&self) -> Result<(), MlError> {
        if self.d_model == 0 || self.n_heads == 0 || self.n_layers == 0 || self.d_ff == 0 {
            return Err(MlError::BadInput("transformer dimensions must be positive".into()));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(MlError::BadInput(format!(
                "d_model {} not divisible by {} heads",
                self.d_model, self.n_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(MlError::BadInput(format!("dropout {} not in [0,1)", self.dropout)));
        }
        if self.max_len == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(MlError::BadInput("max_len, batch_size, max_epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct LayerParams {
    wq: Array2<f64>,
    bq: Array1<f64>,
    wk: Array2<f64>,
    bk: Array1<f64>,
    wv: Array2<f64>,
    bv: Array1<f64>,
    wo: Array2<f64>,
    bo: Array1<f64>,
    ln1_g: Array1<f64>,
    ln1_b: Array1<f64>,
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
    ln2_g: Array1<f64>,
    ln2_b: Array1<f64>,
}

#[derive(Debug, Clone)]
struct Params {
    embed: Array2<f64>,
    layers: Vec<LayerParams>,
    head_w: Array1<f64>,
    head_b: f64,
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
}

impl Params {
    fn init(vocab_size: usize, cfg: &TransformerConfig, rng: &mut ChaCha8Rng) -> Params {
        let d = cfg.d_model;
        let layers = (0..cfg.n_layers)
            .map(|_| LayerParams {
                wq: xavier(rng, d, d),
                bq: Array1::zeros(d),
                wk: xavier(rng, d, d),
                bk: Array1::zeros(d),
                wv: xavier(rng, d, d),
                bv: Array1::zeros(d),
                wo: xavier(rng, d, d),
                bo: Array1::zeros(d),
                ln1_g: Array1::ones(d),
                ln1_b: Array1::zeros(d),
                w1: xavier(rng, d, cfg.d_ff),
                b1: Array1::zeros(cfg.d_ff),
                w2: xavier(rng, cfg.d_ff, d),
                b2: Array1::zeros(d),
                ln2_g: Array1::ones(d),
                ln2_b: Array1::zeros(d),
            })
            .collect();
        Params {
            embed: Array2::from_shape_fn((vocab_size, d), |_| rng.random_range(-0.1..0.1)),
            layers,
            head_w: xavier(rng, d, 1).into_shape_with_order(d).expect("column reshape"),
            head_b: 0.0,
        }
    }

    fn zeros_like(other: &Params) -> Params {
        Params {
            embed: Array2::zeros(other.embed.raw_dim()),
            layers: other
                .layers
                .iter()
                .map(|l| LayerParams {
                    wq: Array2::zeros(l.wq.raw_dim()),
                    bq: Array1::zeros(l.bq.raw_dim()),
                    wk: Array2::zeros(l.wk.raw_dim()),
                    bk: Array1::zeros(l.bk.raw_dim()),
                    wv: Array2::zeros(l.wv.raw_dim()),
                    bv: Array1::zeros(l.bv.raw_dim()),
                    wo: Array2::zeros(l.wo.raw_dim()),
                    bo: Array1::zeros(l.bo.raw_dim()),
                    ln1_g: Array1::zeros(l.ln1_g.raw_dim()),
                    ln1_b: Array1::zeros(l.ln1_b.raw_dim()),
                    w1: Array2::zeros(l.w1.raw_dim()),
                    b1: Array1::zeros(l.b1.raw_dim()),
                    w2: Array2::zeros(l.w2.raw_dim()),
                    b2: Array1::zeros(l.b2.raw_dim()),
                    ln2_g: Array1::zeros(l.ln2_g.raw_dim()),
                    ln2_b: Array1::zeros(l.ln2_b.raw_dim()),
                })
                .collect(),
            head_w: Array1::zeros(other.head_w.raw_dim()),
            head_b: 0.0,
        }
    }

    /// Every tensor as a flat slice, in one fixed order. The order is the
    /// contract between weight files, gradient vectors, and the optimizer.
    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> =
            vec![self.embed.as_slice_mut().expect("standard layout")];
        for l in &mut self.layers {
            out.push(l.wq.as_slice_mut().expect("standard layout"));
            out.push(l.bq.as_slice_mut().expect("standard layout"));
            out.push(l.wk.as_slice_mut().expect("standard layout"));
            out.push(l.bk.as_slice_mut().expect("standard layout"));
            out.push(l.wv.as_slice_mut().expect("standard layout"));
            out.push(l.bv.as_slice_mut().expect("standard layout"));
            out.push(l.wo.as_slice_mut().expect("standard layout"));
            out.push(l.bo.as_slice_mut().expect("standard layout"));
            out.push(l.ln1_g.as_slice_mut().expect("standard layout"));
            out.push(l.ln1_b.as_slice_mut().expect("standard layout"));
            out.push(l.w1.as_slice_mut().expect("standard layout"));
            out.push(l.b1.as_slice_mut().expect("standard layout"));
            out.push(l.w2.as_slice_mut().expect("standard layout"));
            out.push(l.b2.as_slice_mut().expect("standard layout"));
            out.push(l.ln2_g.as_slice_mut().expect("standard layout"));
            out.push(l.ln2_b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.head_w.as_slice_mut().expect("standard layout"));
        out.push(std::slice::from_mut(&mut self.head_b));
        out
    }

    fn flatten(&self) -> Vec<f64> {
        let mut me = self.clone();
        let mut out = Vec::new();
        for t in me.tensors_mut() {
            out.extend_from_slice(t);
        }
        out
    }

    fn assign(&mut self, flat: &[f64]) -> Result<(), MlError> {
        let mut offset = 0;
        for t in self.tensors_mut() {
            let next = offset + t.len();
            if next > flat.len() {
                return Err(MlError::BadInput("parameter vector too short".into()));
            }
            t.copy_from_slice(&flat[offset..next]);
            offset = next;
        }
        if offset != flat.len() {
            return Err(MlError::BadInput(format!(
                "parameter vector has {} values, model needs {offset}",
                flat.len()
            )));
        }
        Ok(())
    }
}

/// Trainable parameter count for a shape: the length of `param_vector`
/// and of a bundle's weight file.
pub fn parameter_count(config: &TransformerConfig, vocab_size: usize) -> usize {
    let d = config.d_model;
    let attention = 4 * (d * d + d);
    let norms = 4 * d;
    let ffn = (d * config.d_ff + config.d_ff) + (config.d_ff * d + d);
    vocab_size * d + config.n_layers * (attention + norms + ffn) + d + 1
}

fn sinusoidal_positions(len: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((len, d), |(t, j)| {
        let freq = 10_000f64.powf(-((j - j % 2) as f64) / d as f64);
        let angle = t as f64 * freq;
        if j % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

struct LayerCache {
    x_in: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    att: Vec<Array2<f64>>,
    ctx: Array2<f64>,
    drop1: Option<Array2<f64>>,
    ln1: LnCache,
    y1: Array2<f64>,
    ffn_pre: Array2<f64>,
    ffn_act: Array2<f64>,
    drop2: Option<Array2<f64>>,
    ln2: LnCache,
}

struct SeqCache {
    tokens: Vec<usize>,
    pad: Vec<bool>,
    n_real: f64,
    layers: Vec<LayerCache>,
    final_y: Array2<f64>,
    pooled: Array1<f64>,
    p: f64,
}

#[derive(Debug, Clone)]
pub struct TransformerModel {
    config: TransformerConfig,
    vocab_size: usize,
    vocab_hash: String,
    params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDoc {
    pub text: String,
    pub label: u8,
}

impl TransformerModel {
    pub fn config(&self) -> &TransformerConfig {
        &self.config
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Content hash of the vocabulary the model was trained against.
    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    /// Rebuilds a model from a flat weight vector (the bundle format).
    pub fn from_parts(
        config: TransformerConfig,
        vocab_size: usize,
        vocab_hash: String,
        weights: &[f64],
    ) -> Result<TransformerModel, MlError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = Params::init(vocab_size, &config, &mut rng);
        params.assign(weights)?;
        Ok(TransformerModel { config, vocab_size, vocab_hash, params })
    }

    pub fn param_vector(&self) -> Vec<f64> {
        self.params.flatten()
    }

    pub fn set_param_vector(&mut self, flat: &[f64]) -> Result<(), MlError> {
        self.params.assign(flat)
    }

    /// Deterministic inference probability; dropout is never applied.
    pub fn predict_proba(&self, tokens: &[usize]) -> f64 {
        self.forward(tokens, None).p
    }

    pub fn predict_doc(&self, text: &str, vocab: &TokenVocabulary) -> Result<f64, MlError> {
        if vocab.content_hash() != self.vocab_hash {
            return Err(MlError::Mismatch(
                "vocabulary differs from the one the encoder was trained with".into(),
            ));
        }
        Ok(self.predict_proba(&vocab.encode(text, self.config.max_len)))
    }

    /// Mean binary cross entropy over already-encoded sequences.
    pub fn mean_loss(&self, seqs: &[(Vec<usize>, u8)]) -> f64 {
        let total: f64 = seqs
            .iter()
            .map(|(toks, y)| {
                let cache = self.forward(toks, None);
                let logit = logit_of(&cache, &self.params);
                bce_with_logit(logit, f64::from(*y))
            })
            .sum();
        total / seqs.len().max(1) as f64
    }

    /// Gradient of `mean_loss` for every parameter, flattened in
    /// `param_vector` order. Inference mode: no dropout.
    pub fn loss_gradient_vector(&self, seqs: &[(Vec<usize>, u8)]) -> Vec<f64> {
        let mut grads = Params::zeros_like(&self.params);
        let scale = 1.0 / seqs.len().max(1) as f64;
        for (toks, y) in seqs {
            let cache = self.forward(toks, None);
            self.backward(&cache, f64::from(*y), scale, &mut grads);
        }
        grads.flatten()
    }

    fn forward(&self, tokens: &[usize], mut dropout: Option<&mut ChaCha8Rng>) -> SeqCache {
        let cfg = &self.config;
        let tokens: Vec<usize> = if tokens.iter().any(|&t| t != PAD_ID) {
            tokens.iter().take(cfg.max_len).copied().collect()
        } else {
            vec![CLS_ID]
        };
        let t_len = tokens.len();
        let pad: Vec<bool> = tokens.iter().map(|&t| t == PAD_ID).collect();
        let n_real = pad.iter().filter(|&&p| !p).count() as f64;

        let pe = sinusoidal_positions(t_len, cfg.d_model);
        let mut x = Array2::zeros((t_len, cfg.d_model));
        for (i, &tok) in tokens.iter().enumerate() {
            let row = self.params.embed.row(tok.min(self.vocab_size - 1));
            for j in 0..cfg.d_model {
                x[[i, j]] = row[j] + pe[[i, j]];
            }
        }

        let mut layers = Vec::with_capacity(cfg.n_layers);
        for lp in &self.params.layers {
            let (next, cache) = self.layer_fwd(lp, x, &pad, &mut dropout);
            layers.push(cache);
            x = next;
        }

        let mut pooled = Array1::zeros(cfg.d_model);
        for (i, &is_pad) in pad.iter().enumerate() {
            if !is_pad {
                pooled += &x.row(i);
            }
        }
        pooled.mapv_inplace(|v| v / n_real);
        let logit = pooled.dot(&self.params.head_w) + self.params.head_b;
        SeqCache { tokens, pad, n_real, layers, final_y: x, pooled, p: sigmoid(logit) }
    }

    fn layer_fwd(
        &self,
        lp: &LayerParams,
        x: Array2<f64>,
        pad: &[bool],
        dropout: &mut Option<&mut ChaCha8Rng>,
    ) -> (Array2<f64>, LayerCache) {
        let cfg = &self.config;
        let (d, h) = (cfg.d_model, cfg.n_heads);
        let dk = d / h;
        let scale = 1.0 / (dk as f64).sqrt();

        let q = linear_fwd(&x, &lp.wq, &lp.bq);
        let k = linear_fwd(&x, &lp.wk, &lp.bk);
        let v = linear_fwd(&x, &lp.wv, &lp.bv);

        let t_len = x.nrows();
        let mut ctx = Array2::zeros((t_len, d));
        let mut att = Vec::with_capacity(h);
        for head in 0..h {
            let (lo, hi) = (head * dk, (head + 1) * dk);
            let qh = q.slice(s![.., lo..hi]);
            let kh = k.slice(s![.., lo..hi]);
            let vh = v.slice(s![.., lo..hi]);
            let mut scores = qh.dot(&kh.t());
            scores.mapv_inplace(|s| s * scale);
            for (j, &is_pad) in pad.iter().enumerate() {
                if is_pad {
                    scores.column_mut(j).fill(MASK_SCORE);
                }
            }
            let a = softmax_rows(&scores);
            ctx.slice_mut(s![.., lo..hi]).assign(&a.dot(&vh));
            att.push(a);
        }

        let mut attn_out = linear_fwd(&ctx, &lp.wo, &lp.bo);
        let drop1 = self.apply_dropout(&mut attn_out, dropout);
        let r1 = &x + &attn_out;
        let (y1, ln1) = layernorm_fwd(&r1, &lp.ln1_g, &lp.ln1_b);

        let ffn_pre = linear_fwd(&y1, &lp.w1, &lp.b1);
        let ffn_act = ffn_pre.mapv(gelu);
        let mut ffn_out = linear_fwd(&ffn_act, &lp.w2, &lp.b2);
        let drop2 = self.apply_dropout(&mut ffn_out, dropout);
        let r2 = &y1 + &ffn_out;
        let (y2, ln2) = layernorm_fwd(&r2, &lp.ln2_g, &lp.ln2_b);

        (y2, LayerCache { x_in: x, q, k, v, att, ctx, drop1, ln1, y1, ffn_pre, ffn_act, drop2, ln2 })
    }

    /// Inverted dropout: kept activations scale by 1/(1-p) so inference
    /// needs no correction. Returns the multiplier mask when active.
    fn apply_dropout(
        &self,
        x: &mut Array2<f64>,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> Option<Array2<f64>> {
        let p = self.config.dropout;
        let rng = rng.as_deref_mut()?;
        if p == 0.0 {
            return None;
        }
        let keep = 1.0 / (1.0 - p);
        let mask =
            Array2::from_shape_fn(x.raw_dim(), |_| if rng.random::<f64>() < p { 0.0 } else { keep });
        *x *= &mask;
        Some(mask)
    }

    /// Accumulates `scale * dLoss/dParam` for one sequence into `grads`.
    fn backward(&self, cache: &SeqCache, y: f64, scale: f64, grads: &mut Params) {
        let cfg = &self.config;
        let dlogit = scale * (cache.p - y);

        grads.head_b += dlogit;
        for j in 0..cfg.d_model {
            grads.head_w[j] += dlogit * cache.pooled[j];
        }
        let mut dx = Array2::zeros(cache.final_y.raw_dim());
        for (i, &is_pad) in cache.pad.iter().enumerate() {
            if !is_pad {
                for j in 0..cfg.d_model {
                    dx[[i, j]] = dlogit * self.params.head_w[j] / cache.n_real;
                }
            }
        }

        for (li, lc) in cache.layers.iter().enumerate().rev() {
            dx = self.layer_bwd(&self.params.layers[li], &mut grads.layers[li], lc, dx);
        }

        // positions are constants, so the embedding rows take dx directly
        for (i, &tok) in cache.tokens.iter().enumerate() {
            let tok = tok.min(self.vocab_size - 1);
            for j in 0..cfg.d_model {
                grads.embed[[tok, j]] += dx[[i, j]];
            }
        }
    }

    fn layer_bwd(
        &self,
        lp: &LayerParams,
        lg: &mut LayerParams,
        lc: &LayerCache,
        dy2: Array2<f64>,
    ) -> Array2<f64> {
        let cfg = &self.config;
        let (d, h) = (cfg.d_model, cfg.n_heads);
        let dk = d / h;
        let scale = 1.0 / (dk as f64).sqrt();

        let (dr2, dg2, db2) = layernorm_bwd(&dy2, &lp.ln2_g, &lc.ln2);
        lg.ln2_g += &dg2;
        lg.ln2_b += &db2;

        let mut dffn_out = dr2.clone();
        if let Some(mask) = &lc.drop2 {
            dffn_out *= mask;
        }
        let (dact, dw2, db2f) = linear_bwd(&lc.ffn_act, &lp.w2, &dffn_out);
        lg.w2 += &dw2;
        lg.b2 += &db2f;
        let dpre = &dact * &lc.ffn_pre.mapv(gelu_prime);
        let (dy1_ffn, dw1, db1) = linear_bwd(&lc.y1, &lp.w1, &dpre);
        lg.w1 += &dw1;
        lg.b1 += &db1;
        let dy1 = dr2 + dy1_ffn;

        let (dr1, dg1, db1ln) = layernorm_bwd(&dy1, &lp.ln1_g, &lc.ln1);
        lg.ln1_g += &dg1;
        lg.ln1_b += &db1ln;

        let mut dattn_out = dr1.clone();
        if let Some(mask) = &lc.drop1 {
            dattn_out *= mask;
        }
        let (dctx, dwo, dbo) = linear_bwd(&lc.ctx, &lp.wo, &dattn_out);
        lg.wo += &dwo;
        lg.bo += &dbo;

        let t_len = lc.x_in.nrows();
        let mut dq = Array2::zeros((t_len, d));
        let mut dkm = Array2::zeros((t_len, d));
        let mut dv = Array2::zeros((t_len, d));
        for head in 0..h {
            let (lo, hi) = (head * dk, (head + 1) * dk);
            let a = &lc.att[head];
            let qh = lc.q.slice(s![.., lo..hi]);
            let kh = lc.k.slice(s![.., lo..hi]);
            let vh = lc.v.slice(s![.., lo..hi]);
            let dch = dctx.slice(s![.., lo..hi]);

            let da = dch.dot(&vh.t());
            dv.slice_mut(s![.., lo..hi]).assign(&a.t().dot(&dch));
            let mut ds = softmax_rows_bwd(a, &da);
            ds.mapv_inplace(|v| v * scale);
            dq.slice_mut(s![.., lo..hi]).assign(&ds.dot(&kh));
            dkm.slice_mut(s![.., lo..hi]).assign(&ds.t().dot(&qh));
        }

        let (dx_q, dwq, dbq) = linear_bwd(&lc.x_in, &lp.wq, &dq);
        let (dx_k, dwk, dbk) = linear_bwd(&lc.x_in, &lp.wk, &dkm);
        let (dx_v, dwv, dbv) = linear_bwd(&lc.x_in, &lp.wv, &dv);
        lg.wq += &dwq;
        lg.bq += &dbq;
        lg.wk += &dwk;
        lg.bk += &dbk;
        lg.wv += &dwv;
        lg.bv += &dbv;

        dr1 + dx_q + dx_k + dx_v
    }
}

fn logit_of(cache: &SeqCache, params: &Params) -> f64 {
    cache.pooled.dot(&params.head_w) + params.head_b
}

/// Trains with Adam and early stopping on validation loss; the returned
/// model carries the best-validation weights, not the last ones. Fully
/// reproducible from `config.seed`.
pub fn train_transformer(
    train: &[LabeledDoc],
    valid: &[LabeledDoc],
    vocab: &TokenVocabulary,
    config: &TransformerConfig,
) -> Result<TransformerModel, MlError> {
    config.validate()?;
    if train.is_empty() {
        return Err(MlError::Empty("transformer training set"));
    }
    if valid.is_empty() {
        return Err(MlError::Empty("transformer validation set"));
    }
    let classes: std::collections::BTreeSet<u8> = train.iter().map(|d| d.label).collect();
    if classes.len() < 2 {
        return Err(MlError::SingleClass);
    }

    let encode = |docs: &[LabeledDoc]| -> Vec<(Vec<usize>, u8)> {
        docs.iter().map(|d| (vocab.encode(&d.text, config.max_len), d.label)).collect()
    };
    let train_seq = encode(train);
    let valid_seq = encode(valid);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = TransformerModel {
        config: config.clone(),
        vocab_size: vocab.len(),
        vocab_hash: vocab.content_hash(),
        params: Params::init(vocab.len(), config, &mut rng),
    };
    let mut adam_m = Params::zeros_like(&model.params);
    let mut adam_v = Params::zeros_like(&model.params);
    let mut step: u64 = 0;

    let mut best_loss = f64::INFINITY;
    let mut best_params = model.params.clone();
    let mut epochs_without_improvement = 0usize;

    let mut order: Vec<usize> = (0..train_seq.len()).collect();
    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut grads = Params::zeros_like(&model.params);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (toks, y) = &train_seq[i];
                let cache = model.forward(toks, Some(&mut rng));
                model.backward(&cache, f64::from(*y), scale, &mut grads);
            }
            step += 1;
            let g = grads.tensors_mut();
            let m = adam_m.tensors_mut();
            let v = adam_v.tensors_mut();
            let p = model.params.tensors_mut();
            for (((p, g), m), v) in p.into_iter().zip(g).zip(m).zip(v) {
                adam_step(p, g, m, v, step, config.learning_rate, 0.9, 0.999, 1e-8);
            }
        }

        let val_loss = model.mean_loss(&valid_seq);
        if val_loss < best_loss - 1e-9 {
            best_loss = val_loss;
            best_params = model.params.clone();
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if config.patience > 0 && epochs_without_improvement >= config.patience {
                break;
            }
        }
    }

    model.params = best_params;
    Ok(model)
}
