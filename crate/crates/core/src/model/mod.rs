//! The classifier: per-window multichannel convolution, 1-max pooling,
//! concatenation in ascending window order, dropout, and a two-way softmax.

pub mod gradcheck;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::encode::{EncodedInstance, DEFAULT_MAX_LEN};
use crate::tensor::{
    conv_backward, conv_forward, dropout_forward, fc_backward, fc_forward, max_pool,
    max_pool_backward, relu_backward, softmax, xavier_init_with, Matrix, Mode,
};
use crate::{Error, Result};

pub const CLASSES: usize = 2;

/// SplitMix64 over `base` and each part; used to give every dropout mask and
/// shuffle its own stream.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(p).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub windows: Vec<usize>,
    pub filters_per_window: usize,
    pub max_len: usize,
    pub keep_prob: f64,
    pub channels: usize,
    /// Token row width; 351 with the default schema.
    pub input_dim: usize,
    pub fine_tune_embeddings: bool,
    /// Initialization seed.
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(input_dim: usize) -> Self {
        ModelConfig {
            windows: vec![3],
            filters_per_window: 400,
            max_len: DEFAULT_MAX_LEN,
            keep_prob: 0.5,
            channels: 2,
            input_dim,
            fine_tune_embeddings: false,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.windows.is_empty() {
            return bad("at least one window size is required".into());
        }
        if let Some(k) = self.windows.iter().find(|&&k| k == 0 || k > self.max_len) {
            return bad(format!("window {} outside 1..={}", k, self.max_len));
        }
        if self.filters_per_window == 0 {
            return bad("filters per window must be positive".into());
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return bad(format!(
                "keep probability {} outside (0, 1]",
                self.keep_prob
            ));
        }
        if self.channels == 0 || self.channels > 2 {
            return bad(format!("channel count {} must be 1 or 2", self.channels));
        }
        if self.input_dim == 0 {
            return bad("input dimension must be positive".into());
        }
        Ok(())
    }

    /// Window sizes in concatenation order.
    pub fn sorted_windows(&self) -> Vec<usize> {
        let mut w = self.windows.clone();
        w.sort_unstable();
        w
    }

    pub fn pooled_len(&self) -> usize {
        self.windows.len() * self.filters_per_window
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowParams {
    pub k: usize,
    /// One `(k*d) x F` bank per channel.
    pub filters: Vec<Matrix>,
    /// `1 x F`, shared across channels.
    pub bias: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub windows: Vec<WindowParams>,
    /// `2 x (F * |windows|)`
    pub fc_w: Matrix,
    /// `1 x 2`
    pub fc_b: Matrix,
    /// Trainable copy of the embedding table when fine-tuning.
    pub embeddings: Option<Matrix>,
}

impl ModelParams {
    /// Named tensors in a fixed order (checkpoints and the optimizer rely on it).
    pub fn named(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::new();
        for w in &self.windows {
            for (c, f) in w.filters.iter().enumerate() {
                out.push((format!("conv{}.ch{}.w", w.k, c + 1), f));
            }
            out.push((format!("conv{}.b", w.k), &w.bias));
        }
        out.push(("fc.w".into(), &self.fc_w));
        out.push(("fc.b".into(), &self.fc_b));
        if let Some(e) = &self.embeddings {
            out.push(("embeddings".into(), e));
        }
        out
    }

    pub fn tensors(&self) -> Vec<&Matrix> {
        self.named().into_iter().map(|(_, m)| m).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        for w in &mut self.windows {
            out.extend(w.filters.iter_mut());
            out.push(&mut w.bias);
        }
        out.push(&mut self.fc_w);
        out.push(&mut self.fc_b);
        if let Some(e) = &mut self.embeddings {
            out.push(e);
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data().len()).sum()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, t) in self.named() {
            t.check_finite(&name)?;
        }
        Ok(())
    }

    /// Fails unless every tensor has the shape `config` implies.
    pub fn check_shapes(&self, config: &ModelConfig) -> Result<()> {
        let windows = config.sorted_windows();
        if self.windows.len() != windows.len() {
            return Err(Error::Shape(
                "window count differs from configuration".into(),
            ));
        }
        let f = config.filters_per_window;
        for (w, &k) in self.windows.iter().zip(&windows) {
            if w.k != k || w.filters.len() != config.channels {
                return Err(Error::Shape(format!(
                    "window {} does not match configuration",
                    w.k
                )));
            }
            for bank in &w.filters {
                bank.expect_shape((k * config.input_dim, f), "filter bank")?;
            }
            w.bias.expect_shape((1, f), "filter bias")?;
        }
        self.fc_w
            .expect_shape((CLASSES, config.pooled_len()), "fc weights")?;
        self.fc_b.expect_shape((1, CLASSES), "fc bias")?;
        if config.fine_tune_embeddings != self.embeddings.is_some() {
            return Err(Error::Shape(
                "embedding table presence differs from configuration".into(),
            ));
        }
        Ok(())
    }
}

/// Xavier-initialized weights and zero biases, deterministic per seed.
pub fn init_model(config: &ModelConfig, seed: u64) -> Result<ModelParams> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = config.filters_per_window;
    let windows = config
        .sorted_windows()
        .into_iter()
        .map(|k| WindowParams {
            k,
            filters: (0..config.channels)
                .map(|_| xavier_init_with(k * config.input_dim, f, &mut rng))
                .collect(),
            bias: Matrix::zeros(1, f),
        })
        .collect();
    Ok(ModelParams {
        windows,
        fc_w: xavier_init_with(CLASSES, config.pooled_len(), &mut rng),
        fc_b: Matrix::zeros(1, CLASSES),
        embeddings: None,
    })
}

/// Initializes and, when fine-tuning, attaches a trainable copy of `table`.
pub fn init_model_with_embeddings(
    config: &ModelConfig,
    seed: u64,
    table: &Matrix,
) -> Result<ModelParams> {
    let mut params = init_model(config, seed)?;
    if config.fine_tune_embeddings {
        params.embeddings = Some(table.clone());
    }
    Ok(params)
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Vec<Matrix>,
    pub conv: Vec<Matrix>,
    pub argmax: Vec<Vec<usize>>,
    pub pooled: Vec<f64>,
    pub mask: Vec<f64>,
    pub dropped: Vec<f64>,
    pub logits: Vec<f64>,
}

fn check_instance(inst: &EncodedInstance, config: &ModelConfig) -> Result<()> {
    if inst.dim != config.input_dim {
        return Err(Error::Shape(format!(
            "instance {} has width {}, model expects {}",
            inst.instance_id, inst.dim, config.input_dim
        )));
    }
    if inst.channel_count() < config.channels {
        return Err(Error::Shape(format!(
            "instance {} has {} channels, model needs {}",
            inst.instance_id,
            inst.channel_count(),
            config.channels
        )));
    }
    Ok(())
}

/// Returns `[p(PPI), p(OTHER)]` and the cache for [`backward`].
pub fn forward(
    inst: &EncodedInstance,
    params: &ModelParams,
    config: &ModelConfig,
    mode: Mode,
) -> Result<(Vec<f64>, ForwardCache)> {
    check_instance(inst, config)?;
    let inputs: Vec<Matrix> = (0..config.channels)
        .map(|c| inst.channel(c, params.embeddings.as_ref()))
        .collect();
    let refs: Vec<&Matrix> = inputs.iter().collect();

    let mut conv = Vec::with_capacity(params.windows.len());
    let mut argmax = Vec::with_capacity(params.windows.len());
    let mut pooled = Vec::with_capacity(config.pooled_len());
    for w in &params.windows {
        let out = conv_forward(&refs, &w.filters, w.bias.data(), w.k, inst.valid_len)?;
        let (m, arg) = max_pool(&out);
        pooled.extend(m);
        argmax.push(arg);
        conv.push(out);
    }

    let (dropped, mask) = dropout_forward(&pooled, config.keep_prob, mode);
    let logits = fc_forward(&dropped, &params.fc_w, params.fc_b.data())?;
    let probs = softmax(&logits);
    Ok((
        probs,
        ForwardCache {
            inputs,
            conv,
            argmax,
            pooled,
            mask,
            dropped,
            logits,
        },
    ))
}

/// Accumulates into `grads` the gradient of a loss whose derivative with
/// respect to the logits is `d_logits`.
pub fn backward(
    inst: &EncodedInstance,
    params: &ModelParams,
    cache: &ForwardCache,
    d_logits: &[f64],
    grads: &mut ModelParams,
) -> Result<()> {
    let d_dropped = fc_backward(
        &cache.dropped,
        &params.fc_w,
        d_logits,
        &mut grads.fc_w,
        grads.fc_b.data_mut(),
    );
    let d_pooled: Vec<f64> = d_dropped
        .iter()
        .zip(&cache.mask)
        .map(|(g, m)| g * m)
        .collect();

    let refs: Vec<&Matrix> = cache.inputs.iter().collect();
    let mut d_inputs: Option<Vec<Matrix>> = params
        .embeddings
        .as_ref()
        .map(|_| cache.inputs.iter().map(Matrix::zeros_like).collect());

    let mut offset = 0;
    for (wi, w) in params.windows.iter().enumerate() {
        let f = w.bias.cols();
        let conv = &cache.conv[wi];
        let d_conv = max_pool_backward(
            &d_pooled[offset..offset + f],
            &cache.argmax[wi],
            conv.rows(),
        );
        let d_pre = relu_backward(conv, &d_conv);
        let gw = &mut grads.windows[wi];
        conv_backward(
            &refs,
            &w.filters,
            &d_pre,
            w.k,
            inst.valid_len,
            &mut gw.filters,
            gw.bias.data_mut(),
            d_inputs.as_deref_mut(),
        )?;
        offset += f;
    }

    if let (Some(d_in), Some(d_emb)) = (d_inputs, grads.embeddings.as_mut()) {
        let word_dim = d_emb.cols();
        for (c, dx) in d_in.iter().enumerate() {
            let rows = inst.word_rows(c).ok_or_else(|| {
                Error::Config("embedding fine-tuning needs corpus-encoded instances".into())
            })?;
            for (r, word) in rows.into_iter().enumerate() {
                for (g, v) in d_emb.row_mut(word).iter_mut().zip(&dx.row(r)[..word_dim]) {
                    *g += v;
                }
            }
        }
    }
    Ok(())
}

/// How dropout behaves over a batch: per-instance masks derived from a seed,
/// or inference mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dropout {
    Seeded(u64),
    Off,
}

impl Dropout {
    pub fn mode(self, index: usize) -> Mode {
        match self {
            Dropout::Seeded(s) => Mode::Train {
                seed: derive_seed(s, &[index as u64]),
            },
            Dropout::Off => Mode::Infer,
        }
    }
}

/// Mean negative log-likelihood of the gold labels and its exact gradient.
pub fn loss_and_grads(
    batch: &[&EncodedInstance],
    params: &ModelParams,
    config: &ModelConfig,
    dropout: Dropout,
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::Config("empty batch".into()));
    }
    let n = batch.len() as f64;
    let mut grads = params.zeros_like();
    let mut total = 0.0;
    for (j, inst) in batch.iter().enumerate() {
        let (probs, cache) = forward(inst, params, config, dropout.mode(j))?;
        let gold = inst.label.index();
        let max = cache
            .logits
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lse = max
            + cache
                .logits
                .iter()
                .map(|z| (z - max).exp())
                .sum::<f64>()
                .ln();
        let loss = lse - cache.logits[gold];
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss of instance {}",
                inst.instance_id
            )));
        }
        total += loss;
        let d_logits: Vec<f64> = probs
            .iter()
            .enumerate()
            .map(|(c, p)| (p - if c == gold { 1.0 } else { 0.0 }) / n)
            .collect();
        backward(inst, params, &cache, &d_logits, &mut grads)?;
    }
    Ok((total / n, grads))
}

pub fn probabilities(
    inst: &EncodedInstance,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<Vec<f64>> {
    Ok(forward(inst, params, config, Mode::Infer)?.0)
}

/// PPI only when strictly more likely than OTHER.
pub fn label_from_probs(probs: &[f64]) -> Label {
    if probs[Label::Ppi.index()] > probs[Label::Other.index()] {
        Label::Ppi
    } else {
        Label::Other
    }
}

pub fn predict(
    inst: &EncodedInstance,
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<Label> {
    Ok(label_from_probs(&probabilities(inst, params, config)?))
}
