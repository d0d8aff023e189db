//! Central-difference verification of the analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{init_model, loss_and_grads, Dropout, ModelConfig, ModelParams};
use crate::corpus::Label;
use crate::encode::EncodedInstance;
use crate::tensor::Matrix;
use crate::Result;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// Denominator floor for the relative error, so that two gradients which
/// are both numerically zero do not divide round-off by round-off.
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub entries: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
}

impl TensorCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < TOLERANCE
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Perturbs every entry of every tensor by ±`step` and compares the
/// difference quotient of the batch loss with the backpropagated gradient.
pub fn gradient_check(
    batch: &[&EncodedInstance],
    params: &ModelParams,
    config: &ModelConfig,
    dropout: Dropout,
    step: f64,
) -> Result<Vec<TensorCheck>> {
    let (_, analytic) = loss_and_grads(batch, params, config, dropout)?;
    let names: Vec<String> = params.named().into_iter().map(|(n, _)| n).collect();
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(names.len());
    for (t, name) in names.into_iter().enumerate() {
        let grad = analytic.tensors()[t].clone();
        let mut check = TensorCheck {
            name,
            entries: grad.data().len(),
            max_abs_error: 0.0,
            max_rel_error: 0.0,
        };
        for e in 0..grad.data().len() {
            let original = probe.tensors()[t].data()[e];
            probe.tensors_mut()[t].data_mut()[e] = original + step;
            let (plus, _) = loss_and_grads(batch, &probe, config, dropout)?;
            probe.tensors_mut()[t].data_mut()[e] = original - step;
            let (minus, _) = loss_and_grads(batch, &probe, config, dropout)?;
            probe.tensors_mut()[t].data_mut()[e] = original;

            let numeric = (plus - minus) / (2.0 * step);
            let a = grad.data()[e];
            check.max_abs_error = check.max_abs_error.max((a - numeric).abs());
            check.max_rel_error = check.max_rel_error.max(relative_error(a, numeric));
        }
        out.push(check);
    }
    Ok(out)
}

/// The small reference network: max_len 12, width 15, two channels, one
/// window of 3, four filters, keep probability 0.5.
pub fn reference_config() -> ModelConfig {
    ModelConfig {
        windows: vec![3],
        filters_per_window: 4,
        max_len: 12,
        keep_prob: 0.5,
        channels: 2,
        input_dim: 15,
        fine_tune_embeddings: false,
        seed: 42,
    }
}

/// Random dense instances for the reference network. Lengths cover a full
/// sentence, a padded one, and one shorter than the window.
pub fn reference_batch(config: &ModelConfig, seed: u64) -> Vec<EncodedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths = [config.max_len, config.max_len / 2 + 1, 2];
    lengths
        .iter()
        .enumerate()
        .map(|(i, &valid)| {
            let channels = (0..config.channels)
                .map(|_| {
                    let mut m = Matrix::zeros(config.max_len, config.input_dim);
                    for v in &mut m.data_mut()[..valid * config.input_dim] {
                        *v = rng.gen_range(-1.0..1.0);
                    }
                    m
                })
                .collect();
            let label = if i % 2 == 0 { Label::Ppi } else { Label::Other };
            EncodedInstance::dense(format!("ref{}", i), label, channels, valid)
                .expect("shapes are consistent")
        })
        .collect()
}

/// Reference model with randomized biases so ReLU gates are mixed.
pub fn reference_setup(seed: u64) -> Result<(ModelConfig, ModelParams, Vec<EncodedInstance>)> {
    let config = reference_config();
    let mut params = init_model(&config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for w in &mut params.windows {
        for b in w.bias.data_mut() {
            *b = rng.gen_range(-0.2..0.2);
        }
    }
    for b in params.fc_b.data_mut() {
        *b = rng.gen_range(-0.2..0.2);
    }
    let batch = reference_batch(&config, seed.wrapping_add(1));
    Ok((config, params, batch))
}
