use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active; the mask is drawn from a generator seeded with `seed`.
    Train {
        seed: u64,
    },
    Infer,
}

/// Glorot uniform: U(-L, L) with L = sqrt(6 / (rows + cols)).
pub fn xavier_init(rows: usize, cols: usize, seed: u64) -> Matrix {
    xavier_init_with(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn xavier_init_with<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-limit..=limit))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("length matches by construction")
}

/// Number of window positions scored for a sentence of `valid_len` tokens.
///
/// Only windows that fit inside the real tokens are scored; a sentence
/// shorter than the window gets a single, zero-padded position.
pub fn conv_positions(valid_len: usize, k: usize) -> usize {
    if valid_len >= k {
        valid_len - k + 1
    } else {
        1
    }
}

fn check_conv_shapes(
    channels: &[&Matrix],
    filters: &[Matrix],
    bias: &[f64],
    k: usize,
    valid_len: usize,
) -> Result<usize> {
    if channels.is_empty() || channels.len() != filters.len() {
        return Err(Error::Shape(format!(
            "{} channels but {} filter banks",
            channels.len(),
            filters.len()
        )));
    }
    if k == 0 || valid_len == 0 {
        return Err(Error::Shape(
            "window and valid length must be positive".into(),
        ));
    }
    let (max_len, d) = channels[0].shape();
    if valid_len > max_len {
        return Err(Error::Shape(format!(
            "valid length {} exceeds {} rows",
            valid_len, max_len
        )));
    }
    for (c, (x, w)) in channels.iter().zip(filters).enumerate() {
        x.expect_shape((max_len, d), &format!("channel {}", c))?;
        w.expect_shape((k * d, bias.len()), &format!("filter bank {}", c))?;
    }
    Ok(d)
}

/// Multichannel 1-D convolution followed by ReLU.
///
/// Output row `i`, column `f` is
/// `relu(bias[f] + sum_c <filters[c][:, f], vec(channels[c][i..i+k])>)`,
/// where rows at or beyond `valid_len` read as zero. Filters are laid out
/// `(k*d) x F` with window row `j`, feature `e` at row `j*d + e`.
pub fn conv_forward(
    channels: &[&Matrix],
    filters: &[Matrix],
    bias: &[f64],
    k: usize,
    valid_len: usize,
) -> Result<Matrix> {
    let d = check_conv_shapes(channels, filters, bias, k, valid_len)?;
    let positions = conv_positions(valid_len, k);
    let n_filters = bias.len();
    let mut out = Matrix::zeros(positions, n_filters);
    for i in 0..positions {
        let acc = out.row_mut(i);
        acc.copy_from_slice(bias);
        for (x, w) in channels.iter().zip(filters) {
            for j in 0..k {
                let r = i + j;
                if r >= valid_len {
                    break;
                }
                for (e, &xv) in x.row(r).iter().enumerate() {
                    if xv == 0.0 {
                        continue;
                    }
                    for (a, &wv) in acc.iter_mut().zip(w.row(j * d + e)) {
                        *a += xv * wv;
                    }
                }
            }
        }
        for a in acc.iter_mut() {
            *a = a.max(0.0);
        }
    }
    Ok(out)
}

/// Gates an upstream gradient by the ReLU output: zero wherever the
/// activation was not positive.
pub fn relu_backward(activations: &Matrix, grad: &Matrix) -> Matrix {
    let mut out = grad.clone();
    for (g, a) in out.data_mut().iter_mut().zip(activations.data()) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

/// Accumulates gradients of a convolution given `d_pre`, the gradient with
/// respect to its pre-activation output (`positions x F`).
#[allow(clippy::too_many_arguments)]
pub fn conv_backward(
    channels: &[&Matrix],
    filters: &[Matrix],
    d_pre: &Matrix,
    k: usize,
    valid_len: usize,
    d_filters: &mut [Matrix],
    d_bias: &mut [f64],
    mut d_inputs: Option<&mut [Matrix]>,
) -> Result<()> {
    let d = check_conv_shapes(channels, filters, d_bias, k, valid_len)?;
    let positions = conv_positions(valid_len, k);
    d_pre.expect_shape((positions, d_bias.len()), "conv output gradient")?;
    for (c, w) in filters.iter().enumerate() {
        d_filters[c].expect_shape(w.shape(), "filter gradient")?;
    }
    for i in 0..positions {
        let g = d_pre.row(i);
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        for (b, gv) in d_bias.iter_mut().zip(g) {
            *b += gv;
        }
        for (c, x) in channels.iter().enumerate() {
            for j in 0..k {
                let r = i + j;
                if r >= valid_len {
                    break;
                }
                for (e, &xv) in x.row(r).iter().enumerate() {
                    if xv == 0.0 {
                        continue;
                    }
                    for (dw, gv) in d_filters[c].row_mut(j * d + e).iter_mut().zip(g) {
                        *dw += xv * gv;
                    }
                }
                if let Some(d_in) = d_inputs.as_deref_mut() {
                    let w = &filters[c];
                    let dx = d_in[c].row_mut(r);
                    for (e, dxe) in dx.iter_mut().enumerate() {
                        *dxe += w
                            .row(j * d + e)
                            .iter()
                            .zip(g)
                            .map(|(a, b)| a * b)
                            .sum::<f64>();
                    }
                }
            }
        }
    }
    Ok(())
}

/// Column-wise maximum with the winning row; ties go to the smallest row.
pub fn max_pool(x: &Matrix) -> (Vec<f64>, Vec<usize>) {
    assert!(x.rows() >= 1, "max_pool needs at least one position");
    let mut best = x.row(0).to_vec();
    let mut arg = vec![0; x.cols()];
    for i in 1..x.rows() {
        for (f, &v) in x.row(i).iter().enumerate() {
            if v > best[f] {
                best[f] = v;
                arg[f] = i;
            }
        }
    }
    (best, arg)
}

/// Routes each pooled gradient back to its argmax row.
pub fn max_pool_backward(grad: &[f64], argmax: &[usize], positions: usize) -> Matrix {
    let mut out = Matrix::zeros(positions, grad.len());
    for (f, (&g, &i)) in grad.iter().zip(argmax).enumerate() {
        out.set(i, f, g);
    }
    out
}

/// Inverted dropout. Returns the output and the per-component multiplier
/// (0 or 1/keep_prob in train mode, 1 at inference).
pub fn dropout_forward(x: &[f64], keep_prob: f64, mode: Mode) -> (Vec<f64>, Vec<f64>) {
    assert!(
        keep_prob > 0.0 && keep_prob <= 1.0,
        "keep probability must lie in (0, 1]"
    );
    let mask: Vec<f64> = match mode {
        Mode::Infer => vec![1.0; x.len()],
        Mode::Train { .. } if keep_prob == 1.0 => vec![1.0; x.len()],
        Mode::Train { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 1.0 / keep_prob;
            (0..x.len())
                .map(|_| {
                    if rng.gen::<f64>() < keep_prob {
                        scale
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    let out = x.iter().zip(&mask).map(|(a, m)| a * m).collect();
    (out, mask)
}

/// `W·m + b` for `W` of shape `(outputs x |m|)`.
pub fn fc_forward(m: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    w.expect_shape((b.len(), m.len()), "fully connected weights")?;
    Ok((0..w.rows())
        .map(|o| b[o] + w.row(o).iter().zip(m).map(|(a, x)| a * x).sum::<f64>())
        .collect())
}

/// Accumulates weight and bias gradients; returns the gradient w.r.t. `m`.
pub fn fc_backward(
    m: &[f64],
    w: &Matrix,
    d_logits: &[f64],
    d_w: &mut Matrix,
    d_b: &mut [f64],
) -> Vec<f64> {
    let mut d_m = vec![0.0; m.len()];
    for (o, &g) in d_logits.iter().enumerate() {
        d_b[o] += g;
        for (dw, x) in d_w.row_mut(o).iter_mut().zip(m) {
            *dw += g * x;
        }
        for (dm, wv) in d_m.iter_mut().zip(w.row(o)) {
            *dm += g * wv;
        }
    }
    d_m
}

/// Softmax with max subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn fc_softmax_forward(m: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(softmax(&fc_forward(m, w, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn xavier_bounds_and_determinism() {
        let m = xavier_init(100, 100, 3);
        let limit = (6.0f64 / 200.0).sqrt();
        assert_relative_eq!(limit, 0.17320508, epsilon = 1e-8);
        assert!(m.data().iter().all(|x| x.abs() <= limit));
        assert_eq!(m, xavier_init(100, 100, 3));
        let one = xavier_init(1, 1, 9);
        assert!(one.get(0, 0).abs() <= 3f64.sqrt());
    }

    #[test]
    fn unit_window_is_a_linear_map() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 0.5], vec![3.0, 0.0]]).unwrap();
        let w = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let out = conv_forward(&[&x], &[w], &[0.0], 1, 3).unwrap();
        assert_eq!(out.data(), &[3.0, 1.0, 3.0]);
    }

    #[test]
    fn zero_second_channel_adds_nothing() {
        let x = xavier_init(6, 4, 1);
        let z = Matrix::zeros(6, 4);
        let w1 = xavier_init(12, 3, 2);
        let w2 = xavier_init(12, 3, 3);
        let bias = [0.1, -0.2, 0.05];
        let single = conv_forward(&[&x], std::slice::from_ref(&w1), &bias, 3, 6).unwrap();
        let double = conv_forward(&[&x, &z], &[w1, w2], &bias, 3, 6).unwrap();
        assert_eq!(single, double);
    }

    #[test]
    fn short_sentence_gets_one_padded_position() {
        assert_eq!(conv_positions(2, 3), 1);
        assert_eq!(conv_positions(3, 3), 1);
        assert_eq!(conv_positions(10, 3), 8);
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![100.0]]).unwrap();
        let w = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        // Row 2 lies beyond valid_len and must read as zero.
        let out = conv_forward(&[&x], &[w], &[0.0], 3, 2).unwrap();
        assert_eq!(out.data(), &[3.0]);
    }

    #[test]
    fn conv_rejects_mismatched_filters() {
        let x = Matrix::zeros(5, 4);
        let w = Matrix::zeros(11, 2);
        assert!(matches!(
            conv_forward(&[&x], &[w], &[0.0, 0.0], 3, 5),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn max_pool_cases() {
        let col = Matrix::from_rows(&[vec![1.0], vec![5.0], vec![3.0]]).unwrap();
        assert_eq!(max_pool(&col), (vec![5.0], vec![1]));
        let tie = Matrix::from_rows(&[vec![2.0], vec![2.0], vec![2.0]]).unwrap();
        assert_eq!(max_pool(&tie), (vec![2.0], vec![0]));
        let g = max_pool_backward(&[0.7], &[1], 3);
        assert_eq!(g.data(), &[0.0, 0.7, 0.0]);
    }

    #[test]
    fn relu_gate_blocks_non_positive() {
        let act = Matrix::from_rows(&[vec![0.0, 2.0]]).unwrap();
        let g = Matrix::from_rows(&[vec![5.0, 5.0]]).unwrap();
        assert_eq!(relu_backward(&act, &g).data(), &[0.0, 5.0]);
    }

    #[test]
    fn dropout_modes() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let (y, mask) = dropout_forward(&x, 1.0, Mode::Train { seed: 1 });
        assert_eq!(y, x);
        assert!(mask.iter().all(|&m| m == 1.0));
        let (y, _) = dropout_forward(&x, 0.3, Mode::Infer);
        assert_eq!(y, x);
        let a = dropout_forward(&x, 0.5, Mode::Train { seed: 4 });
        assert_eq!(a, dropout_forward(&x, 0.5, Mode::Train { seed: 4 }));
        assert!(a.1.iter().all(|&m| m == 0.0 || m == 2.0));
    }

    #[test]
    fn dropout_keeps_about_half() {
        // Binomial(10000, 0.5) has sd 50, so +-200 is a four sigma band.
        let x = vec![1.0; 10_000];
        let (_, mask) = dropout_forward(&x, 0.5, Mode::Train { seed: 11 });
        let kept = mask.iter().filter(|&&m| m > 0.0).count() as f64 / 10_000.0;
        assert!((kept - 0.5).abs() <= 0.02, "kept fraction {}", kept);
    }

    #[test]
    fn softmax_cases() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let p = softmax(&[1000.0, 0.0]);
        assert!(p.iter().all(|x| x.is_finite()));
        assert_relative_eq!(p[0], 1.0, epsilon = 1e-12);
        let p = softmax(&[1.0, -1.0]);
        let e2 = 2f64.exp();
        assert_relative_eq!(p[0], e2 / (e2 + 1.0), epsilon = 1e-15);
        assert_relative_eq!(p[0], 0.8808, epsilon = 1e-4);
        assert_relative_eq!(p[1], 0.1192, epsilon = 1e-4);
    }

    #[test]
    fn fc_backward_matches_outer_product() {
        let m = [1.0, 2.0, 3.0];
        let w = Matrix::from_rows(&[vec![0.1, 0.2, 0.3], vec![-0.1, 0.0, 0.4]]).unwrap();
        let mut dw = w.zeros_like();
        let mut db = [0.0; 2];
        let dm = fc_backward(&m, &w, &[1.0, -2.0], &mut dw, &mut db);
        assert_eq!(db, [1.0, -2.0]);
        assert_eq!(dw.row(1), &[-2.0, -4.0, -6.0]);
        assert_relative_eq!(dm[2], 0.3 - 0.8, epsilon = 1e-15);
    }
}
