//! Brute-force reference implementations written independently of the
//! library kernels.

use mcdepcnn::tensor::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sliding-window dot products over a zero-padded input, ReLU applied.
pub fn conv(
    channels: &[Matrix],
    filters: &[Matrix],
    bias: &[f64],
    k: usize,
    valid_len: usize,
) -> Vec<Vec<f64>> {
    let d = channels[0].cols();
    let positions = if valid_len >= k { valid_len - k + 1 } else { 1 };
    let read = |c: usize, r: usize, e: usize| -> f64 {
        if r < valid_len && r < channels[c].rows() {
            channels[c].get(r, e)
        } else {
            0.0
        }
    };
    let mut out = vec![vec![0.0; bias.len()]; positions];
    for (i, row) in out.iter_mut().enumerate() {
        for (f, o) in row.iter_mut().enumerate() {
            let mut s = bias[f];
            for c in 0..channels.len() {
                for j in 0..k {
                    for e in 0..d {
                        s += filters[c].get(j * d + e, f) * read(c, i + j, e);
                    }
                }
            }
            *o = if s > 0.0 { s } else { 0.0 };
        }
    }
    out
}

/// Column maxima by sorting each column.
pub fn column_max(x: &Matrix) -> Vec<f64> {
    (0..x.cols())
        .map(|c| {
            let mut col: Vec<f64> = (0..x.rows()).map(|r| x.get(r, c)).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            *col.last().unwrap()
        })
        .collect()
}

/// `W m + b` followed by exp-normalize without any stabilization trick.
pub fn fc_softmax(m: &[f64], w: &Matrix, b: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = (0..w.rows())
        .map(|r| b[r] + (0..m.len()).map(|i| w.get(r, i) * m[i]).sum::<f64>())
        .collect();
    let exps: Vec<f64> = logits.iter().map(|z| z.exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub struct ConvCase {
    pub channels: Vec<Matrix>,
    pub filters: Vec<Matrix>,
    pub bias: Vec<f64>,
    pub k: usize,
    pub valid_len: usize,
}

/// Random shapes, including sentences shorter than the window.
pub fn conv_case(seed: u64) -> ConvCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = rng.gen_range(1..12);
    let valid_len = rng.gen_range(1..=max_len);
    let d = rng.gen_range(1..8);
    let k = rng.gen_range(1..6);
    let f = rng.gen_range(1..6);
    let n_channels = rng.gen_range(1..=2);
    let channels = (0..n_channels)
        .map(|_| {
            let mut m = random_matrix(max_len, d, &mut rng);
            for r in valid_len..max_len {
                m.row_mut(r).fill(0.0);
            }
            // Sparse inputs exercise the zero-skipping path.
            for v in m.data_mut() {
                if rng.gen_bool(0.3) {
                    *v = 0.0;
                }
            }
            m
        })
        .collect();
    let filters = (0..n_channels)
        .map(|_| random_matrix(k * d, f, &mut rng))
        .collect();
    let bias = (0..f).map(|_| rng.gen_range(-0.5..0.5)).collect();
    ConvCase {
        channels,
        filters,
        bias,
        k,
        valid_len,
    }
}
