use super::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.0007,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates for an ordered list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub t: u64,
    pub m: Vec<Matrix>,
    pub v: Vec<Matrix>,
}

impl AdamState {
    pub fn new<'a>(config: AdamConfig, params: impl IntoIterator<Item = &'a Matrix>) -> Self {
        let m: Vec<Matrix> = params.into_iter().map(Matrix::zeros_like).collect();
        AdamState {
            config,
            t: 0,
            v: m.clone(),
            m,
        }
    }

    /// One bias-corrected Adam update over every tensor.
    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[&Matrix]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "optimizer tracks {} tensors, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            p.expect_shape(m.shape(), "adam parameter")?;
            g.expect_shape(m.shape(), "adam gradient")?;
        }

        self.t += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);

        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mv = beta1 * *mv + (1.0 - beta1) * gv;
                *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Matrix::from_vec(1, 3, vec![0.5, -1.0, 2.0]).unwrap();
        let before = p.clone();
        let g = p.zeros_like();
        let mut state = AdamState::new(AdamConfig::default(), [&p]);
        state.step(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(p, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        let cfg = AdamConfig::default();
        for g in [3.0, -0.25, 1e-3] {
            let mut p = Matrix::zeros(1, 1);
            let grad = Matrix::from_vec(1, 1, vec![g]).unwrap();
            let mut state = AdamState::new(cfg, [&p]);
            state.step(&mut [&mut p], &[&grad]).unwrap();
            let expected = -cfg.learning_rate * g / (g.abs() + cfg.epsilon);
            assert_relative_eq!(p.get(0, 0), expected, epsilon = 1e-15);
            assert_relative_eq!(p.get(0, 0).abs(), 0.0007, max_relative = 1e-4);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = Matrix::zeros(2, 2);
        let g = Matrix::zeros(2, 3);
        let mut state = AdamState::new(AdamConfig::default(), [&p]);
        assert!(state.step(&mut [&mut p], &[&g]).is_err());
    }
}
