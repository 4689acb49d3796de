use serde::{Deserialize, Serialize};

use crate::trainer::model::{Gradients, LinearModel};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig<F> {
    pub lr: F,
    pub weight_decay: F,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
}

impl<F: Real> AdamWConfig<F> {
    pub fn new(lr: F, weight_decay: F) -> Self {
        Self {
            lr,
            weight_decay,
            beta1: F::lit(0.9),
            beta2: F::lit(0.999),
            eps: F::lit(1e-8),
        }
    }
}

/// Adam with decoupled weight decay. Decay applies to weights, not biases.
#[derive(Debug, Clone)]
pub struct AdamW<F> {
    config: AdamWConfig<F>,
    step: i32,
    m_w: Vec<F>,
    v_w: Vec<F>,
    m_b: Vec<F>,
    v_b: Vec<F>,
}

impl<F: Real> AdamW<F> {
    pub fn new(model: &LinearModel<F>, config: AdamWConfig<F>) -> Self {
        let nw = model.weights.as_slice().len();
        let nb = model.bias.len();
        Self {
            config,
            step: 0,
            m_w: vec![F::zero(); nw],
            v_w: vec![F::zero(); nw],
            m_b: vec![F::zero(); nb],
            v_b: vec![F::zero(); nb],
        }
    }

    pub fn steps(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, model: &mut LinearModel<F>, grads: &Gradients<F>) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::NonFinite("gradients"));
        }
        if grads.weights.shape() != model.weights.shape() || grads.bias.len() != model.bias.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", model.weights.shape()),
                got: format!("{:?}", grads.weights.shape()),
            });
        }
        self.step += 1;
        let AdamWConfig {
            lr,
            weight_decay,
            beta1,
            beta2,
            eps,
        } = self.config;
        let c1 = F::one() - beta1.powi(self.step);
        let c2 = F::one() - beta2.powi(self.step);
        let decay = F::one() - lr * weight_decay;

        let update = |p: &mut F, g: F, m: &mut F, v: &mut F, decay: F| {
            *p *= decay;
            *m = beta1 * *m + (F::one() - beta1) * g;
            *v = beta2 * *v + (F::one() - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };
        for (((p, &g), m), v) in model
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(grads.weights.as_slice())
            .zip(&mut self.m_w)
            .zip(&mut self.v_w)
        {
            update(p, g, m, v, decay);
        }
        for (((p, &g), m), v) in model.bias.iter_mut().zip(&grads.bias).zip(&mut self.m_b).zip(&mut self.v_b) {
            update(p, g, m, v, F::one());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> LinearModel<f64> {
        let mut m = LinearModel::init(3, 2, 5).unwrap();
        m.bias = vec![0.5, -0.5];
        m
    }

    #[test]
    fn zero_grad_zero_decay_is_identity() {
        let mut m = model();
        let before = m.clone();
        let mut opt = AdamW::new(&m, AdamWConfig::new(0.1, 0.0));
        opt.step(&mut m, &Gradients::zeros(3, 2)).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut m = model();
        let before = m.clone();
        let mut opt = AdamW::new(&m, AdamWConfig::new(0.01, 0.0));
        let mut g = Gradients::zeros(3, 2);
        for v in g.weights.as_mut_slice() {
            *v = 0.37;
        }
        g.bias = vec![-2.0, 1e-3];
        opt.step(&mut m, &g).unwrap();
        // m_hat = g and v_hat = g^2 after bias correction
        for (a, b) in m.weights.as_slice().iter().zip(before.weights.as_slice()) {
            assert!(((b - a) - 0.01 * 0.37 / (0.37 + 1e-8)).abs() < 1e-15);
        }
        assert!(((m.bias[0] - before.bias[0]) - 0.01).abs() < 1e-9);
        assert!(((before.bias[1] - m.bias[1]) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn decoupled_decay_scales_weights_only() {
        let mut m = model();
        let before = m.clone();
        let mut opt = AdamW::new(&m, AdamWConfig::new(0.1, 0.01));
        opt.step(&mut m, &Gradients::zeros(3, 2)).unwrap();
        for (a, b) in m.weights.as_slice().iter().zip(before.weights.as_slice()) {
            assert!((a - b * (1.0 - 0.001)).abs() < 1e-16);
        }
        assert_eq!(m.bias, before.bias);
    }

    #[test]
    fn non_finite_gradients_rejected() {
        let mut m = model();
        let mut opt = AdamW::new(&m, AdamWConfig::new(0.1, 0.01));
        let mut g = Gradients::zeros(3, 2);
        g.bias[1] = f64::INFINITY;
        assert!(opt.step(&mut m, &g).is_err());
    }
}
