use serde::{Deserialize, Serialize};

use super::{GradientSet, ModelParams};
use crate::error::Result;
use crate::tensor::{Scalar, Tensor};

/// Optimizer family used by [`super::train`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
    Sgd,
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias-corrected moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T = f32> {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    first: Vec<Tensor<T>>,
    second: Vec<Tensor<T>>,
    step: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(params: &ModelParams<T>, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros = || {
            params
                .tensors()
                .iter()
                .map(|t| Tensor::zeros(t.shape()))
                .collect::<Vec<_>>()
        };
        Self {
            beta1,
            beta2,
            epsilon,
            first: zeros(),
            second: zeros(),
            step: 0,
        }
    }

    pub fn with_defaults(params: &ModelParams<T>) -> Self {
        Self::new(params, 0.9, 0.999, 1e-8)
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &GradientSet<T>, lr: f64) -> Result<()> {
        grads.check_congruent(params)?;
        self.step += 1;
        let t = self.step as i32;
        let b1 = T::from_f64(self.beta1);
        let b2 = T::from_f64(self.beta2);
        let one = T::one();
        let correct1 = T::from_f64(1.0 - self.beta1.powi(t));
        let correct2 = T::from_f64(1.0 - self.beta2.powi(t));
        let lr = T::from_f64(lr);
        let eps = T::from_f64(self.epsilon);
        let layers = params
            .tensors_mut()
            .iter_mut()
            .zip(grads.tensors())
            .zip(self.first.iter_mut().zip(self.second.iter_mut()));
        for ((p, g), (m, v)) in layers {
            let cells = p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()));
            for ((p, &g), (m, v)) in cells {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let m_hat = *m / correct1;
                let v_hat = *v / correct2;
                *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Plain gradient descent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sgd;

impl Sgd {
    pub fn step<T: Scalar>(&mut self, params: &mut ModelParams<T>, grads: &GradientSet<T>, lr: f64) -> Result<()> {
        grads.check_congruent(params)?;
        let lr = T::from_f64(lr);
        for (p, g) in params.tensors_mut().iter_mut().zip(grads.tensors()) {
            p.data_mut()
                .iter_mut()
                .zip(g.data())
                .for_each(|(p, &g)| *p = *p - lr * g);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Optimizer<T = f32> {
    Adam(Adam<T>),
    Sgd(Sgd),
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, params: &ModelParams<T>) -> Self {
        match kind {
            OptimizerKind::Adam { beta1, beta2, epsilon } => Optimizer::Adam(Adam::new(params, beta1, beta2, epsilon)),
            OptimizerKind::Sgd => Optimizer::Sgd(Sgd),
        }
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &GradientSet<T>, lr: f64) -> Result<()> {
        match self {
            Optimizer::Adam(adam) => adam.step(params, grads, lr),
            Optimizer::Sgd(sgd) => sgd.step(params, grads, lr),
        }
    }
}
