use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::HeadConfig;
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Weights and biases of the head, stored flat in declaration order:
/// `conv{1,2,3}.{weight,bias}` then `dense{1..5}.{weight,bias}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T = f32> {
    config: HeadConfig,
    tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(config: HeadConfig) -> Result<Self> {
        config.validate()?;
        let tensors = config.param_shapes().iter().map(|s| Tensor::zeros(s)).collect();
        Ok(Self { config, tensors })
    }

    pub fn from_tensors(config: HeadConfig, tensors: Vec<Tensor<T>>) -> Result<Self> {
        config.validate()?;
        let shapes = config.param_shapes();
        if shapes.len() != tensors.len() {
            return Err(Error::shape(format!("{} tensors", shapes.len()), tensors.len()));
        }
        for (s, t) in shapes.iter().zip(&tensors) {
            if s.as_slice() != t.shape() {
                return Err(Error::shape(format!("{s:?}"), format!("{:?}", t.shape())));
            }
        }
        Ok(Self { config, tensors })
    }

    pub fn config(&self) -> &HeadConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn conv_weight(&self, layer: usize) -> &Tensor<T> {
        &self.tensors[2 * layer]
    }

    pub fn conv_bias(&self, layer: usize) -> &Tensor<T> {
        &self.tensors[2 * layer + 1]
    }

    pub fn dense_weight(&self, layer: usize) -> &Tensor<T> {
        &self.tensors[6 + 2 * layer]
    }

    pub fn dense_bias(&self, layer: usize) -> &Tensor<T> {
        &self.tensors[7 + 2 * layer]
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        ModelParams {
            config: self.config,
            tensors: self.tensors.iter().map(Tensor::cast).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(Tensor::is_finite)
    }
}

/// He-normal weights (variance 2/fan_in), zero biases.
pub fn init_params<T: Scalar>(config: HeadConfig, seed: u64) -> Result<ModelParams<T>> {
    let mut params = ModelParams::<T>::zeros(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tensor in params.tensors.iter_mut().step_by(2) {
        let fan_in: usize = tensor.shape()[1..].iter().product();
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for w in tensor.data_mut() {
            *w = T::from_f64(normal.sample(&mut rng));
        }
    }
    Ok(params)
}

/// Gradients congruent with a [`ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet<T = f32> {
    tensors: Vec<Tensor<T>>,
}

impl<T: Scalar> GradientSet<T> {
    pub fn zeros_like(params: &ModelParams<T>) -> Self {
        Self {
            tensors: params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect(),
        }
    }

    pub fn tensors(&self) -> &[Tensor<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.tensors
    }

    pub(crate) fn check_congruent(&self, params: &ModelParams<T>) -> Result<()> {
        let ok = self.tensors.len() == params.tensors.len()
            && self
                .tensors
                .iter()
                .zip(&params.tensors)
                .all(|(g, p)| g.shape() == p.shape());
        if ok {
            Ok(())
        } else {
            Err(Error::shape("gradients congruent with params", "mismatched layout"))
        }
    }

    pub fn scale(&mut self, factor: T) {
        for t in &mut self.tensors {
            t.data_mut().iter_mut().for_each(|v| *v = *v * factor);
        }
    }
}
