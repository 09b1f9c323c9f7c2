use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::NetworkSpec;
use super::NetError;

/// Dense row-major array of doubles with a fixed shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NetError> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(NetError::ShapeMismatch(format!(
                "shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Weights and biases of every parameterised layer, stored as
/// `[w0, b0, w1, b1, ...]` in layer order. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub tensors: Vec<Tensor>,
}

impl NetworkParams {
    pub fn zeros_for(spec: &NetworkSpec) -> Result<Self, NetError> {
        Ok(Self {
            tensors: spec
                .param_shapes()?
                .into_iter()
                .map(|(_, shape)| Tensor::zeros(shape))
                .collect(),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self.tensors.iter().map(|t| Tensor::zeros(t.shape.clone())).collect(),
        }
    }

    pub fn num_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.tensors.iter().flat_map(|t| t.data.iter().copied())
    }

    pub fn all_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    pub fn global_norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Errors unless every tensor has the shape `spec` prescribes.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<(), NetError> {
        let expected = spec.param_shapes()?;
        if expected.len() != self.tensors.len() {
            return Err(NetError::ShapeMismatch(format!(
                "expected {} tensors, got {}",
                expected.len(),
                self.tensors.len()
            )));
        }
        for ((name, shape), t) in expected.iter().zip(&self.tensors) {
            if *shape != t.shape {
                return Err(NetError::ShapeMismatch(format!(
                    "{name}: expected {shape:?}, got {:?}",
                    t.shape
                )));
            }
        }
        Ok(())
    }
}

/// He-style uniform initialisation (variance `2 / fan_in`), zero biases.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> Result<NetworkParams, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = NetworkParams::zeros_for(spec)?;
    for pair in params.tensors.chunks_mut(2) {
        let weight = &mut pair[0];
        let fan_in: usize = weight.shape[1..].iter().product();
        let bound = (6.0 / fan_in as f64).sqrt();
        for w in weight.data_mut() {
            *w = rng.gen_range(-bound..bound);
        }
    }
    Ok(params)
}
