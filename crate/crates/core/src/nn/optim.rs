use serde::{Deserialize, Serialize};

use super::params::NetworkParams;
use super::NetError;
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// RMSProp squared-gradient decay.
    pub decay: f64,
    pub epsilon: f64,
    /// Gradients whose global norm exceeds this are rescaled to it; 0 disables.
    pub clip_norm: f64,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        Self::feature_default()
    }
}

impl OptimizerSpec {
    pub fn feature_default() -> Self {
        Self {
            kind: OptimizerKind::RmsProp,
            learning_rate: 1e-3,
            decay: 0.99,
            epsilon: 1e-8,
            clip_norm: 1.0,
        }
    }

    pub fn pixel_default() -> Self {
        Self {
            learning_rate: 2.5e-4,
            ..Self::feature_default()
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            learning_rate,
            clip_norm: 0.0,
            ..Self::feature_default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ConfigError::new("learning_rate", "must be positive and finite"));
        }
        if !(0.0..1.0).contains(&self.decay) {
            return Err(ConfigError::new("decay", "must be in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(ConfigError::new("epsilon", "must be positive"));
        }
        if !(self.clip_norm >= 0.0) {
            return Err(ConfigError::new("clip_norm", "must be >= 0"));
        }
        Ok(())
    }
}

/// `theta <- theta - lr * grad`, in place.
pub fn apply_sgd(params: &mut NetworkParams, grads: &NetworkParams, lr: f64) -> Result<(), NetError> {
    check_pair(params, grads)?;
    for (p, g) in params.tensors.iter_mut().zip(&grads.tensors) {
        for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
            *pv -= lr * gv;
        }
    }
    Ok(())
}

fn check_pair(params: &NetworkParams, grads: &NetworkParams) -> Result<(), NetError> {
    let same = params.tensors.len() == grads.tensors.len()
        && params
            .tensors
            .iter()
            .zip(&grads.tensors)
            .all(|(a, b)| a.shape() == b.shape());
    if !same {
        return Err(NetError::ShapeMismatch("gradient does not match parameters".into()));
    }
    if !grads.all_finite() {
        return Err(NetError::NonFinite("gradient"));
    }
    Ok(())
}

/// Stateful optimiser. RMSProp keeps a running mean of squared gradients.
#[derive(Debug, Clone)]
pub struct Optimizer {
    spec: OptimizerSpec,
    mean_square: Option<NetworkParams>,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec) -> Result<Self, ConfigError> {
        spec.validate()?;
        Ok(Self {
            spec,
            mean_square: None,
        })
    }

    pub fn spec(&self) -> &OptimizerSpec {
        &self.spec
    }

    /// Applies one update. Non-finite gradients are refused and leave the
    /// parameters untouched.
    pub fn step(&mut self, params: &mut NetworkParams, grads: &NetworkParams) -> Result<(), NetError> {
        check_pair(params, grads)?;
        let norm = grads.global_norm();
        let scale = if self.spec.clip_norm > 0.0 && norm > self.spec.clip_norm {
            self.spec.clip_norm / norm
        } else {
            1.0
        };
        let lr = self.spec.learning_rate;
        match self.spec.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.tensors.iter_mut().zip(&grads.tensors) {
                    for (pv, gv) in p.data_mut().iter_mut().zip(g.data()) {
                        *pv -= lr * scale * gv;
                    }
                }
            }
            OptimizerKind::RmsProp => {
                let ms = self.mean_square.get_or_insert_with(|| grads.zeros_like());
                let (rho, eps) = (self.spec.decay, self.spec.epsilon);
                for ((p, g), m) in params.tensors.iter_mut().zip(&grads.tensors).zip(&mut ms.tensors) {
                    for ((pv, gv), mv) in p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut()) {
                        let gs = gv * scale;
                        *mv = rho * *mv + (1.0 - rho) * gs * gs;
                        *pv -= lr * gs / (mv.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{NetworkSpec, QNetwork, Tensor};

    fn one(v: f64) -> NetworkParams {
        NetworkParams {
            tensors: vec![Tensor::from_vec(vec![1], vec![v]).unwrap()],
        }
    }

    #[test]
    fn sgd_oracle() {
        let mut p = one(1.0);
        apply_sgd(&mut p, &one(0.5), 0.1).unwrap();
        assert!((p.tensors[0].data()[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn nan_gradient_refused() {
        let mut p = one(1.0);
        let mut opt = Optimizer::new(OptimizerSpec::feature_default()).unwrap();
        assert!(matches!(opt.step(&mut p, &one(f64::NAN)), Err(NetError::NonFinite(_))));
        assert_eq!(p, one(1.0));
    }

    #[test]
    fn clipping_bounds_the_step() {
        let mut p = one(0.0);
        let mut opt = Optimizer::new(OptimizerSpec {
            clip_norm: 1.0,
            ..OptimizerSpec::sgd(0.1)
        })
        .unwrap();
        opt.step(&mut p, &one(100.0)).unwrap();
        assert!((p.tensors[0].data()[0] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn rmsprop_first_step_size() {
        // First step: m = (1 - rho) g^2, update = lr * g / (sqrt(m) + eps).
        let mut p = one(0.0);
        let mut opt = Optimizer::new(OptimizerSpec {
            clip_norm: 0.0,
            ..OptimizerSpec::feature_default()
        })
        .unwrap();
        opt.step(&mut p, &one(0.3)).unwrap();
        let expected = -1e-3 * 0.3 / ((0.01f64 * 0.09).sqrt() + 1e-8);
        assert!((p.tensors[0].data()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn sgd_step_lowers_loss() {
        let mut net = QNetwork::init(NetworkSpec::default_feature(6), 2).unwrap();
        let x = [0.3, -0.1, 0.8, 0.5, 0.0, 0.2];
        let (l0, g) = net.backward(&[&x], &[1], &[1.5]).unwrap();
        apply_sgd(net.params_mut(), &g, 1e-3).unwrap();
        let l1 = net.loss(&[&x], &[1], &[1.5]).unwrap();
        assert!(l1 < l0);
    }

    #[test]
    fn bad_specs() {
        assert!(OptimizerSpec::sgd(0.0).validate().is_err());
        assert!(OptimizerSpec {
            decay: 1.0,
            ..OptimizerSpec::default()
        }
        .validate()
        .is_err());
    }
}
