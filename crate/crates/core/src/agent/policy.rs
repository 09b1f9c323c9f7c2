use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::nn::{NetError, QNetwork};
use crate::replay::Transition;

/// Linear exploration decay from `start` to `end` over `anneal_frames`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub anneal_frames: u64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.1,
            anneal_frames: 100_000,
        }
    }
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0 <= self.end && self.end <= self.start && self.start <= 1.0) {
            return Err(ConfigError::new("epsilon", "need 0 <= end <= start <= 1"));
        }
        Ok(())
    }

    pub fn at(&self, frame: u64) -> f64 {
        if frame >= self.anneal_frames {
            return self.end;
        }
        let t = frame as f64 / self.anneal_frames as f64;
        self.start + (self.end - self.start) * t
    }
}

/// Who picks an agent's actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyMode {
    Learning(EpsilonSchedule),
    Greedy,
    Random,
    /// Actions come from outside, e.g. a human at a keyboard.
    External,
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice. One uniform draw is always consumed for the
/// explore/exploit decision, so the RNG stream does not depend on `eps`
/// beyond the branch taken.
pub fn select_action<R: Rng + ?Sized>(net: &QNetwork, obs: &[f64], eps: f64, rng: &mut R) -> Result<usize, NetError> {
    let explore = rng.gen::<f64>() < eps;
    if explore {
        Ok(rng.gen_range(0..net.num_actions()))
    } else {
        Ok(argmax(&net.forward(obs)?))
    }
}

pub fn greedy_action(net: &QNetwork, obs: &[f64]) -> Result<usize, NetError> {
    Ok(argmax(&net.forward(obs)?))
}

/// `r` for terminal transitions, otherwise `r + gamma * max_a' Q(s', a')`.
pub fn bellman_targets(batch: &[&Transition], target: &QNetwork, gamma: f64) -> Result<Vec<f64>, NetError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                Ok(t.r)
            } else {
                let q = target.forward(&t.s_next.flatten())?;
                let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(t.r + gamma * best)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{InputShape, LayerSpec, NetworkParams, NetworkSpec, Tensor};
    use crate::replay::Observation;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A network whose output is exactly its bias vector.
    fn constant_q(q: &[f64]) -> QNetwork {
        let spec = NetworkSpec {
            input: InputShape::Vector { length: 1 },
            layers: vec![LayerSpec::Dense { units: q.len() }],
        };
        let params = NetworkParams {
            tensors: vec![
                Tensor::zeros(vec![q.len(), 1]),
                Tensor::from_vec(vec![q.len()], q.to_vec()).unwrap(),
            ],
        };
        QNetwork::new(spec, params).unwrap()
    }

    fn tr(r: f64, done: bool) -> Transition {
        Transition {
            s: Observation::single(vec![0.0]),
            a: 0,
            r,
            s_next: Observation::single(vec![0.0]),
            done,
        }
    }

    #[test]
    fn schedule_anchors() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.at(0), 1.0);
        assert_eq!(s.at(100_000), 0.1);
        assert_eq!(s.at(1_000_000), 0.1);
        assert!((s.at(50_000) - 0.55).abs() < 1e-12);
        assert!(EpsilonSchedule {
            start: 0.1,
            end: 0.5,
            anneal_frames: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn greedy_picks_argmax_with_low_tie_break() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            select_action(&constant_q(&[1.0, 3.0, 2.0]), &[0.0], 0.0, &mut rng).unwrap(),
            1
        );
        assert_eq!(
            select_action(&constant_q(&[2.0, 2.0, 0.0]), &[0.0], 0.0, &mut rng).unwrap(),
            0
        );
    }

    #[test]
    fn full_exploration_is_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let net = constant_q(&[5.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut counts = [0u32; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[select_action(&net, &[0.0], 1.0, &mut rng).unwrap()] += 1;
        }
        let e = f64::from(n) / 3.0;
        let chi2: f64 = counts.iter().map(|&c| (f64::from(c) - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new(2.0).unwrap().cdf(chi2);
        assert!(p > 0.01, "{counts:?} p={p}");
    }

    #[test]
    fn targets_table() {
        let net = constant_q(&[10.0, -3.0, 4.0]);
        let terminal = tr(30.0, true);
        let open = tr(30.0, false);
        assert_eq!(bellman_targets(&[&terminal], &net, 0.99).unwrap(), vec![30.0]);
        let y = bellman_targets(&[&open], &net, 0.99).unwrap()[0];
        assert!((y - 39.9).abs() < 1e-12);
        assert_eq!(bellman_targets(&[&open], &net, 0.0).unwrap(), vec![30.0]);
    }

    proptest! {
        #[test]
        fn schedule_is_non_increasing(a in 0u64..300_000, b in 0u64..300_000) {
            let s = EpsilonSchedule::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.at(lo) >= s.at(hi));
        }

        #[test]
        fn greedy_ignores_positive_scale(q in proptest::collection::vec(-100.0..100.0f64, 3), c in 0.01..100.0f64) {
            let scaled: Vec<f64> = q.iter().map(|v| v * c).collect();
            prop_assert_eq!(argmax(&q), argmax(&scaled));
        }
    }
}
