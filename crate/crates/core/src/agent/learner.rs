use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::envs::{Environment, EpisodeSummary};
use super::policy::{bellman_targets, select_action, EpsilonSchedule};
use super::AgentError;
use crate::error::ConfigError;
use crate::nn::{Optimizer, OptimizerSpec, QNetwork};
use crate::replay::{ReplayBuffer, Transition, DEFAULT_CAPACITY};

/// Update cadence and discounting shared by every training driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub learn_start: u64,
    pub update_every: u64,
    /// Frames between target-network refreshes; 0 bootstraps from the online
    /// network itself.
    pub target_sync_every: u64,
    pub epsilon: EpsilonSchedule,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            batch_size: 32,
            buffer_capacity: DEFAULT_CAPACITY,
            learn_start: 1_000,
            update_every: 4,
            target_sync_every: 1_000,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(ConfigError::new("gamma", "must be in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(ConfigError::new("batch_size", "must be at least 1"));
        }
        if self.buffer_capacity == 0 {
            return Err(ConfigError::new("buffer_capacity", "must be at least 1"));
        }
        if self.update_every == 0 {
            return Err(ConfigError::new("update_every", "must be at least 1"));
        }
        self.epsilon.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub summary: EpisodeSummary,
    pub steps: u64,
    pub total_reward: f64,
    pub epsilon_at_end: f64,
}

/// Online network, optional frozen target, replay memory and exploration
/// state for one learning agent.
#[derive(Debug, Clone)]
pub struct DqnLearner {
    cfg: LearnerConfig,
    online: QNetwork,
    target: Option<QNetwork>,
    optimizer: Optimizer,
    replay: ReplayBuffer,
    policy_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    frames: u64,
    updates: u64,
    last_loss: Option<f64>,
}

impl DqnLearner {
    pub fn new(
        net: QNetwork,
        cfg: LearnerConfig,
        optimizer: OptimizerSpec,
        policy_seed: u64,
    ) -> Result<Self, AgentError> {
        cfg.validate()?;
        Ok(Self {
            target: (cfg.target_sync_every > 0).then(|| net.clone()),
            online: net,
            optimizer: Optimizer::new(optimizer)?,
            replay: ReplayBuffer::new(cfg.buffer_capacity)?,
            policy_rng: ChaCha8Rng::seed_from_u64(policy_seed),
            sample_rng: ChaCha8Rng::seed_from_u64(policy_seed.rotate_left(32) ^ 0x00DD_BA11),
            frames: 0,
            updates: 0,
            last_loss: None,
            cfg,
        })
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn into_online(self) -> QNetwork {
        self.online
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.last_loss
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon.at(self.frames)
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn act(&mut self, obs: &[f64]) -> Result<usize, AgentError> {
        let eps = self.epsilon();
        Ok(select_action(&self.online, obs, eps, &mut self.policy_rng)?)
    }

    /// Stores a transition and runs whatever update or target sync falls on
    /// this frame.
    pub fn observe(&mut self, t: Transition) -> Result<(), AgentError> {
        self.replay.push(t);
        self.frames += 1;
        if self.frames >= self.cfg.learn_start && self.frames.is_multiple_of(self.cfg.update_every) {
            self.learn()?;
        }
        if self.cfg.target_sync_every > 0 && self.frames.is_multiple_of(self.cfg.target_sync_every) {
            self.target = Some(self.online.clone());
        }
        Ok(())
    }

    /// One minibatch gradient step.
    pub fn learn(&mut self) -> Result<f64, AgentError> {
        let batch = self.replay.sample(self.cfg.batch_size, &mut self.sample_rng)?;
        let bootstrap = self.target.as_ref().unwrap_or(&self.online);
        let targets = bellman_targets(&batch, bootstrap, self.cfg.gamma)?;
        let inputs: Vec<Vec<f64>> = batch.iter().map(|t| t.s.flatten()).collect();
        let refs: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
        let actions: Vec<usize> = batch.iter().map(|t| t.a).collect();
        let (loss, grads) = self.online.backward(&refs, &actions, &targets)?;
        if !loss.is_finite() || !grads.all_finite() {
            return Err(AgentError::NonFinite {
                frame: self.frames,
                detail: format!("loss {loss} after {} updates", self.updates),
            });
        }
        self.optimizer.step(self.online.params_mut(), &grads)?;
        self.updates += 1;
        self.last_loss = Some(loss);
        Ok(loss)
    }

    /// Plays one episode with epsilon-greedy actions, learning as it goes.
    pub fn run_episode<E: Environment + ?Sized>(&mut self, env: &mut E, seed: u64) -> Result<EpisodeStats, AgentError> {
        let mut obs = env.reset(seed)?;
        let mut steps = 0;
        let mut total_reward = 0.0;
        loop {
            let a = self.act(&obs.flatten())?;
            let step = env.step(a)?;
            steps += 1;
            total_reward += step.reward;
            self.observe(Transition {
                s: obs,
                a,
                r: step.reward,
                s_next: step.obs.clone(),
                done: step.done,
            })?;
            obs = step.obs;
            if step.done || step.truncated {
                break;
            }
        }
        Ok(EpisodeStats {
            summary: env.summary(),
            steps,
            total_reward,
            epsilon_at_end: self.epsilon(),
        })
    }
}

/// Plays one episode choosing actions with `policy`; no learning.
pub fn play_episode<E, F>(env: &mut E, seed: u64, mut policy: F) -> Result<EpisodeStats, AgentError>
where
    E: Environment + ?Sized,
    F: FnMut(&[f64]) -> Result<usize, AgentError>,
{
    let mut obs = env.reset(seed)?;
    let mut steps = 0;
    let mut total_reward = 0.0;
    loop {
        let step = env.step(policy(&obs.flatten())?)?;
        steps += 1;
        total_reward += step.reward;
        obs = step.obs;
        if step.done || step.truncated {
            break;
        }
    }
    Ok(EpisodeStats {
        summary: env.summary(),
        steps,
        total_reward,
        epsilon_at_end: 0.0,
    })
}
