use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::envs::{check_compatible, AssistantEnv, Environment, PlayerController, SinglePlayerEnv};
use super::learner::{DqnLearner, EpisodeStats, LearnerConfig};
use super::policy::EpsilonSchedule;
use super::stack::ObsMode;
use super::AgentError;
use crate::env::EnvConfig;
use crate::error::ConfigError;
use crate::harness::{EpisodeRecord, ScoreLog};
use crate::nn::{save_checkpoint, Checkpoint, CheckpointMeta, NetworkSpec, OptimizerSpec, QNetwork};
use crate::replay::DEFAULT_CAPACITY;
use crate::rewards::{AssistantRewardSpec, SinglePlayerRewardSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub env: u64,
    pub net: u64,
    pub policy: u64,
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Self {
            env: seed,
            net: seed.wrapping_add(1),
            policy: seed.wrapping_add(2),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of the `index`-th episode (0-based) of a run started from `base`.
pub fn episode_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(GOLDEN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub learn_start: u64,
    pub update_every: u64,
    pub target_sync_every: u64,
    pub max_episodes: u64,
    /// Episodes between intermediate checkpoints; 0 keeps only the final one.
    pub checkpoint_every: u64,
    pub obs_mode: ObsMode,
    pub epsilon: EpsilonSchedule,
    pub seeds: Seeds,
    /// Defaults to the observation mode's optimiser when absent.
    pub optimizer: Option<OptimizerSpec>,
    /// Network in text form, e.g. `168:dense64,relu,dense64,relu,dense3`.
    /// Defaults to the observation mode's network when absent.
    pub network: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let l = LearnerConfig::default();
        Self {
            gamma: l.gamma,
            batch_size: l.batch_size,
            buffer_capacity: DEFAULT_CAPACITY,
            learn_start: l.learn_start,
            update_every: l.update_every,
            target_sync_every: l.target_sync_every,
            max_episodes: 300,
            checkpoint_every: 50,
            obs_mode: ObsMode::Feature,
            epsilon: l.epsilon,
            seeds: Seeds::default(),
            optimizer: None,
            network: None,
        }
    }
}

impl TrainConfig {
    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            gamma: self.gamma,
            batch_size: self.batch_size,
            buffer_capacity: self.buffer_capacity,
            learn_start: self.learn_start,
            update_every: self.update_every,
            target_sync_every: self.target_sync_every,
            epsilon: self.epsilon,
        }
    }

    pub fn optimizer_spec(&self) -> OptimizerSpec {
        self.optimizer.unwrap_or(match self.obs_mode {
            ObsMode::Pixel => OptimizerSpec::pixel_default(),
            ObsMode::Feature => OptimizerSpec::feature_default(),
        })
    }

    pub fn network_spec(&self, env: &EnvConfig) -> Result<NetworkSpec, AgentError> {
        let spec = match &self.network {
            Some(text) => text.parse()?,
            None => self.obs_mode.default_network(env),
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.learner().validate()?;
        self.optimizer_spec().validate()
    }

    /// Fresh network for this run, checked against the observation mode.
    pub fn init_network(&self, env: &EnvConfig) -> Result<QNetwork, AgentError> {
        let net = QNetwork::init(self.network_spec(env)?, self.seeds.net)?;
        check_compatible(&net, self.obs_mode, env)?;
        Ok(net)
    }
}

/// What a training run leaves behind in its output directory.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub log: ScoreLog,
    pub log_path: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub final_checkpoint: PathBuf,
    pub network: QNetwork,
}

pub const SCORES_FILE: &str = "scores.csv";
pub const FINAL_CHECKPOINT: &str = "final.cqn";

pub fn checkpoint_name(episode: u64) -> String {
    format!("ckpt_ep{episode:06}.cqn")
}

/// Trains player 1 alone.
pub fn train_single(
    env: &EnvConfig,
    rewards: &SinglePlayerRewardSpec,
    cfg: &TrainConfig,
    out_dir: &Path,
    progress: &mut dyn FnMut(&EpisodeRecord),
) -> Result<TrainReport, AgentError> {
    cfg.validate()?;
    let mut game = SinglePlayerEnv::new(env.clone(), cfg.obs_mode, *rewards)?;
    let net = cfg.init_network(env)?;
    run(&mut game, net, cfg, out_dir, progress)
}

/// Trains the assistant against a frozen, greedy player 1.
pub fn train_assistant(
    env: &EnvConfig,
    rewards: &AssistantRewardSpec,
    player: &Checkpoint,
    cfg: &TrainConfig,
    out_dir: &Path,
    progress: &mut dyn FnMut(&EpisodeRecord),
) -> Result<TrainReport, AgentError> {
    cfg.validate()?;
    let env = EnvConfig {
        two_player: true,
        ..env.clone()
    };
    let frozen = QNetwork::new(player.spec.clone(), player.params.clone())?;
    check_compatible(&frozen, cfg.obs_mode, &env)?;
    let mut game = AssistantEnv::new(
        env.clone(),
        cfg.obs_mode,
        *rewards,
        PlayerController::Greedy(Arc::new(frozen)),
    )?;
    let net = cfg.init_network(&env)?;
    run(&mut game, net, cfg, out_dir, progress)
}

fn run<E: Environment>(
    env: &mut E,
    net: QNetwork,
    cfg: &TrainConfig,
    out_dir: &Path,
    progress: &mut dyn FnMut(&EpisodeRecord),
) -> Result<TrainReport, AgentError> {
    fs::create_dir_all(out_dir).map_err(|e| AgentError::io(out_dir, e))?;
    let mut learner = DqnLearner::new(net, cfg.learner(), cfg.optimizer_spec(), cfg.seeds.policy)?;
    let mut log = ScoreLog::new();
    let mut checkpoints = Vec::new();
    let log_path = out_dir.join(SCORES_FILE);
    for i in 0..cfg.max_episodes {
        let stats = learner.run_episode(env, episode_seed(cfg.seeds.env, i))?;
        let record = to_record(i + 1, &stats)?;
        log.push(record)?;
        progress(&record);
        if cfg.checkpoint_every > 0 && (i + 1) % cfg.checkpoint_every == 0 {
            let path = out_dir.join(checkpoint_name(i + 1));
            save(&learner, cfg, i + 1, &path)?;
            log.save(&log_path)?;
            checkpoints.push(path);
        }
    }
    log.save(&log_path)?;
    let final_checkpoint = out_dir.join(FINAL_CHECKPOINT);
    save(&learner, cfg, cfg.max_episodes, &final_checkpoint)?;
    Ok(TrainReport {
        log,
        log_path,
        checkpoints,
        final_checkpoint,
        network: learner.into_online(),
    })
}

/// Game episodes always end with an outcome.
pub(crate) fn to_record(episode: u64, stats: &EpisodeStats) -> Result<EpisodeRecord, AgentError> {
    Ok(EpisodeRecord {
        episode,
        score: stats.summary.score,
        steps: stats.steps,
        outcome: stats
            .summary
            .outcome
            .ok_or_else(|| AgentError::Incompatible("episode ended without an outcome".into()))?,
        lives_left: stats.summary.lives_left,
        epsilon: stats.epsilon_at_end,
    })
}

fn save(learner: &DqnLearner, cfg: &TrainConfig, episodes: u64, path: &Path) -> Result<(), AgentError> {
    let net = learner.online();
    let ckpt = Checkpoint {
        spec: net.spec().clone(),
        params: net.params().clone(),
        meta: CheckpointMeta {
            episodes_trained: episodes,
            frames_seen: learner.frames_seen(),
            epsilon_at_save: learner.epsilon(),
            seed: cfg.seeds.net,
        },
    };
    save_checkpoint(&ckpt, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn episode_seeds_are_distinct() {
        let seeds: std::collections::HashSet<_> = (0..1000).map(|i| episode_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(episode_seed(7, 0), 7);
    }

    #[test]
    fn default_network_matches_mode() {
        let env = EnvConfig::default();
        let cfg = TrainConfig::default();
        let net = cfg.init_network(&env).unwrap();
        assert_eq!(net.spec().input_len(), 4 * crate::env::feature_len(&env));
        let bad = TrainConfig {
            network: Some("5:dense3".into()),
            ..TrainConfig::default()
        };
        assert!(matches!(bad.init_network(&env), Err(AgentError::Incompatible(_))));
    }
}
