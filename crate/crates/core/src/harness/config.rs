use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agent::TrainConfig;
use crate::env::EnvConfig;
use crate::rewards::{AssistantRewardSpec, SinglePlayerRewardSpec};

/// Everything a run reads from its config file. Keys are flat dotted paths,
/// one `key = value` per line:
///
/// ```toml
/// env.alien_fire_prob = 0.01
/// train.max_episodes = 300
/// train.seeds.env = 7
/// train.optimizer.learning_rate = 0.0005
/// assistant_reward.win_reward = 80
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub single_reward: SinglePlayerRewardSpec,
    pub assistant_reward: AssistantRewardSpec,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |e: crate::error::ConfigError| HarnessError::Config(e.to_string());
        self.env.validate().map_err(bad)?;
        self.train.validate().map_err(bad)?;
        self.single_reward.validate().map_err(bad)?;
        self.assistant_reward.validate().map_err(bad)
    }

    /// Sets every seed from one number, as `--seed` does.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seeds = crate::agent::Seeds::all(seed);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::ObsMode;
    use crate::nn::OptimizerKind;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn dotted_keys() {
        let cfg = RunConfig::from_toml(
            "env.alien_fire_prob = 0.01\n\
             train.max_episodes = 12\n\
             train.obs_mode = \"pixel\"\n\
             train.seeds.env = 9\n\
             train.optimizer.kind = \"sgd\"\n\
             train.optimizer.learning_rate = 0.5\n\
             assistant_reward.lives_threshold = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.env.alien_fire_prob, 0.01);
        assert_eq!(cfg.train.max_episodes, 12);
        assert_eq!(cfg.train.obs_mode, ObsMode::Pixel);
        assert_eq!(cfg.train.seeds.env, 9);
        let opt = cfg.train.optimizer.unwrap();
        assert_eq!(
            (opt.kind, opt.learning_rate, opt.decay),
            (OptimizerKind::Sgd, 0.5, 0.99)
        );
        assert_eq!(cfg.assistant_reward.lives_threshold, 2);
    }

    #[test]
    fn unknown_and_invalid_keys_rejected() {
        assert!(RunConfig::from_toml("train.gama = 0.9").is_err());
        let err = RunConfig::from_toml("train.gamma = 1.0").unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        assert!(RunConfig::from_toml("env.alien_cols = 0")
            .unwrap_err()
            .to_string()
            .contains("alien_cols"));
    }
}
