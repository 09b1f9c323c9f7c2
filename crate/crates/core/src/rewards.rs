//! Per-frame training rewards for the solo agent and the assistant.

use serde::{Deserialize, Serialize};

use crate::env::{EnvConfig, Shooter, StepEvent, StepEvents};
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinglePlayerRewardSpec {
    pub kill_reward: f64,
    pub life_loss: f64,
    pub game_over: f64,
}

impl Default for SinglePlayerRewardSpec {
    fn default() -> Self {
        Self {
            kill_reward: 30.0,
            life_loss: -10.0,
            game_over: -10.0,
        }
    }
}

impl SinglePlayerRewardSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.kill_reward <= 0.0 {
            return Err(ConfigError::new("kill_reward", "must be positive"));
        }
        if self.life_loss >= 0.0 || self.game_over >= 0.0 {
            return Err(ConfigError::new("life_loss", "penalties must be negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssistantRewardSpec {
    pub win_reward: f64,
    pub kill_scale: f64,
    pub life_loss: f64,
    pub game_over: f64,
    /// Player lives at or above this use the distance itself as kill score;
    /// below it, the complement.
    pub lives_threshold: u32,
}

impl Default for AssistantRewardSpec {
    fn default() -> Self {
        Self {
            win_reward: 80.0,
            kill_scale: 50.0,
            life_loss: -20.0,
            game_over: -80.0,
            lives_threshold: 3,
        }
    }
}

impl AssistantRewardSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.win_reward > 0.0 && self.life_loss < 0.0) {
            return Err(ConfigError::new("win_reward", "need win_reward > 0 > life_loss"));
        }
        if self.kill_scale <= 0.0 {
            return Err(ConfigError::new("kill_scale", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillScoreInput {
    pub player_x: f64,
    pub enemy_x: f64,
    pub player_lives: u32,
    pub max_distance: f64,
}

/// Normalised horizontal distance between player 1 and a destroyed enemy.
///
/// With `player_lives >= lives_threshold` far kills score high (1 at the
/// maximum separation); below the threshold the score flips to `1 - d`, so
/// kills close to a struggling player are worth more.
pub fn kill_score(input: &KillScoreInput, lives_threshold: u32) -> Result<f64, ConfigError> {
    if !(input.max_distance > 0.0) {
        return Err(ConfigError::new(
            "max_distance",
            format!("must be > 0, got {}", input.max_distance),
        ));
    }
    let d = ((input.player_x - input.enemy_x).abs() / input.max_distance).clamp(0.0, 1.0);
    Ok(if input.player_lives >= lives_threshold {
        d
    } else {
        1.0 - d
    })
}

/// Distance normaliser shared by every kill in an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillGeometry {
    max_distance: f64,
}

impl KillGeometry {
    pub fn new(max_distance: f64) -> Result<Self, ConfigError> {
        if !(max_distance > 0.0) {
            return Err(ConfigError::new("max_distance", "must be > 0"));
        }
        Ok(Self { max_distance })
    }

    pub fn for_config(config: &EnvConfig) -> Result<Self, ConfigError> {
        Self::new(config.max_distance())
    }

    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }
}

pub fn assistant_step_reward(
    events: &StepEvents,
    lives_after: u32,
    spec: &AssistantRewardSpec,
    geom: KillGeometry,
) -> f64 {
    let kill = |player_x: f64, enemy_x: f64| {
        let input = KillScoreInput {
            player_x,
            enemy_x,
            player_lives: lives_after,
            max_distance: geom.max_distance,
        };
        spec.kill_scale * kill_score(&input, spec.lives_threshold).expect("geometry validated on construction")
    };
    events
        .iter()
        .map(|e| match *e {
            StepEvent::AlienKilled {
                killer: Shooter::P2,
                alien_x,
                player_x,
            } => kill(player_x, alien_x),
            StepEvent::MysteryKilled {
                killer: Shooter::P2,
                mystery_x,
                player_x,
            } => kill(player_x, mystery_x),
            StepEvent::AlienKilled { .. } | StepEvent::MysteryKilled { .. } => 0.0,
            StepEvent::PlayerLifeLost => spec.life_loss,
            StepEvent::GameWon => spec.win_reward,
            StepEvent::GameLost => spec.game_over,
        })
        .sum()
}

/// No bonus for winning: only kills and the two penalties count.
pub fn single_player_step_reward(events: &StepEvents, spec: &SinglePlayerRewardSpec) -> f64 {
    events
        .iter()
        .map(|e| match e {
            StepEvent::AlienKilled {
                killer: Shooter::P1, ..
            }
            | StepEvent::MysteryKilled {
                killer: Shooter::P1, ..
            } => spec.kill_reward,
            StepEvent::AlienKilled { .. } | StepEvent::MysteryKilled { .. } => 0.0,
            StepEvent::PlayerLifeLost => spec.life_loss,
            StepEvent::GameLost => spec.game_over,
            StepEvent::GameWon => 0.0,
        })
        .sum()
}
