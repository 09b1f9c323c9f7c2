//! Deep Q-learning: exploration, Bellman targets, frame stacking, and the
//! solo and assistant training drivers.

mod envs;
mod learner;
mod policy;
mod stack;
mod train;

use std::io;
use std::path::Path;

use thiserror::Error;

pub use envs::{
    check_compatible, AssistantEnv, ChainMdp, Environment, EpisodeSummary, PlayerController, SinglePlayerEnv, Step,
};
pub use learner::{play_episode, DqnLearner, EpisodeStats, LearnerConfig};
pub use policy::{argmax, bellman_targets, greedy_action, select_action, EpsilonSchedule, PolicyMode};
pub use stack::{FrameStack, ObsMode, STACK_DEPTH};
pub use train::{
    checkpoint_name, episode_seed, train_assistant, train_single, Seeds, TrainConfig, TrainReport, FINAL_CHECKPOINT,
    SCORES_FILE,
};

pub(crate) use train::to_record;

use crate::env::{ActionError, EnvError};
use crate::error::ConfigError;
use crate::harness::HarnessError;
use crate::nn::{CheckpointError, NetError};
use crate::replay::ReplayError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Log(#[from] HarnessError),
    #[error("incompatible network: {0}")]
    Incompatible(String),
    #[error("non-finite training loss at frame {frame}: {detail}")]
    NonFinite { frame: u64, detail: String },
    #[error("step called before reset")]
    NotReset,
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl From<ActionError> for AgentError {
    fn from(e: ActionError) -> Self {
        AgentError::Env(e.into())
    }
}

impl AgentError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        AgentError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
