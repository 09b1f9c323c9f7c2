use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::policy::greedy_action;
use super::stack::{FrameStack, ObsMode};
use super::AgentError;
use crate::env::{EnvConfig, GameState, Outcome, PlayerAction};
use crate::nn::QNetwork;
use crate::replay::Observation;
use crate::rewards::{
    assistant_step_reward, single_player_step_reward, AssistantRewardSpec, KillGeometry, SinglePlayerRewardSpec,
};

/// Result of one environment step, as the learner sees it.
#[derive(Debug, Clone)]
pub struct Step {
    pub obs: Observation,
    pub reward: f64,
    /// True episode end; bootstrapping stops here.
    pub done: bool,
    /// Cut off by a time limit; the transition is not terminal.
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub score: u32,
    pub outcome: Option<Outcome>,
    pub lives_left: u32,
}

/// Anything the DQN loop can be trained against.
pub trait Environment {
    fn num_actions(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Observation, AgentError>;
    fn step(&mut self, action: usize) -> Result<Step, AgentError>;
    fn summary(&self) -> EpisodeSummary;
}

/// The agent-facing game: observation capture, stacking and reward shaping.
#[derive(Debug, Clone)]
struct GameDriver {
    config: EnvConfig,
    mode: ObsMode,
    state: Option<GameState>,
    stack: Option<FrameStack>,
}

impl GameDriver {
    fn new(config: EnvConfig, mode: ObsMode) -> Result<Self, AgentError> {
        config.validate()?;
        Ok(Self {
            config,
            mode,
            state: None,
            stack: None,
        })
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, AgentError> {
        let state = GameState::reset(&self.config, seed)?;
        let stack = FrameStack::new(self.mode.capture(&state));
        let obs = stack.observation();
        self.state = Some(state);
        self.stack = Some(stack);
        Ok(obs)
    }

    fn parts(&mut self) -> Result<(&mut GameState, &mut FrameStack), AgentError> {
        match (&mut self.state, &mut self.stack) {
            (Some(s), Some(k)) => Ok((s, k)),
            _ => Err(AgentError::NotReset),
        }
    }

    fn summary(&self) -> EpisodeSummary {
        self.state.as_ref().map_or(
            EpisodeSummary {
                score: 0,
                outcome: None,
                lives_left: self.config.player_lives,
            },
            |s| EpisodeSummary {
                score: s.score,
                outcome: s.outcome,
                lives_left: s.lives,
            },
        )
    }
}

/// Player 1 alone; the learner controls P1.
#[derive(Debug, Clone)]
pub struct SinglePlayerEnv {
    game: GameDriver,
    rewards: SinglePlayerRewardSpec,
}

impl SinglePlayerEnv {
    pub fn new(config: EnvConfig, mode: ObsMode, rewards: SinglePlayerRewardSpec) -> Result<Self, AgentError> {
        rewards.validate()?;
        Ok(Self {
            game: GameDriver::new(
                EnvConfig {
                    two_player: false,
                    ..config
                },
                mode,
            )?,
            rewards,
        })
    }

    pub fn state(&self) -> Option<&GameState> {
        self.game.state.as_ref()
    }
}

impl Environment for SinglePlayerEnv {
    fn num_actions(&self) -> usize {
        PlayerAction::TRAINING_SET.len()
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, AgentError> {
        self.game.reset(seed)
    }

    fn step(&mut self, action: usize) -> Result<Step, AgentError> {
        let mode = self.game.mode;
        let a = PlayerAction::from_index(action)?;
        let (state, stack) = self.game.parts()?;
        let events = state.step(a, PlayerAction::Noop)?;
        stack.push(mode.capture(state));
        Ok(Step {
            obs: stack.observation(),
            reward: single_player_step_reward(&events, &self.rewards),
            done: state.done,
            truncated: false,
        })
    }

    fn summary(&self) -> EpisodeSummary {
        self.game.summary()
    }
}

/// How player 1 is driven in the two-player game.
#[derive(Debug, Clone)]
pub enum PlayerController {
    /// Argmax of a frozen network over the shared frame stack.
    Greedy(Arc<QNetwork>),
    /// Uniform over the training action set, seeded per episode.
    Random,
}

/// Two-player game; the learner controls P2 (the assistant).
#[derive(Debug, Clone)]
pub struct AssistantEnv {
    game: GameDriver,
    rewards: AssistantRewardSpec,
    geometry: KillGeometry,
    player: PlayerController,
    player_rng: ChaCha8Rng,
    last_obs: Option<Observation>,
}

impl AssistantEnv {
    pub fn new(
        config: EnvConfig,
        mode: ObsMode,
        rewards: AssistantRewardSpec,
        player: PlayerController,
    ) -> Result<Self, AgentError> {
        rewards.validate()?;
        let config = EnvConfig {
            two_player: true,
            ..config
        };
        if let PlayerController::Greedy(net) = &player {
            check_compatible(net, mode, &config)?;
        }
        Ok(Self {
            geometry: KillGeometry::for_config(&config)?,
            game: GameDriver::new(config, mode)?,
            rewards,
            player,
            player_rng: ChaCha8Rng::seed_from_u64(0),
            last_obs: None,
        })
    }

    pub fn state(&self) -> Option<&GameState> {
        self.game.state.as_ref()
    }
}

impl Environment for AssistantEnv {
    fn num_actions(&self) -> usize {
        PlayerAction::TRAINING_SET.len()
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, AgentError> {
        self.player_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA55A_5AA5_F00D_CAFE);
        let obs = self.game.reset(seed)?;
        self.last_obs = Some(obs.clone());
        Ok(obs)
    }

    fn step(&mut self, action: usize) -> Result<Step, AgentError> {
        let assistant = PlayerAction::from_index(action)?;
        let obs = self.last_obs.as_ref().ok_or(AgentError::NotReset)?;
        let player = match &self.player {
            PlayerController::Greedy(net) => greedy_action(net, &obs.flatten())?,
            PlayerController::Random => self.player_rng.gen_range(0..PlayerAction::TRAINING_SET.len()),
        };
        let player = PlayerAction::from_index(player)?;
        let mode = self.game.mode;
        let (state, stack) = self.game.parts()?;
        let events = state.step(player, assistant)?;
        stack.push(mode.capture(state));
        let obs = stack.observation();
        let reward = assistant_step_reward(&events, state.lives, &self.rewards, self.geometry);
        let done = state.done;
        self.last_obs = Some(obs.clone());
        Ok(Step {
            obs,
            reward,
            done,
            truncated: false,
        })
    }

    fn summary(&self) -> EpisodeSummary {
        self.game.summary()
    }
}

/// Errors unless `net` consumes `mode` observations of `config` and has one
/// output per training action.
pub fn check_compatible(net: &QNetwork, mode: ObsMode, config: &EnvConfig) -> Result<(), AgentError> {
    let expected = mode.input_shape(config);
    if net.spec().input != expected {
        return Err(AgentError::Incompatible(format!(
            "network input {:?} does not match {mode:?} observations {expected:?}",
            net.spec().input
        )));
    }
    if net.num_actions() != PlayerAction::TRAINING_SET.len() {
        return Err(AgentError::Incompatible(format!(
            "network has {} outputs, the game has {} actions",
            net.num_actions(),
            PlayerAction::TRAINING_SET.len()
        )));
    }
    Ok(())
}

/// A three-state, two-action chain with known optimal values, for checking
/// the learning loop in isolation.
///
/// | state | action 0            | action 1        |
/// |-------|---------------------|-----------------|
/// | 0     | to 1, r = 0         | stay, r = 0.1   |
/// | 1     | to 2, r = 0         | to 0, r = 0.5   |
/// | 2     | terminal, r = 1     | to 1, r = 0     |
///
/// Observations are one-hot. Episodes are cut off after `max_steps` without
/// being marked terminal.
#[derive(Debug, Clone)]
pub struct ChainMdp {
    pub max_steps: usize,
    state: usize,
    steps: usize,
    rng: ChaCha8Rng,
    random_start: bool,
}

impl ChainMdp {
    pub const STATES: usize = 3;
    pub const ACTIONS: usize = 2;

    /// `random_start` begins each episode in a uniformly drawn state so every
    /// state is visited regardless of the policy.
    pub fn new(max_steps: usize, random_start: bool) -> Self {
        Self {
            max_steps,
            state: 0,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
            random_start,
        }
    }

    /// `(next_state, reward, terminal)`.
    pub fn transition(state: usize, action: usize) -> (usize, f64, bool) {
        match (state, action) {
            (0, 0) => (1, 0.0, false),
            (0, _) => (0, 0.1, false),
            (1, 0) => (2, 0.0, false),
            (1, _) => (0, 0.5, false),
            (2, 0) => (2, 1.0, true),
            (_, _) => (1, 0.0, false),
        }
    }

    pub fn one_hot(state: usize) -> Observation {
        let mut v = vec![0.0; Self::STATES];
        v[state] = 1.0;
        Observation::single(v)
    }
}

impl Environment for ChainMdp {
    fn num_actions(&self) -> usize {
        Self::ACTIONS
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, AgentError> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.steps = 0;
        self.state = if self.random_start {
            self.rng.gen_range(0..Self::STATES)
        } else {
            0
        };
        Ok(Self::one_hot(self.state))
    }

    fn step(&mut self, action: usize) -> Result<Step, AgentError> {
        if action >= Self::ACTIONS {
            return Err(AgentError::Incompatible(format!("action {action} out of range")));
        }
        let (next, reward, done) = Self::transition(self.state, action);
        self.state = next;
        self.steps += 1;
        Ok(Step {
            obs: Self::one_hot(next),
            reward,
            done,
            truncated: !done && self.steps >= self.max_steps,
        })
    }

    fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            score: 0,
            outcome: None,
            lives_left: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{NetworkParams, NetworkSpec};

    #[test]
    fn single_player_env_runs_to_the_end() {
        let mut env = SinglePlayerEnv::new(
            EnvConfig::default(),
            ObsMode::Feature,
            SinglePlayerRewardSpec::default(),
        )
        .unwrap();
        assert!(matches!(env.step(0), Err(AgentError::NotReset)));
        env.reset(3).unwrap();
        let mut steps = 0;
        loop {
            let s = env.step(2).unwrap();
            steps += 1;
            if s.done {
                break;
            }
        }
        assert!(steps > 100);
        assert!(env.summary().outcome.is_some());
    }

    #[test]
    fn zero_player_net_always_goes_left() {
        let config = EnvConfig::two_player();
        let spec = ObsMode::Feature.default_network(&config);
        let net = QNetwork::new(spec.clone(), NetworkParams::zeros_for(&spec).unwrap()).unwrap();
        let mut env = AssistantEnv::new(
            config,
            ObsMode::Feature,
            AssistantRewardSpec::default(),
            PlayerController::Greedy(Arc::new(net)),
        )
        .unwrap();
        env.reset(1).unwrap();
        for _ in 0..30 {
            env.step(2).unwrap();
        }
        assert_eq!(env.state().unwrap().p1.x, 0);
    }

    #[test]
    fn incompatible_player_rejected() {
        let net = QNetwork::init(NetworkSpec::default_feature(7), 0).unwrap();
        let err = AssistantEnv::new(
            EnvConfig::two_player(),
            ObsMode::Feature,
            AssistantRewardSpec::default(),
            PlayerController::Greedy(Arc::new(net)),
        )
        .unwrap_err();
        assert!(matches!(err, AgentError::Incompatible(_)));
    }

    #[test]
    fn chain_truncates_without_terminal() {
        let mut m = ChainMdp::new(3, false);
        m.reset(0).unwrap();
        let steps: Vec<_> = (0..3).map(|_| m.step(1).unwrap()).collect();
        assert!(steps.iter().all(|s| !s.done));
        assert!(steps[2].truncated);
    }
}
