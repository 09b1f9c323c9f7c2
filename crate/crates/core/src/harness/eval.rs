use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HarnessError, ScoreLog};
use crate::agent::{
    episode_seed, greedy_action, play_episode, to_record, AgentError, AssistantEnv, ObsMode, PlayerController,
    SinglePlayerEnv,
};
use crate::env::{EnvConfig, PlayerAction};
use crate::nn::{Checkpoint, QNetwork};
use crate::rewards::{AssistantRewardSpec, SinglePlayerRewardSpec};

/// The three compared configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Single,
    RandomAssist,
    TrainedAssist,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Single => "single",
            EvalMode::RandomAssist => "random-assist",
            EvalMode::TrainedAssist => "trained-assist",
        })
    }
}

impl FromStr for EvalMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(EvalMode::Single),
            "random-assist" => Ok(EvalMode::RandomAssist),
            "trained-assist" => Ok(EvalMode::TrainedAssist),
            _ => Err(HarnessError::BadArgument(format!(
                "unknown mode `{s}` (single, random-assist, trained-assist)"
            ))),
        }
    }
}

const ASSIST_RNG: u64 = 0x5151_7E57_0000_0001;
const SOLO_RNG: u64 = 0x5151_7E57_0000_0002;

fn load_net(ckpt: &Checkpoint) -> Result<Arc<QNetwork>, AgentError> {
    Ok(Arc::new(QNetwork::new(ckpt.spec.clone(), ckpt.params.clone())?))
}

/// Plays `episodes` games with greedy networks, or uniform random actions
/// where a network is absent or the mode asks for a random assistant. A
/// missing player checkpoint means a random player 1. Episodes run in
/// parallel and are logged in episode order.
pub fn eval_run(
    mode: EvalMode,
    episodes: u64,
    seed: u64,
    env: &EnvConfig,
    player: Option<&Checkpoint>,
    assistant: Option<&Checkpoint>,
) -> Result<ScoreLog, AgentError> {
    if mode == EvalMode::TrainedAssist && assistant.is_none() {
        return Err(AgentError::Incompatible(
            "trained-assist needs an assistant checkpoint".into(),
        ));
    }
    let two_player = mode != EvalMode::Single;
    let env = EnvConfig {
        two_player,
        ..env.clone()
    };
    let player = player.map(load_net).transpose()?;
    let assistant = match mode {
        EvalMode::TrainedAssist => assistant.map(load_net).transpose()?,
        _ => None,
    };
    let detect = |net: &QNetwork| {
        ObsMode::detect(net.spec(), &env)
            .ok_or_else(|| AgentError::Incompatible(format!("network {} matches no observation mode", net.spec())))
    };
    let obs_mode = match (&player, &assistant) {
        (Some(p), Some(a)) => {
            let (pm, am) = (detect(p)?, detect(a)?);
            if pm != am {
                return Err(AgentError::Incompatible(format!(
                    "player uses {pm:?} observations, assistant uses {am:?}"
                )));
            }
            pm
        }
        (Some(n), None) | (None, Some(n)) => detect(n)?,
        (None, None) => ObsMode::Feature,
    };
    for net in player.iter().chain(&assistant) {
        crate::agent::check_compatible(net, obs_mode, &env)?;
    }
    let n_actions = PlayerAction::TRAINING_SET.len();
    let learner_random = match mode {
        EvalMode::Single => player.is_none(),
        EvalMode::RandomAssist => true,
        EvalMode::TrainedAssist => false,
    };

    let rows: Result<Vec<_>, AgentError> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let ep_seed = episode_seed(seed, i);
            let stats = if two_player {
                let controller = player
                    .clone()
                    .map_or(PlayerController::Random, PlayerController::Greedy);
                let mut game = AssistantEnv::new(env.clone(), obs_mode, AssistantRewardSpec::default(), controller)?;
                let mut rng = ChaCha8Rng::seed_from_u64(ep_seed ^ ASSIST_RNG);
                play_episode(&mut game, ep_seed, |obs| match &assistant {
                    Some(net) => Ok(greedy_action(net, obs)?),
                    None => Ok(rng.gen_range(0..n_actions)),
                })?
            } else {
                let mut game = SinglePlayerEnv::new(env.clone(), obs_mode, SinglePlayerRewardSpec::default())?;
                let mut rng = ChaCha8Rng::seed_from_u64(ep_seed ^ SOLO_RNG);
                play_episode(&mut game, ep_seed, |obs| match &player {
                    Some(net) => Ok(greedy_action(net, obs)?),
                    None => Ok(rng.gen_range(0..n_actions)),
                })?
            };
            let mut record = to_record(i + 1, &stats)?;
            record.epsilon = if learner_random { 1.0 } else { 0.0 };
            Ok(record)
        })
        .collect();
    let mut log = ScoreLog::new();
    for r in rows? {
        log.push(r)?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_episodes_is_header_only() {
        let log = eval_run(EvalMode::Single, 0, 1, &EnvConfig::default(), None, None).unwrap();
        assert_eq!(log.to_csv_string(), format!("{}\n", super::super::HEADER));
    }

    #[test]
    fn same_seed_same_csv() {
        let run = || {
            eval_run(EvalMode::RandomAssist, 6, 7, &EnvConfig::default(), None, None)
                .unwrap()
                .to_csv_string()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn trained_assist_requires_checkpoint() {
        assert!(eval_run(EvalMode::TrainedAssist, 1, 1, &EnvConfig::default(), None, None).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [EvalMode::Single, EvalMode::RandomAssist, EvalMode::TrainedAssist] {
            assert_eq!(m.to_string().parse::<EvalMode>().unwrap(), m);
        }
        assert!("both".parse::<EvalMode>().is_err());
    }
}
