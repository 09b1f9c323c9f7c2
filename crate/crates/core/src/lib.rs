//! Two-player Space Invaders and a from-scratch deep Q-learning stack for
//! training an assistant that helps a human-like player.
//!
//! * [`env`] is the deterministic game.
//! * [`rewards`] holds the solo and assistant reward functions.
//! * [`nn`] has the networks, backpropagation, optimisers and checkpoints.
//! * [`replay`] is the replay memory.
//! * [`agent`] has the learner, the environment wrappers and the training loops.
//! * [`harness`] covers score logs, evaluation, statistics and plots.
//! * [`play`] runs sessions for browser play-testing.

pub mod agent;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod play;
pub mod replay;
pub mod rewards;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/rewards.md")]
    mod rewards {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/assistant.md")]
    mod assistant {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/play.md")]
    mod play {}
}
