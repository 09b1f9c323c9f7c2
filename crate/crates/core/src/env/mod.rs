//! Deterministic, headless two-player Space Invaders.
//!
//! The API mirrors the classic learning-environment triple: [`GameState::reset`]
//! starts an episode, [`GameState::step`] (or [`GameState::step_joint`])
//! advances one frame, and [`render_gray`] / [`features`] produce observations.
//! Every bit of randomness comes from the RNG stored inside the state, so a
//! `(config, seed, actions)` triple always replays identically.

mod action;
mod autopilot;
mod config;
mod features;
mod hash;
mod render;
mod state;

pub use action::{encode_joint, ActionError, JointAction, PlayerAction};
pub use autopilot::autopilot_action;
pub use config::EnvConfig;
pub use features::{feature_len, features, lives_slot, ABSENT, NEAREST_MISSILES};
pub use hash::hash_state;
pub use render::{
    observe_pixels, preprocess, render_gray, Frame, ALIEN, BACKGROUND, BUNKER, MISSILE, MYSTERY, OBS_SIZE, P1_SHIP,
    P2_SHIP,
};
pub use state::{
    BoundingBox, Bunker, EnvError, Formation, GameState, Missile, MissileOwner, Mystery, Outcome, Ship, Shooter,
    StepEvent, StepEvents,
};
