use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{feature_len, features, observe_pixels, EnvConfig, GameState, OBS_SIZE};
use crate::nn::{InputShape, NetworkSpec};
use crate::replay::{Observation, StoredFrame};

pub const STACK_DEPTH: usize = 4;

/// What a network sees of the game each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObsMode {
    /// Downsampled 84x84 grayscale frames, quantised to bytes.
    Pixel,
    /// The compact entity feature vector.
    Feature,
}

impl ObsMode {
    pub fn capture(self, state: &GameState) -> Arc<StoredFrame> {
        Arc::new(match self {
            ObsMode::Pixel => StoredFrame::quantize(&observe_pixels(state).data),
            ObsMode::Feature => StoredFrame::Exact(features(state)),
        })
    }

    pub fn input_shape(self, config: &EnvConfig) -> InputShape {
        match self {
            ObsMode::Pixel => InputShape::Image {
                channels: STACK_DEPTH,
                height: OBS_SIZE,
                width: OBS_SIZE,
            },
            ObsMode::Feature => InputShape::Vector {
                length: STACK_DEPTH * feature_len(config),
            },
        }
    }

    pub fn default_network(self, config: &EnvConfig) -> NetworkSpec {
        match self {
            ObsMode::Pixel => NetworkSpec::default_pixel(),
            ObsMode::Feature => NetworkSpec::default_feature(STACK_DEPTH * feature_len(config)),
        }
    }

    /// Which mode, if any, a network's input layer belongs to.
    pub fn detect(spec: &NetworkSpec, config: &EnvConfig) -> Option<ObsMode> {
        [ObsMode::Pixel, ObsMode::Feature]
            .into_iter()
            .find(|m| m.input_shape(config) == spec.input)
    }
}

/// The last four frames, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    frames: VecDeque<Arc<StoredFrame>>,
}

impl FrameStack {
    /// Episode start: four copies of the first frame.
    pub fn new(first: Arc<StoredFrame>) -> Self {
        Self {
            frames: std::iter::repeat_n(first, STACK_DEPTH).collect(),
        }
    }

    pub fn push(&mut self, frame: Arc<StoredFrame>) {
        self.frames.pop_front();
        self.frames.push_back(frame);
    }

    pub fn frames(&self) -> impl Iterator<Item = &Arc<StoredFrame>> {
        self.frames.iter()
    }

    pub fn observation(&self) -> Observation {
        Observation {
            frames: self.frames.iter().cloned().collect(),
        }
    }
}
