use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a single ship does during one frame.
///
/// Agents only ever choose among [`PlayerAction::TRAINING_SET`]; `Noop` exists
/// so that a human holding no keys does not move or shoot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerAction {
    Left,
    Right,
    Shoot,
    Noop,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("Noop has no slot in the joint action encoding")]
    NoopNotEncodable,
    #[error("action index {0} out of range 0..3")]
    BadIndex(usize),
    #[error("joint action code {0} out of range 0..9")]
    BadCode(u8),
}

impl PlayerAction {
    pub const TRAINING_SET: [PlayerAction; 3] = [Self::Left, Self::Right, Self::Shoot];

    pub fn from_index(index: usize) -> Result<Self, ActionError> {
        Self::TRAINING_SET
            .get(index)
            .copied()
            .ok_or(ActionError::BadIndex(index))
    }

    /// Position within the training action set; `None` for `Noop`.
    pub fn index(self) -> Option<usize> {
        match self {
            Self::Left => Some(0),
            Self::Right => Some(1),
            Self::Shoot => Some(2),
            Self::Noop => None,
        }
    }

    fn letter(self) -> char {
        match self {
            Self::Left => 'L',
            Self::Right => 'R',
            Self::Shoot => 'S',
            Self::Noop => '-',
        }
    }
}

/// Both players' actions packed into one of nine codes, ordered
/// `LL, LR, LS, RL, RR, RS, SL, SR, SS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointAction(u8);

impl JointAction {
    pub const COUNT: u8 = 9;

    pub fn encode(first: PlayerAction, second: PlayerAction) -> Result<Self, ActionError> {
        let a = first.index().ok_or(ActionError::NoopNotEncodable)?;
        let b = second.index().ok_or(ActionError::NoopNotEncodable)?;
        Ok(Self((3 * a + b) as u8))
    }

    pub fn from_code(code: u8) -> Result<Self, ActionError> {
        if code < Self::COUNT {
            Ok(Self(code))
        } else {
            Err(ActionError::BadCode(code))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn decode(self) -> (PlayerAction, PlayerAction) {
        let set = PlayerAction::TRAINING_SET;
        (set[usize::from(self.0 / 3)], set[usize::from(self.0 % 3)])
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.decode();
        write!(f, "{}{}", a.letter(), b.letter())
    }
}

/// Convenience wrapper matching the `encode_joint` name used by the book.
pub fn encode_joint(first: PlayerAction, second: PlayerAction) -> Result<JointAction, ActionError> {
    JointAction::encode(first, second)
}
