use std::borrow::Cow;

use thiserror::Error;

/// A configuration value violated one of its bounds.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration `{field}`: {reason}")]
pub struct ConfigError {
    pub field: Cow<'static, str>,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<Cow<'static, str>>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
