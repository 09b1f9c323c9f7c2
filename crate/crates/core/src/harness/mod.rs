//! Score logs, evaluation runs, summary statistics, significance tests and
//! score plots.

mod config;
mod eval;
mod plot;
mod scorelog;
mod stats;

use std::io;
use std::path::Path;

use thiserror::Error;

pub use config::RunConfig;
pub use eval::{eval_run, EvalMode};
pub use plot::score_svg;
pub use scorelog::{EpisodeRecord, ScoreLog, HEADER};
pub use stats::{mann_whitney, rolling_mean, Comparison, SummaryStats, DEFAULT_WINDOW};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("episode {episode} out of order (expected at least {expected_at_least})")]
    Order { episode: u64, expected_at_least: u64 },
    #[error("first episode must be 1, got {0}")]
    FirstEpisode(u64),
    #[error("no episodes")]
    NoEpisodes,
    #[error("{0}")]
    BadArgument(String),
    #[error("config: {0}")]
    Config(String),
}

impl From<io::Error> for HarnessError {
    fn from(source: io::Error) -> Self {
        HarnessError::Io {
            path: "<stream>".into(),
            source,
        }
    }
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
