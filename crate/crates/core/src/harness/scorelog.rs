use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::Outcome;

/// One finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub score: u32,
    pub steps: u64,
    pub outcome: Outcome,
    pub lives_left: u32,
    pub epsilon: f64,
}

/// Per-episode results, written as `episode,score,steps,outcome,lives_left,epsilon`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreLog {
    rows: Vec<EpisodeRecord>,
}

pub const HEADER: &str = "episode,score,steps,outcome,lives_left,epsilon";

impl ScoreLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[EpisodeRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.rows.iter().map(|r| f64::from(r.score)).collect()
    }

    /// The first episode must be 1 and later ones must increase strictly.
    pub fn push(&mut self, row: EpisodeRecord) -> Result<(), HarnessError> {
        match self.rows.last() {
            None if row.episode != 1 => return Err(HarnessError::FirstEpisode(row.episode)),
            Some(last) if row.episode <= last.episode => {
                return Err(HarnessError::Order {
                    episode: row.episode,
                    expected_at_least: last.episode + 1,
                })
            }
            _ => {}
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(HEADER.split(','))?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_csv_string()).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self, HarnessError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != HEADER {
            return Err(HarnessError::Parse {
                line: 1,
                message: format!("expected header `{HEADER}`"),
            });
        }
        let mut log = Self::new();
        for rec in r.deserialize::<EpisodeRecord>() {
            let row = rec.map_err(|e| HarnessError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            log.push(row)?;
        }
        Ok(log)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let f = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::read_from(f)
    }
}
