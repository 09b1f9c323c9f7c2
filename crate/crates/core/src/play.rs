//! Human play-testing sessions: keyboard-driven player 1, network-driven
//! assistant, JSON wire messages and the survey log.

use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::agent::{argmax, check_compatible, FrameStack, ObsMode};
use crate::env::{EnvConfig, GameState, MissileOwner, PlayerAction};
use crate::nn::{load_checkpoint, QNetwork};

pub const DEFAULT_TICK_RATE: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HeldKey {
    Left,
    Right,
    Shoot,
}

/// Shoot wins; a single direction moves; nothing or both directions idle.
pub fn resolve_human_action(held: &BTreeSet<HeldKey>) -> PlayerAction {
    if held.contains(&HeldKey::Shoot) {
        return PlayerAction::Shoot;
    }
    match (held.contains(&HeldKey::Left), held.contains(&HeldKey::Right)) {
        (true, false) => PlayerAction::Left,
        (false, true) => PlayerAction::Right,
        _ => PlayerAction::Noop,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Survey {
    pub helpful: u8,
    pub purposeful: u8,
    /// 1 = felt like an assistant, 5 = felt like a competitor.
    pub role_perception: u8,
    pub overall: u8,
    #[serde(default)]
    pub comment: String,
}

impl Survey {
    /// Name of the first rating outside 1..=5.
    pub fn invalid_field(&self) -> Option<&'static str> {
        [
            ("helpful", self.helpful),
            ("purposeful", self.purposeful),
            ("role_perception", self.role_perception),
            ("overall", self.overall),
        ]
        .into_iter()
        .find(|(_, v)| !(1..=5).contains(v))
        .map(|(name, _)| name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientMessage {
    Start {
        seed: u64,
    },
    Input {
        #[serde(alias = "held")]
        held_keys: Vec<HeldKey>,
    },
    Survey(Survey),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlienSnapshot {
    /// Top-left corner of the formation grid.
    pub origin: [i32; 2],
    pub rows: usize,
    pub cols: usize,
    /// Row-major, top row first.
    pub alive: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissileSnapshot {
    pub owner: MissileOwner,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BunkerSnapshot {
    pub x: i32,
    pub y: i32,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MysterySnapshot {
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSnapshot {
    pub frame: u64,
    pub score: u32,
    pub lives: u32,
    pub p1_x: i32,
    pub p2_x: Option<i32>,
    pub aliens: AlienSnapshot,
    pub missiles: Vec<MissileSnapshot>,
    pub bunkers: Vec<BunkerSnapshot>,
    pub mystery: Option<MysterySnapshot>,
    pub done: bool,
    pub outcome: Option<String>,
}

impl StateSnapshot {
    pub fn of(s: &GameState) -> Self {
        Self {
            frame: s.frame,
            score: s.score,
            lives: s.lives,
            p1_x: s.p1.x,
            p2_x: s.p2.as_ref().map(|p| p.x),
            aliens: AlienSnapshot {
                origin: [s.formation.origin_x, s.formation.origin_y],
                rows: s.formation.rows,
                cols: s.formation.cols,
                alive: s.formation.alive.clone(),
            },
            missiles: s
                .missiles
                .iter()
                .map(|m| MissileSnapshot {
                    owner: m.owner,
                    x: m.x,
                    y: m.y,
                })
                .collect(),
            bunkers: s
                .bunkers
                .iter()
                .map(|b| BunkerSnapshot {
                    x: b.origin_x,
                    y: b.origin_y,
                    rows: b.rows,
                    cols: b.cols,
                    cells: b.cells.clone(),
                })
                .collect(),
            mystery: s.mystery.as_ref().map(|m| MysterySnapshot {
                x: m.x,
                y: s.config.mystery_y,
            }),
            done: s.done,
            outcome: s.outcome.map(|o| o.as_str().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ServerMessage {
    State(StateSnapshot),
    Ack,
    Error { reason: String },
}

impl ServerMessage {
    pub fn error(reason: impl Into<String>) -> Self {
        ServerMessage::Error { reason: reason.into() }
    }
}

#[derive(Debug, Error)]
pub enum PlayError {
    /// The reason string sent to the client names the offending thing only.
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("finished")]
    Finished,
    #[error("not finished")]
    NotFinished,
    #[error("{0}")]
    Rating(&'static str),
    #[error("survey log: {0}")]
    Log(#[from] std::io::Error),
}

impl PlayError {
    /// Short reason for the wire `Error` message.
    pub fn reason(&self) -> String {
        match self {
            PlayError::Checkpoint(_) => "checkpoint".into(),
            PlayError::Finished => "finished".into(),
            PlayError::NotFinished => "not finished".into(),
            PlayError::Rating(field) => (*field).into(),
            PlayError::Log(_) => "survey log".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    Done,
}

/// One game with a human player 1 and a greedy assistant.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: Uuid,
    pub seed: u64,
    pub tick_rate: u32,
    state: GameState,
    assistant: Arc<QNetwork>,
    mode: ObsMode,
    stack: FrameStack,
    held: BTreeSet<HeldKey>,
}

impl Session {
    pub fn start(assistant: Arc<QNetwork>, env: &EnvConfig, seed: u64, tick_rate: u32) -> Result<Self, PlayError> {
        let env = EnvConfig {
            two_player: true,
            ..env.clone()
        };
        let mode = ObsMode::detect(assistant.spec(), &env).ok_or_else(|| {
            PlayError::Checkpoint(format!("network {} matches no observation mode", assistant.spec()))
        })?;
        check_compatible(&assistant, mode, &env).map_err(|e| PlayError::Checkpoint(e.to_string()))?;
        let state = GameState::reset(&env, seed).map_err(|e| PlayError::Checkpoint(e.to_string()))?;
        let stack = FrameStack::new(mode.capture(&state));
        Ok(Self {
            id: Uuid::new_v4(),
            seed,
            tick_rate,
            state,
            assistant,
            mode,
            stack,
            held: BTreeSet::new(),
        })
    }

    pub fn load_assistant(path: &Path) -> Result<Arc<QNetwork>, PlayError> {
        let ckpt = load_checkpoint(path).map_err(|e| PlayError::Checkpoint(e.to_string()))?;
        let net = QNetwork::new(ckpt.spec, ckpt.params).map_err(|e| PlayError::Checkpoint(e.to_string()))?;
        Ok(Arc::new(net))
    }

    pub fn status(&self) -> Status {
        if self.state.done {
            Status::Done
        } else {
            Status::Running
        }
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot::of(&self.state)
    }

    /// Replaces the held-key set; it takes effect on the next tick.
    pub fn set_input(&mut self, held: impl IntoIterator<Item = HeldKey>) {
        self.held = held.into_iter().collect();
    }

    /// Advances exactly one frame.
    pub fn tick(&mut self) -> Result<StateSnapshot, PlayError> {
        if self.state.done {
            return Err(PlayError::Finished);
        }
        let human = resolve_human_action(&self.held);
        let q = self
            .assistant
            .forward(&self.stack.observation().flatten())
            .expect("assistant input checked at session start");
        let assistant = PlayerAction::TRAINING_SET[argmax(&q)];
        self.state.step(human, assistant).expect("session is running");
        self.stack.push(self.mode.capture(&self.state));
        Ok(self.snapshot())
    }

    /// Validates a survey and builds its log line.
    pub fn survey_record(&self, survey: &Survey) -> Result<SurveyRecord, PlayError> {
        if !self.state.done {
            return Err(PlayError::NotFinished);
        }
        if let Some(field) = survey.invalid_field() {
            return Err(PlayError::Rating(field));
        }
        Ok(SurveyRecord {
            timestamp_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            session_id: self.id.to_string(),
            seed: self.seed,
            final_score: self.state.score,
            outcome: self.state.outcome.map(|o| o.as_str().to_string()),
            helpful: survey.helpful,
            purposeful: survey.purposeful,
            role_perception: survey.role_perception,
            overall: survey.overall,
            comment: survey.comment.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub timestamp_utc: String,
    pub session_id: String,
    pub seed: u64,
    pub final_score: u32,
    pub outcome: Option<String>,
    pub helpful: u8,
    pub purposeful: u8,
    pub role_perception: u8,
    pub overall: u8,
    pub comment: String,
}

/// Append-only JSON-lines file shared by all sessions.
#[derive(Debug)]
pub struct SurveyLog {
    path: PathBuf,
    lock: Mutex<()>,
}

impl SurveyLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes the record and its newline with a single call.
    pub fn append(&self, record: &SurveyRecord) -> Result<(), PlayError> {
        let mut line = serde_json::to_string(record).expect("survey records serialise");
        line.push('\n');
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkSpec;

    fn keys(k: &[HeldKey]) -> BTreeSet<HeldKey> {
        k.iter().copied().collect()
    }

    fn net() -> Arc<QNetwork> {
        let spec = ObsMode::Feature.default_network(&EnvConfig::two_player());
        Arc::new(QNetwork::init(spec, 3).unwrap())
    }

    fn survey(helpful: u8) -> Survey {
        Survey {
            helpful,
            purposeful: 3,
            role_perception: 1,
            overall: 5,
            comment: "ok, \"fine\"\nreally".into(),
        }
    }

    #[test]
    fn key_resolution() {
        use HeldKey::*;
        assert_eq!(resolve_human_action(&keys(&[])), PlayerAction::Noop);
        assert_eq!(resolve_human_action(&keys(&[Left, Shoot])), PlayerAction::Shoot);
        assert_eq!(resolve_human_action(&keys(&[Left, Right])), PlayerAction::Noop);
        assert_eq!(resolve_human_action(&keys(&[Right])), PlayerAction::Right);
    }

    #[test]
    fn first_snapshot_is_reset_state() {
        let s = Session::start(net(), &EnvConfig::default(), 7, 30).unwrap();
        let snap = s.snapshot();
        assert_eq!((snap.frame, snap.lives, snap.score), (0, 5, 0));
        assert!(snap.p2_x.is_some());
    }

    #[test]
    fn holding_right_moves_by_speed() {
        let mut s = Session::start(net(), &EnvConfig::default(), 7, 30).unwrap();
        let x0 = s.snapshot().p1_x;
        s.set_input([HeldKey::Right]);
        for _ in 0..10 {
            s.tick().unwrap();
        }
        let c = EnvConfig::default();
        assert_eq!(
            s.snapshot().p1_x,
            (x0 + 10 * c.player_speed).min(c.field_width - c.ship_width)
        );
    }

    #[test]
    fn sessions_replay_identically() {
        let script = |s: &mut Session| {
            (0..300)
                .map(|i| {
                    if i % 50 == 0 {
                        s.set_input(if i % 100 == 0 {
                            vec![HeldKey::Shoot]
                        } else {
                            vec![HeldKey::Left]
                        });
                    }
                    s.tick().unwrap()
                })
                .collect::<Vec<_>>()
        };
        let mut a = Session::start(net(), &EnvConfig::default(), 4, 30).unwrap();
        let mut b = Session::start(net(), &EnvConfig::default(), 4, 30).unwrap();
        assert_eq!(script(&mut a), script(&mut b));
    }

    #[test]
    fn finished_session_refuses_ticks_and_takes_surveys() {
        let mut s = Session::start(net(), &EnvConfig::default(), 1, 30).unwrap();
        assert!(matches!(s.survey_record(&survey(3)), Err(PlayError::NotFinished)));
        let last = loop {
            let snap = s.tick().unwrap();
            if snap.done {
                break snap;
            }
        };
        assert!(last.outcome.is_some());
        assert_eq!(s.tick().unwrap_err().reason(), "finished");
        assert_eq!(s.survey_record(&survey(6)).unwrap_err().reason(), "helpful");

        let dir = tempfile::tempdir().unwrap();
        let log = SurveyLog::new(dir.path().join("surveys.jsonl"));
        log.append(&s.survey_record(&survey(4)).unwrap()).unwrap();
        let text = std::fs::read_to_string(log.path()).unwrap();
        assert_eq!(text.lines().count(), 1);
        let rec: SurveyRecord = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(rec.helpful, 4);
        assert_eq!(rec.final_score, s.state().score);
    }

    #[test]
    fn incompatible_assistant_refused() {
        let bad = Arc::new(QNetwork::init(NetworkSpec::default_feature(9), 0).unwrap());
        let err = Session::start(bad, &EnvConfig::default(), 1, 30).unwrap_err();
        assert_eq!(err.reason(), "checkpoint");
    }

    #[test]
    fn wire_format() {
        let m: ClientMessage = serde_json::from_str(r#"{"type":"input","held_keys":["Left","Shoot"]}"#).unwrap();
        assert_eq!(
            m,
            ClientMessage::Input {
                held_keys: vec![HeldKey::Left, HeldKey::Shoot]
            }
        );
        let short: ClientMessage = serde_json::from_str(r#"{"type":"input","held":["Left","Right"]}"#).unwrap();
        assert_eq!(
            short,
            ClientMessage::Input {
                held_keys: vec![HeldKey::Left, HeldKey::Right]
            }
        );
        let m: ClientMessage = serde_json::from_str(
            r#"{"type":"survey","helpful":1,"purposeful":2,"role_perception":3,"overall":4,"comment":""}"#,
        )
        .unwrap();
        assert!(matches!(m, ClientMessage::Survey(_)));
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"start","seed":1,"extra":0}"#).is_err());
        assert!(serde_json::from_str::<ClientMessage>(r#"{"type":"start"}"#).is_err());
        assert_eq!(serde_json::to_string(&ServerMessage::Ack).unwrap(), r#"{"type":"ack"}"#);
        assert_eq!(
            serde_json::to_string(&ServerMessage::error("finished")).unwrap(),
            r#"{"type":"error","reason":"finished"}"#
        );
        let s = Session::start(net(), &EnvConfig::default(), 7, 30).unwrap();
        let text = serde_json::to_string(&ServerMessage::State(s.snapshot())).unwrap();
        assert!(text.starts_with(r#"{"type":"state","frame":0,"#));
        let back: ServerMessage = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ServerMessage::State(s.snapshot()));
    }
}
