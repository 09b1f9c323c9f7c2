//! End-to-end checks of the play-test server over real sockets.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use coop_invaders::agent::ObsMode;
use coop_invaders::env::{EnvConfig, GameState};
use coop_invaders::nn::{save_checkpoint, Checkpoint, CheckpointMeta, QNetwork};
use coop_invaders::play::{ServerMessage, StateSnapshot, SurveyLog};
use coop_invaders_cli::server::{bind, serve, ServerConfig};
use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

const FPS: u32 = 2000;

fn write_assistant(dir: &Path) -> PathBuf {
    let env = EnvConfig::two_player();
    let spec = ObsMode::Feature.default_network(&env);
    let net = QNetwork::init(spec.clone(), 4).unwrap();
    let path = dir.join("assistant.cqn");
    let ckpt = Checkpoint {
        spec,
        params: net.params().clone(),
        meta: CheckpointMeta::default(),
    };
    save_checkpoint(&ckpt, &path).unwrap();
    path
}

async fn start_server(assistant_ckpt: PathBuf, survey_log: PathBuf) -> SocketAddr {
    let (listener, addr) = bind("127.0.0.1", 0).await.unwrap();
    let config = ServerConfig {
        assistant_ckpt,
        env: EnvConfig::default(),
        fps: FPS,
        surveys: SurveyLog::new(survey_log),
    };
    tokio::spawn(serve(listener, config));
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    connect_async(format!("ws://{addr}/play")).await.unwrap().0
}

async fn send(ws: &mut Ws, v: Value) {
    ws.send(Message::Text(v.to_string().into())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(30), ws.next())
            .await
            .expect("server went quiet")
            .expect("connection closed")
            .unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(text.as_str()).unwrap();
        }
    }
}

async fn recv_state(ws: &mut Ws) -> StateSnapshot {
    match recv(ws).await {
        ServerMessage::State(s) => s,
        other => panic!("expected a state, got {other:?}"),
    }
}

async fn expect_error(ws: &mut Ws, reason: &str) {
    loop {
        match recv(ws).await {
            ServerMessage::State(_) => continue,
            ServerMessage::Error { reason: r } => {
                assert_eq!(r, reason);
                return;
            }
            ServerMessage::Ack => panic!("unexpected ack"),
        }
    }
}

async fn play_to_end(ws: &mut Ws) -> StateSnapshot {
    loop {
        let s = recv_state(ws).await;
        if s.done {
            return s;
        }
    }
}

fn survey(helpful: u8) -> Value {
    json!({"type": "survey", "helpful": helpful, "purposeful": 4, "role_perception": 2, "overall": 5, "comment": "nice"})
}

#[tokio::test]
async fn healthz_answers_ok() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start_server(write_assistant(dir.path()), dir.path().join("s.jsonl")).await;
    let mut stream = TcpStream::connect(addr).await.unwrap();
    stream
        .write_all(b"GET /healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
}

#[tokio::test]
async fn full_session_with_survey() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("surveys.jsonl");
    let addr = start_server(write_assistant(dir.path()), log.clone()).await;
    let mut ws = connect(addr).await;

    send(&mut ws, json!({"type": "input", "held_keys": ["Left"]})).await;
    expect_error(&mut ws, "not started").await;
    send(&mut ws, survey(3)).await;
    expect_error(&mut ws, "not finished").await;

    send(&mut ws, json!({"type": "start", "seed": 21})).await;
    let first = recv_state(&mut ws).await;
    assert_eq!(first.frame, 0);
    assert_eq!(first.score, 0);
    assert!(!first.done);
    let reset = GameState::reset(&EnvConfig::two_player(), 21).unwrap();
    assert_eq!(first.p1_x, reset.p1.x);

    send(&mut ws, json!({"type": "start", "seed": 1})).await;
    expect_error(&mut ws, "already started").await;

    send(&mut ws, json!({"type": "input", "held_keys": ["Right"]})).await;
    let mut last_x = first.p1_x;
    let mut moved = false;
    for _ in 0..40 {
        let s = recv_state(&mut ws).await;
        assert!(s.p1_x >= last_x, "p1 moved left while Right was held");
        moved |= s.p1_x > last_x;
        last_x = s.p1_x;
    }
    assert!(moved);
    send(&mut ws, json!({"type": "input", "held": []})).await;

    send(&mut ws, survey(3)).await;
    expect_error(&mut ws, "not finished").await;
    send(&mut ws, json!({"type": "bogus"})).await;
    match recv(&mut ws).await {
        ServerMessage::Error { reason } => assert!(reason.starts_with("malformed"), "{reason}"),
        ServerMessage::State(_) => {
            // A tick raced the reply; the next error must be the malformed one.
            loop {
                if let ServerMessage::Error { reason } = recv(&mut ws).await {
                    assert!(reason.starts_with("malformed"), "{reason}");
                    break;
                }
            }
        }
        ServerMessage::Ack => panic!("unexpected ack"),
    }

    let end = play_to_end(&mut ws).await;
    assert!(end.outcome.is_some());

    send(&mut ws, survey(9)).await;
    expect_error(&mut ws, "helpful").await;
    send(&mut ws, survey(4)).await;
    assert_eq!(recv(&mut ws).await, ServerMessage::Ack);
    send(&mut ws, survey(4)).await;
    expect_error(&mut ws, "already submitted").await;

    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let record: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(record["seed"], 21);
    assert_eq!(record["final_score"], end.score);
    assert_eq!(record["helpful"], 4);
    assert_eq!(record["comment"], "nice");
}

#[tokio::test]
async fn idle_session_matches_headless_replay() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start_server(write_assistant(dir.path()), dir.path().join("s.jsonl")).await;
    let mut ws = connect(addr).await;
    send(&mut ws, json!({"type": "start", "seed": 5})).await;
    let mut snapshots = vec![recv_state(&mut ws).await];
    for _ in 0..30 {
        snapshots.push(recv_state(&mut ws).await);
    }
    // With no keys held the human ship never moves, whatever the assistant does.
    let start = GameState::reset(&EnvConfig::two_player(), 5).unwrap().p1.x;
    for (i, s) in snapshots.iter().enumerate() {
        assert_eq!(s.frame, i as u64);
        assert_eq!(s.p1_x, start);
    }
}

#[tokio::test]
async fn unusable_checkpoint_refuses_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cqn");
    std::fs::write(&bad, b"CQN 1\nnot a checkpoint").unwrap();
    let addr = start_server(bad, dir.path().join("s.jsonl")).await;
    let mut ws = connect(addr).await;
    send(&mut ws, json!({"type": "start", "seed": 1})).await;
    assert_eq!(recv(&mut ws).await, ServerMessage::error("checkpoint"));

    let missing = start_server(dir.path().join("absent.cqn"), dir.path().join("s.jsonl")).await;
    let mut ws = connect(missing).await;
    send(&mut ws, json!({"type": "start", "seed": 1})).await;
    assert_eq!(recv(&mut ws).await, ServerMessage::error("checkpoint"));
}

#[tokio::test]
async fn restart_after_game_over() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start_server(write_assistant(dir.path()), dir.path().join("s.jsonl")).await;
    let mut ws = connect(addr).await;
    send(&mut ws, json!({"type": "start", "seed": 2})).await;
    play_to_end(&mut ws).await;
    send(&mut ws, json!({"type": "start", "seed": 3})).await;
    assert_eq!(recv_state(&mut ws).await.frame, 0);
}
