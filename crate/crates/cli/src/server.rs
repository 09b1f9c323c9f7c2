//! WebSocket play-test server: `/play` runs one session per connection,
//! `/healthz` answers 200.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::time::MissedTickBehavior;

use coop_invaders::env::EnvConfig;
use coop_invaders::play::{ClientMessage, ServerMessage, Session, Status, SurveyLog};

#[derive(Debug)]
pub struct ServerConfig {
    pub assistant_ckpt: PathBuf,
    pub env: EnvConfig,
    pub fps: u32,
    pub surveys: SurveyLog,
}

pub fn router(config: Arc<ServerConfig>) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/play", get(play))
        .with_state(config)
}

pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(config))).await
}

pub async fn bind(host: &str, port: u16) -> std::io::Result<(TcpListener, SocketAddr)> {
    let listener = TcpListener::bind((host, port)).await?;
    let addr = listener.local_addr()?;
    Ok((listener, addr))
}

async fn play(ws: WebSocketUpgrade, State(config): State<Arc<ServerConfig>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_connection(socket, config))
}

/// Connection-local state machine: no session, running, or done.
struct Connection {
    config: Arc<ServerConfig>,
    session: Option<Session>,
    surveyed: bool,
}

impl Connection {
    fn handle(&mut self, text: &str) -> Option<ServerMessage> {
        let msg: ClientMessage = match serde_json::from_str(text) {
            Ok(m) => m,
            Err(e) => return Some(ServerMessage::error(format!("malformed: {e}"))),
        };
        match msg {
            ClientMessage::Start { seed } => {
                if matches!(&self.session, Some(s) if s.status() == Status::Running) {
                    return Some(ServerMessage::error("already started"));
                }
                let started = Session::load_assistant(&self.config.assistant_ckpt)
                    .and_then(|net| Session::start(net, &self.config.env, seed, self.config.fps));
                match started {
                    Ok(s) => {
                        let first = ServerMessage::State(s.snapshot());
                        self.session = Some(s);
                        self.surveyed = false;
                        Some(first)
                    }
                    Err(e) => {
                        eprintln!("session refused: {e}");
                        Some(ServerMessage::error(e.reason()))
                    }
                }
            }
            ClientMessage::Input { held_keys } => match &mut self.session {
                Some(s) if s.status() == Status::Running => {
                    s.set_input(held_keys);
                    None
                }
                Some(_) => None,
                None => Some(ServerMessage::error("not started")),
            },
            ClientMessage::Survey(survey) => {
                let Some(session) = &self.session else {
                    return Some(ServerMessage::error("not finished"));
                };
                if self.surveyed {
                    return Some(ServerMessage::error("already submitted"));
                }
                let stored = session
                    .survey_record(&survey)
                    .and_then(|rec| self.config.surveys.append(&rec));
                match stored {
                    Ok(()) => {
                        self.surveyed = true;
                        Some(ServerMessage::Ack)
                    }
                    Err(e) => Some(ServerMessage::error(e.reason())),
                }
            }
        }
    }

    fn running(&self) -> bool {
        matches!(&self.session, Some(s) if s.status() == Status::Running)
    }
}

async fn run_connection(socket: WebSocket, config: Arc<ServerConfig>) {
    let (mut tx, mut rx) = socket.split();
    let period = Duration::from_secs_f64(1.0 / f64::from(config.fps.max(1)));
    let mut ticker = tokio::time::interval(period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let mut conn = Connection {
        config,
        session: None,
        surveyed: false,
    };
    loop {
        let reply = tokio::select! {
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let was_running = conn.running();
                    let reply = conn.handle(text.as_str());
                    if !was_running && conn.running() {
                        ticker.reset();
                    }
                    reply
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => None,
            },
            _ = ticker.tick(), if conn.running() => {
                let session = conn.session.as_mut().expect("running implies a session");
                match session.tick() {
                    Ok(snapshot) => Some(ServerMessage::State(snapshot)),
                    Err(e) => Some(ServerMessage::error(e.reason())),
                }
            }
        };
        if let Some(msg) = reply {
            let text = serde_json::to_string(&msg).expect("server messages serialise");
            if tx.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    }
}
