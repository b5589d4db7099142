//! Live session server.
//!
//! Endpoints:
//! - `GET /producer`: websocket, one at a time. Accepts `body_frame` and
//!   `hand_frame` JSON messages; a second producer is closed with code 1013
//!   ("Busy"), a malformed message closes its connection with code 1008.
//! - `GET /observer`: websocket, any number. Receives `state` snapshots every
//!   snapshot period and after every frame, plus a `command` message for each
//!   dispatch.
//! - anything else: static files from the console directory, if configured.
//!
//! All frames are stamped with the server's logical clock (milliseconds since
//! start) and go through one queue into a single engine task, so observers
//! can never influence the command stream.

use std::fs::File;
use std::io::BufWriter;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::Instant;
use tower_http::services::ServeDir;

use gesturequad_core::engine::{Engine, Snapshot};
use gesturequad_core::gesture::{GestureKind, RobotCommand};
use gesturequad_core::pipeline::CommandEvent;
use gesturequad_core::session::{Frame, SessionError, SessionEvent, SessionHeader, SessionWriter};
use gesturequad_core::sim::{Course, CourseStatus};
use gesturequad_core::Settings;

/// Close code sent to a second producer.
pub const CLOSE_BUSY: u16 = 1013;
/// Close code sent on a malformed or invalid message.
pub const CLOSE_PROTOCOL: u16 = 1008;
/// Close code sent to every client when the server stops.
pub const CLOSE_GOING_AWAY: u16 = 1001;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub settings: Settings,
    pub mode: GestureKind,
    pub course: Course,
    /// Session file to write, if any.
    pub record: Option<PathBuf>,
    /// Directory of static console assets, if any.
    pub console_dir: Option<PathBuf>,
    pub snapshot_period: Duration,
    /// Messages buffered per observer before the oldest are dropped.
    pub observer_buffer: usize,
}

impl ServeConfig {
    pub fn new(settings: Settings, mode: GestureKind, course: Course) -> Self {
        Self {
            settings,
            mode,
            course,
            record: None,
            console_dir: None,
            snapshot_period: Duration::from_millis(100),
            observer_buffer: 256,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("cannot create session file {path}: {source}")]
    CreateRecord {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("recording failed: {0}")]
    Record(#[from] SessionError),
    #[error("server task failed: {0}")]
    Task(String),
}

/// Server → observer messages.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Telemetry {
    State(Snapshot),
    Command { action: RobotCommand, t_ms: u64 },
}

/// Why a producer message was refused.
#[derive(Debug, Error, PartialEq)]
pub enum ProtocolViolation {
    #[error("ProtocolViolation: not a JSON object of a known type: {0}")]
    Malformed(String),
    #[error("ProtocolViolation: `{0}` messages are not accepted from producers")]
    UnexpectedType(String),
    #[error("ProtocolViolation: {0}")]
    InvalidFrame(String),
    #[error("ProtocolViolation: binary messages are not supported")]
    Binary,
}

/// Parses and validates one producer message.
pub fn parse_producer_message(text: &str) -> Result<Frame, ProtocolViolation> {
    let event: SessionEvent =
        serde_json::from_str(text).map_err(|e| ProtocolViolation::Malformed(e.to_string()))?;
    match event.to_frame() {
        Some(Ok(frame)) => Ok(frame),
        Some(Err(e)) => Err(ProtocolViolation::InvalidFrame(e.to_string())),
        None => {
            let kind = match event {
                SessionEvent::Gesture { .. } => "gesture",
                SessionEvent::Command { .. } => "command",
                SessionEvent::RobotState { .. } => "robot_state",
                SessionEvent::CourseStatus { .. } => "course_status",
                SessionEvent::BodyFrame { .. } | SessionEvent::HandFrame { .. } => "frame",
            };
            Err(ProtocolViolation::UnexpectedType(kind.to_string()))
        }
    }
}

/// What the session did, reported at shutdown.
#[derive(Debug, Clone)]
pub struct ServeSummary {
    pub session_id: String,
    pub mode: GestureKind,
    pub commands: Vec<CommandEvent>,
    pub course: CourseStatus,
}

type ShutdownReply = oneshot::Sender<Result<ServeSummary, ServeError>>;

#[derive(Clone)]
struct AppState {
    queue: mpsc::UnboundedSender<(Frame, Instant)>,
    telemetry: broadcast::Sender<Arc<String>>,
    producer_busy: Arc<AtomicBool>,
    started: Instant,
    closing: watch::Receiver<bool>,
}

/// A running server; dropping it without [`RunningServer::shutdown`] aborts it.
pub struct RunningServer {
    addr: SocketAddr,
    control: mpsc::UnboundedSender<ShutdownReply>,
    http: JoinHandle<()>,
    engine: JoinHandle<()>,
    stop_http: Option<oneshot::Sender<()>>,
    closing: watch::Sender<bool>,
}

impl RunningServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections, lets the current motion finish, flushes
    /// the recording and reports the session.
    pub async fn shutdown(mut self) -> Result<ServeSummary, ServeError> {
        if let Some(stop) = self.stop_http.take() {
            let _ = stop.send(());
        }
        let (tx, rx) = oneshot::channel();
        self.control
            .send(tx)
            .map_err(|_| ServeError::Task("engine task ended early".into()))?;
        let result = rx
            .await
            .map_err(|_| ServeError::Task("engine task dropped the shutdown request".into()))?;
        // The final telemetry is already broadcast; observers drain it and close.
        let _ = self.closing.send(true);
        let _ = tokio::time::timeout(Duration::from_secs(1), &mut self.http).await;
        self.http.abort();
        result
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        self.http.abort();
        self.engine.abort();
    }
}

fn new_session_id(created_at: u64) -> String {
    format!("{created_at:x}-{:x}", std::process::id())
}

/// Binds `addr` and starts serving.
pub async fn start(addr: SocketAddr, config: ServeConfig) -> Result<RunningServer, ServeError> {
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    let addr = listener
        .local_addr()
        .map_err(|source| ServeError::Bind { addr, source })?;

    let created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64);
    let header = SessionHeader {
        session_id: new_session_id(created_at),
        mode: config.mode,
        config_hash: config.settings.hash(),
        created_at,
    };
    let writer = match &config.record {
        Some(path) => {
            let file = File::create(path).map_err(|source| ServeError::CreateRecord {
                path: path.clone(),
                source,
            })?;
            Some(SessionWriter::new(BufWriter::new(file), &header)?)
        }
        None => None,
    };

    let started = Instant::now();
    let (telemetry, _) = broadcast::channel(config.observer_buffer.max(1));
    let (frames_tx, frames_rx) = mpsc::unbounded_channel();
    let (control_tx, control_rx) = mpsc::unbounded_channel();
    let engine = Engine::new(config.settings.clone(), config.mode, config.course.clone());
    let engine_task = tokio::spawn(run_engine(EngineTask {
        engine,
        writer,
        header,
        frames: frames_rx,
        control: control_rx,
        telemetry: telemetry.clone(),
        started,
        period: config.snapshot_period,
    }));

    let (closing_tx, closing_rx) = watch::channel(false);
    let state = AppState {
        closing: closing_rx,
        queue: frames_tx,
        telemetry,
        producer_busy: Arc::new(AtomicBool::new(false)),
        started,
    };
    let mut app = Router::new()
        .route("/producer", get(producer))
        .route("/observer", get(observer));
    if let Some(dir) = &config.console_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let app = app.with_state(state);

    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let http = tokio::spawn(async move {
        let result = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stop_rx.await;
            })
            .await;
        if let Err(e) = result {
            tracing::error!("http server stopped: {e}");
        }
    });

    Ok(RunningServer {
        addr,
        control: control_tx,
        http,
        engine: engine_task,
        stop_http: Some(stop_tx),
        closing: closing_tx,
    })
}

struct EngineTask {
    engine: Engine,
    writer: Option<SessionWriter<BufWriter<File>>>,
    header: SessionHeader,
    frames: mpsc::UnboundedReceiver<(Frame, Instant)>,
    control: mpsc::UnboundedReceiver<ShutdownReply>,
    telemetry: broadcast::Sender<Arc<String>>,
    started: Instant,
    period: Duration,
}

impl EngineTask {
    fn logical_ms(&self, at: Instant) -> u64 {
        let ms = at.saturating_duration_since(self.started).as_millis() as u64;
        ms.max(self.engine.now_ms())
    }

    fn publish(&self, message: &Telemetry) {
        let text = serde_json::to_string(message).expect("telemetry serializes");
        // No receivers is fine; lagging receivers lose their oldest messages.
        let _ = self.telemetry.send(Arc::new(text));
    }

    fn emit(&mut self, events: Vec<SessionEvent>, error: &mut Option<ServeError>) {
        for event in events {
            if let SessionEvent::Command { action, t_ms } = event {
                self.publish(&Telemetry::Command { action, t_ms });
            }
            if let (Some(writer), None) = (self.writer.as_mut(), error.as_ref()) {
                if let Err(e) = writer.record(&event) {
                    tracing::error!("recording stopped: {e}");
                    *error = Some(e.into());
                }
            }
        }
    }

    fn handle_frame(&mut self, frame: Frame, received: Instant, error: &mut Option<ServeError>) {
        let t = self.logical_ms(received);
        let frame = match frame {
            Frame::Body(mut f) => {
                f.timestamp_ms = t;
                Frame::Body(f)
            }
            Frame::Hand(mut f) => {
                f.timestamp_ms = t;
                Frame::Hand(f)
            }
        };
        match self.engine.handle_frame(&frame) {
            Ok(events) => self.emit(events, error),
            Err(e) => tracing::warn!("dropped frame: {e}"),
        }
        self.publish(&Telemetry::State(self.engine.snapshot()));
    }

    fn finish(mut self, mut error: Option<ServeError>) -> Result<ServeSummary, ServeError> {
        let events = self.engine.finish();
        self.emit(events, &mut error);
        self.publish(&Telemetry::State(self.engine.snapshot()));
        if let Some(writer) = self.writer.take() {
            if let Err(e) = writer.finish() {
                error.get_or_insert(e.into());
            }
        }
        if let Some(e) = error {
            return Err(e);
        }
        Ok(ServeSummary {
            session_id: self.header.session_id.clone(),
            mode: self.header.mode,
            commands: self.engine.commands().to_vec(),
            course: self.engine.course_status(),
        })
    }
}

async fn run_engine(mut task: EngineTask) {
    let mut ticker = tokio::time::interval(task.period);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    let mut error = None;
    loop {
        tokio::select! {
            biased;
            input = task.control.recv() => {
                let Some(reply) = input else { return };
                // Frames already queued belong to the session.
                while let Ok((frame, at)) = task.frames.try_recv() {
                    task.handle_frame(frame, at, &mut error);
                }
                let _ = reply.send(task.finish(error));
                return;
            }
            Some((frame, at)) = task.frames.recv() => task.handle_frame(frame, at, &mut error),
            _ = ticker.tick() => {
                let now = task.logical_ms(Instant::now());
                let events = task.engine.advance_to(now);
                task.emit(events, &mut error);
                task.publish(&Telemetry::State(task.engine.snapshot()));
            }
        }
    }
}

async fn producer(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| async move {
        if state.producer_busy.swap(true, Ordering::SeqCst) {
            close(socket, CLOSE_BUSY, "Busy".into()).await;
            return;
        }
        run_producer(socket, &state).await;
        state.producer_busy.store(false, Ordering::SeqCst);
    })
}

async fn close(mut socket: WebSocket, code: u16, reason: String) {
    let frame = CloseFrame {
        code,
        reason: reason.into(),
    };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn run_producer(mut socket: WebSocket, state: &AppState) {
    let mut closing = state.closing.clone();
    loop {
        let msg = tokio::select! {
            msg = socket.recv() => match msg {
                Some(msg) => msg,
                None => return,
            },
            _ = closing.changed() => {
                close(socket, CLOSE_GOING_AWAY, "Server shutting down".into()).await;
                return;
            }
        };
        let parsed = match msg {
            Ok(Message::Text(text)) => parse_producer_message(&text),
            Ok(Message::Binary(_)) => Err(ProtocolViolation::Binary),
            Ok(Message::Ping(_) | Message::Pong(_)) => continue,
            Ok(Message::Close(_)) | Err(_) => return,
        };
        match parsed {
            Ok(frame) => {
                if state.queue.send((frame, Instant::now())).is_err() {
                    return;
                }
            }
            Err(violation) => {
                tracing::warn!("closing producer: {violation}");
                let mut reason = violation.to_string();
                // Close reasons are limited to 123 bytes.
                if reason.len() > 120 {
                    let mut cut = 120;
                    while !reason.is_char_boundary(cut) {
                        cut -= 1;
                    }
                    reason.truncate(cut);
                }
                close(socket, CLOSE_PROTOCOL, reason).await;
                return;
            }
        }
    }
}

async fn observer(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| run_observer(socket, state))
}

async fn run_observer(mut socket: WebSocket, state: AppState) {
    let mut rx = state.telemetry.subscribe();
    let mut closing = state.closing.clone();
    tracing::debug!(
        "observer connected at {} ms",
        state.started.elapsed().as_millis()
    );
    loop {
        tokio::select! {
            biased;
            msg = rx.recv() => match msg {
                Ok(text) => {
                    if socket.send(Message::Text(text.as_ref().clone())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::debug!("observer lagged, dropped {n} messages");
                }
                Err(broadcast::error::RecvError::Closed) => return,
            },
            // Only reached once everything already broadcast has been sent.
            _ = closing.changed() => {
                close(socket, CLOSE_GOING_AWAY, "Server shutting down".into()).await;
                return;
            }
            incoming = socket.recv() => match incoming {
                // Observers have nothing to say; ignore anything but a close.
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}
