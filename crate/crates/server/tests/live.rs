use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio::time::{sleep_until, timeout, Instant};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use gesturequad_core::script::{scripted_frames, ScriptTiming};
use gesturequad_core::session::{read_session, SessionEvent};
use gesturequad_core::sim::Course;
use gesturequad_core::{GestureKind, RobotCommand, Settings};
use gesturequad_server::{start, ServeConfig, ServeSummary, CLOSE_BUSY, CLOSE_PROTOCOL};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

/// Short motions and cooldown so a few commands fit in a couple of seconds.
fn fast_settings() -> Settings {
    let mut s = Settings::bundled();
    s.pipeline.cooldown_ms = 150;
    s.motion.motion_duration = 0.2;
    s.motion.posture_duration = 0.2;
    s
}

fn fast_timing() -> ScriptTiming {
    // Dispatch 120 ms into each hold, idle again 470 ms in, next hold at 700.
    ScriptTiming {
        start_ms: 100,
        period_ms: 700,
        hold_frames: 5,
        frame_ms: 30,
        rest_ms: 60,
        tail_ms: 500,
    }
}

const PLAN: [RobotCommand; 4] = [
    RobotCommand::StrafeLeft,
    RobotCommand::GoForward,
    RobotCommand::StrafeRight,
    RobotCommand::RotateCCW,
];

fn config() -> ServeConfig {
    ServeConfig::new(fast_settings(), GestureKind::Body, Course::zigzag())
}

fn localhost() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

async fn connect(addr: SocketAddr, path: &str) -> Ws {
    connect_async(format!("ws://{addr}{path}")).await.unwrap().0
}

fn body_messages() -> Vec<(u64, String)> {
    scripted_frames(GestureKind::Body, &PLAN, &fast_timing())
        .iter()
        .map(|f| (f.timestamp_ms(), SessionEvent::from_frame(f).to_json()))
        .collect()
}

/// Sends the scripted frames at their scheduled wall-clock offsets.
async fn perform(producer: &mut Ws) {
    let t0 = Instant::now();
    for (t, text) in body_messages() {
        sleep_until(t0 + Duration::from_millis(t)).await;
        producer.send(Message::Text(text)).await.unwrap();
    }
    // Let the last frame reach the engine before the caller shuts down.
    tokio::time::sleep(Duration::from_millis(100)).await;
}

async fn next_json(ws: &mut Ws, within: Duration) -> serde_json::Value {
    loop {
        let msg = timeout(within, ws.next())
            .await
            .expect("no message in time")
            .expect("stream ended")
            .unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(&text).unwrap();
        }
    }
}

async fn close_code(ws: &mut Ws) -> (u16, String) {
    loop {
        match timeout(Duration::from_secs(2), ws.next()).await.unwrap() {
            Some(Ok(Message::Close(Some(frame)))) => {
                return (u16::from(frame.code), frame.reason.into_owned())
            }
            Some(Ok(Message::Close(None))) | None => panic!("closed without a code"),
            Some(Ok(_)) => {}
            Some(Err(e)) => panic!("socket error before close: {e}"),
        }
    }
}

fn actions(summary: &ServeSummary) -> Vec<RobotCommand> {
    summary.commands.iter().map(|c| c.command).collect()
}

#[tokio::test]
async fn observer_gets_state_within_one_period() {
    let server = start(localhost(), config()).await.unwrap();
    let mut observer = connect(server.local_addr(), "/observer").await;
    let mut producer = connect(server.local_addr(), "/producer").await;
    let (_, first) = body_messages().into_iter().next().unwrap();
    producer.send(Message::Text(first)).await.unwrap();

    let msg = next_json(&mut observer, Duration::from_millis(200)).await;
    assert_eq!(msg["type"], "state");
    for key in ["robot", "gesture", "phase", "cooldown_ms", "course"] {
        assert!(msg.get(key).is_some(), "missing {key} in {msg}");
    }
    assert!(msg["gesture"].is_string(), "{msg}");
    assert!(msg["phase"].is_string(), "{msg}");
    assert!(msg["robot"]["posture"].is_string(), "{msg}");
    for key in ["x", "y", "heading"] {
        assert!(msg["robot"][key].is_number(), "{msg}");
    }
    for key in ["next", "elapsed_ms", "completed"] {
        assert!(msg["course"].get(key).is_some(), "{msg}");
    }
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn malformed_message_closes_only_that_producer() {
    let server = start(localhost(), config()).await.unwrap();
    let addr = server.local_addr();
    let mut observer = connect(addr, "/observer").await;

    let mut bad = connect(addr, "/producer").await;
    bad.send(Message::Text("{\"type\":\"body_frame\",\"t_ms\":".into()))
        .await
        .unwrap();
    let (code, reason) = close_code(&mut bad).await;
    assert_eq!(code, CLOSE_PROTOCOL);
    assert!(reason.starts_with("ProtocolViolation"), "{reason}");
    drop(bad);

    // Wrong landmark count is rejected the same way.
    let mut short = loop {
        // The slot frees once the server has seen the previous close.
        let mut ws = connect(addr, "/producer").await;
        ws.send(Message::Text(
            "{\"type\":\"body_frame\",\"t_ms\":0,\"mirrored\":true,\"landmarks\":[]}".into(),
        ))
        .await
        .unwrap();
        let (code, reason) = close_code(&mut ws).await;
        if code != CLOSE_BUSY {
            assert_eq!(code, CLOSE_PROTOCOL, "{reason}");
            break ws;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    };
    let _ = short.close(None).await;
    drop(short);

    let mut good = loop {
        tokio::time::sleep(Duration::from_millis(20)).await;
        let mut ws = connect(addr, "/producer").await;
        let (_, first) = body_messages().into_iter().next().unwrap();
        ws.send(Message::Text(first)).await.unwrap();
        // A busy producer would be closed right away.
        match timeout(Duration::from_millis(200), ws.next()).await {
            Ok(Some(Ok(Message::Close(_)))) => continue,
            _ => break ws,
        }
    };
    perform(&mut good).await;
    let msg = next_json(&mut observer, Duration::from_millis(500)).await;
    assert!(msg.get("type").is_some());
    let summary = server.shutdown().await.unwrap();
    assert_eq!(actions(&summary), PLAN);
}

#[tokio::test]
async fn second_producer_is_busy() {
    let server = start(localhost(), config()).await.unwrap();
    let addr = server.local_addr();
    let mut first = connect(addr, "/producer").await;
    let (_, msg) = body_messages().into_iter().next().unwrap();
    first.send(Message::Text(msg)).await.unwrap();
    tokio::time::sleep(Duration::from_millis(50)).await;

    let mut second = connect(addr, "/producer").await;
    assert_eq!(close_code(&mut second).await, (CLOSE_BUSY, "Busy".into()));

    // The first producer is unaffected.
    perform(&mut first).await;
    let summary = server.shutdown().await.unwrap();
    assert_eq!(actions(&summary), PLAN);
}

async fn run_with_observers(n: usize) -> (ServeSummary, Vec<Vec<RobotCommand>>) {
    let server = start(localhost(), config()).await.unwrap();
    let addr = server.local_addr();
    let mut observers = Vec::new();
    for _ in 0..n {
        observers.push(connect(addr, "/observer").await);
    }
    let readers: Vec<_> = observers
        .into_iter()
        .map(|mut ws| {
            tokio::spawn(async move {
                let mut seen = Vec::new();
                while let Some(Ok(msg)) = ws.next().await {
                    if let Message::Text(text) = msg {
                        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                        if v["type"] == "command" {
                            seen.push(serde_json::from_value(v["action"].clone()).unwrap());
                        }
                    }
                }
                seen
            })
        })
        .collect();
    let mut producer = connect(addr, "/producer").await;
    perform(&mut producer).await;
    let summary = server.shutdown().await.unwrap();
    let mut seen = Vec::new();
    for r in readers {
        seen.push(timeout(Duration::from_secs(2), r).await.unwrap().unwrap());
    }
    (summary, seen)
}

#[tokio::test]
async fn observers_do_not_change_commands() {
    let (alone, _) = run_with_observers(0).await;
    let (watched, seen) = run_with_observers(10).await;
    assert_eq!(actions(&alone), PLAN);
    assert_eq!(actions(&watched), PLAN);
    assert_eq!(seen.len(), 10);
    for s in seen {
        assert_eq!(s, PLAN);
    }
}

#[tokio::test]
async fn serves_console_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<title>console</title>").unwrap();
    let mut cfg = config();
    cfg.console_dir = Some(dir.path().to_path_buf());
    let server = start(localhost(), cfg).await.unwrap();

    let mut tcp = TcpStream::connect(server.local_addr()).await.unwrap();
    tcp.write_all(b"GET /index.html HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    tcp.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with("<title>console</title>"));

    // The websocket routes still win over the static fallback.
    let mut observer = connect(server.local_addr(), "/observer").await;
    assert_eq!(
        next_json(&mut observer, Duration::from_millis(500)).await["type"],
        "state"
    );
    server.shutdown().await.unwrap();
}

#[tokio::test]
async fn recording_is_a_valid_session() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("live.session");
    let mut cfg = config();
    cfg.record = Some(path.clone());
    let server = start(localhost(), cfg).await.unwrap();
    let mut producer = connect(server.local_addr(), "/producer").await;
    perform(&mut producer).await;
    let summary = server.shutdown().await.unwrap();

    let file = std::fs::File::open(&path).unwrap();
    let session = read_session(std::io::BufReader::new(file)).unwrap();
    assert_eq!(session.header.session_id, summary.session_id);
    assert_eq!(session.header.mode, GestureKind::Body);
    assert_eq!(session.header.config_hash, fast_settings().hash());
    let frames = session.events.iter().filter(|e| e.is_frame()).count();
    assert_eq!(frames, body_messages().len());
    let recorded: Vec<_> = session
        .events
        .iter()
        .filter_map(|e| match e {
            SessionEvent::Command { action, .. } => Some(*action),
            _ => None,
        })
        .collect();
    assert_eq!(recorded, PLAN);
    session.check_stability(5).unwrap();
}
