//! Session files: one JSON object per line, header first.
//!
//! ```text
//! {"type":"header","session_id":"…","mode":"body","config_hash":"…","created_at":1760000000000}
//! {"type":"body_frame","t_ms":0,"mirrored":true,"landmarks":[{"x":0.5,"y":0.2,"v":1.0}, …]}
//! {"type":"gesture","t_ms":0,"gesture":"Neutral"}
//! {"type":"command","action":"GoForward","t_ms":1200}
//! {"type":"robot_state","t_ms":1200,"x":0.0,"y":0.0,"heading":0.0,"posture":"standing"}
//! {"type":"course_status","t_ms":2400,"next":1,"elapsed_ms":1200,"completed":false}
//! ```
//!
//! Frame records use the same shape as the live wire protocol.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{Gesture, GestureKind, RobotCommand};
use crate::landmarks::{BodyFrame, FrameError, HandFrame, Landmark, Side};
use crate::sim::{Posture, RobotState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    pub mode: GestureKind,
    pub config_hash: String,
    /// Wall-clock creation time, Unix milliseconds.
    pub created_at: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum HeaderLine {
    Header(SessionHeader),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    BodyFrame {
        t_ms: u64,
        mirrored: bool,
        landmarks: Vec<Landmark>,
    },
    HandFrame {
        t_ms: u64,
        mirrored: bool,
        handedness: Side,
        landmarks: Vec<Landmark>,
    },
    Gesture {
        t_ms: u64,
        gesture: Gesture,
    },
    Command {
        action: RobotCommand,
        t_ms: u64,
    },
    RobotState {
        t_ms: u64,
        x: f64,
        y: f64,
        heading: f64,
        posture: Posture,
    },
    CourseStatus {
        t_ms: u64,
        next: usize,
        elapsed_ms: u64,
        completed: bool,
    },
}

/// A validated landmark frame of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Body(BodyFrame),
    Hand(HandFrame),
}

impl Frame {
    pub fn timestamp_ms(&self) -> u64 {
        match self {
            Frame::Body(f) => f.timestamp_ms,
            Frame::Hand(f) => f.timestamp_ms,
        }
    }
}

impl SessionEvent {
    pub fn t_ms(&self) -> u64 {
        match self {
            SessionEvent::BodyFrame { t_ms, .. }
            | SessionEvent::HandFrame { t_ms, .. }
            | SessionEvent::Gesture { t_ms, .. }
            | SessionEvent::Command { t_ms, .. }
            | SessionEvent::RobotState { t_ms, .. }
            | SessionEvent::CourseStatus { t_ms, .. } => *t_ms,
        }
    }

    pub fn is_frame(&self) -> bool {
        matches!(
            self,
            SessionEvent::BodyFrame { .. } | SessionEvent::HandFrame { .. }
        )
    }

    pub fn from_frame(frame: &Frame) -> Self {
        match frame {
            Frame::Body(f) => SessionEvent::BodyFrame {
                t_ms: f.timestamp_ms,
                mirrored: f.mirrored,
                landmarks: f.landmarks().to_vec(),
            },
            Frame::Hand(f) => SessionEvent::HandFrame {
                t_ms: f.timestamp_ms,
                mirrored: f.mirrored,
                handedness: f.handedness,
                landmarks: f.landmarks().to_vec(),
            },
        }
    }

    /// The validated frame carried by a frame record, `None` otherwise.
    pub fn to_frame(&self) -> Option<Result<Frame, FrameError>> {
        match self {
            SessionEvent::BodyFrame {
                t_ms,
                mirrored,
                landmarks,
            } => Some(BodyFrame::new(*t_ms, landmarks.clone(), *mirrored).map(Frame::Body)),
            SessionEvent::HandFrame {
                t_ms,
                mirrored,
                handedness,
                landmarks,
            } => Some(
                HandFrame::new(*t_ms, landmarks.clone(), *handedness, *mirrored).map(Frame::Hand),
            ),
            _ => None,
        }
    }

    pub fn robot_state(t_ms: u64, state: &RobotState) -> Self {
        SessionEvent::RobotState {
            t_ms,
            x: state.pose.x,
            y: state.pose.y,
            heading: state.pose.heading,
            posture: state.posture,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("session events serialize")
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("event at {got} ms recorded after one at {previous} ms")]
    OrderViolation { previous: u64, got: u64 },
    #[error("corrupt record at line {line}: {reason}")]
    CorruptRecord { line: usize, reason: String },
}

/// Appends events to a session file, enforcing timestamp order.
pub struct SessionWriter<W: Write> {
    out: W,
    last_ms: Option<u64>,
}

impl<W: Write> SessionWriter<W> {
    pub fn new(mut out: W, header: &SessionHeader) -> Result<Self, SessionError> {
        let line =
            serde_json::to_string(&HeaderLine::Header(header.clone())).expect("header serializes");
        writeln!(out, "{line}")?;
        Ok(Self { out, last_ms: None })
    }

    pub fn record(&mut self, event: &SessionEvent) -> Result<(), SessionError> {
        let t = event.t_ms();
        if let Some(previous) = self.last_ms {
            if t < previous {
                return Err(SessionError::OrderViolation { previous, got: t });
            }
        }
        writeln!(self.out, "{}", event.to_json())?;
        self.last_ms = Some(t);
        Ok(())
    }

    /// Flushes and returns the sink.
    pub fn finish(mut self) -> Result<W, SessionError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub header: SessionHeader,
    pub events: Vec<SessionEvent>,
}

impl Session {
    /// Every event that is not an input frame.
    pub fn derived_events(&self) -> impl Iterator<Item = &SessionEvent> {
        self.events.iter().filter(|e| !e.is_frame())
    }

    /// Checks that each command follows at least `k` identical gesture
    /// records that map to it, counted since the previous command.
    pub fn check_stability(&self, k: u32) -> Result<(), String> {
        let mut run: Option<(Gesture, u32)> = None;
        for event in &self.events {
            match event {
                SessionEvent::Gesture { gesture, .. } => {
                    run = match run {
                        Some((g, n)) if g == *gesture => Some((g, n + 1)),
                        _ => Some((*gesture, 1)),
                    };
                }
                SessionEvent::Command { action, t_ms } => {
                    match run {
                        Some((g, n))
                            if n >= k
                                && crate::gesture::map_gesture_to_command(g) == Some(*action) => {}
                        _ => {
                            return Err(format!(
                                "command {action} at {t_ms} ms lacks {k} stable frames"
                            ))
                        }
                    }
                    run = None;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn corrupt(line: usize, reason: impl ToString) -> SessionError {
    SessionError::CorruptRecord {
        line,
        reason: reason.to_string(),
    }
}

/// Parses a whole session. Line numbers in errors are 1-based.
pub fn read_session(input: impl BufRead) -> Result<Session, SessionError> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => {
            let HeaderLine::Header(h) = serde_json::from_str(&line?).map_err(|e| corrupt(1, e))?;
            h
        }
        None => return Err(corrupt(1, "missing header")),
    };
    let mut events = Vec::new();
    let mut last = 0;
    for (i, line) in lines {
        let n = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: SessionEvent = serde_json::from_str(&line).map_err(|e| corrupt(n, e))?;
        if event.t_ms() < last {
            return Err(corrupt(
                n,
                format!("timestamp {} before {last}", event.t_ms()),
            ));
        }
        if let Some(Err(e)) = event.to_frame() {
            return Err(corrupt(n, e));
        }
        last = event.t_ms();
        events.push(event);
    }
    Ok(Session { header, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rest_body_frame;

    fn header() -> SessionHeader {
        SessionHeader {
            session_id: "s1".into(),
            mode: GestureKind::Body,
            config_hash: "abc".into(),
            created_at: 0,
        }
    }

    fn write(events: &[SessionEvent]) -> Vec<u8> {
        let mut w = SessionWriter::new(Vec::new(), &header()).unwrap();
        for e in events {
            w.record(e).unwrap();
        }
        w.finish().unwrap()
    }

    #[test]
    fn body_frame_then_command_round_trips() {
        let events = vec![
            SessionEvent::from_frame(&Frame::Body(rest_body_frame(10))),
            SessionEvent::Command {
                action: RobotCommand::GoForward,
                t_ms: 20,
            },
        ];
        let bytes = write(&events);
        let s = read_session(bytes.as_slice()).unwrap();
        assert_eq!(s.header, header());
        assert_eq!(s.events, events);
    }

    #[test]
    fn command_line_has_exact_shape() {
        let e = SessionEvent::Command {
            action: RobotCommand::StrafeLeft,
            t_ms: 1200,
        };
        assert_eq!(
            e.to_json(),
            r#"{"type":"command","action":"StrafeLeft","t_ms":1200}"#
        );
    }

    #[test]
    fn out_of_order_is_rejected() {
        let mut w = SessionWriter::new(Vec::new(), &header()).unwrap();
        w.record(&SessionEvent::Gesture {
            t_ms: 50,
            gesture: Gesture::Neutral,
        })
        .unwrap();
        let err = w
            .record(&SessionEvent::Gesture {
                t_ms: 49,
                gesture: Gesture::Neutral,
            })
            .unwrap_err();
        assert!(matches!(
            err,
            SessionError::OrderViolation {
                previous: 50,
                got: 49
            }
        ));
    }

    #[test]
    fn empty_session_is_header_only() {
        let bytes = write(&[]);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(r#"{"type":"header""#));
        assert!(read_session(bytes.as_slice()).unwrap().events.is_empty());
    }

    #[test]
    fn truncation_reports_line() {
        let events: Vec<_> = (0..3)
            .map(|t| SessionEvent::Gesture {
                t_ms: t,
                gesture: Gesture::Neutral,
            })
            .collect();
        let mut bytes = write(&events);
        bytes.truncate(bytes.len() - 10);
        match read_session(bytes.as_slice()) {
            Err(SessionError::CorruptRecord { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_frame_is_corrupt() {
        let text = "{\"type\":\"header\",\"session_id\":\"x\",\"mode\":\"hand\",\"config_hash\":\"\",\"created_at\":0}\n\
                    {\"type\":\"hand_frame\",\"t_ms\":0,\"mirrored\":false,\"handedness\":\"left\",\"landmarks\":[]}\n";
        assert!(matches!(
            read_session(text.as_bytes()),
            Err(SessionError::CorruptRecord { line: 2, .. })
        ));
    }

    #[test]
    fn stability_check() {
        let g = |t, gesture| SessionEvent::Gesture { t_ms: t, gesture };
        let hips = Gesture::Body(crate::gesture::BodyPose::HandsOnHips);
        let mut events: Vec<_> = (0..5).map(|t| g(t, hips)).collect();
        events.push(SessionEvent::Command {
            action: RobotCommand::GoForward,
            t_ms: 4,
        });
        let s = Session {
            header: header(),
            events: events.clone(),
        };
        assert!(s.check_stability(5).is_ok());
        assert!(s.check_stability(6).is_err());
    }
}
