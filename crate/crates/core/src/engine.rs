//! One gesture-control session: frames in, classified gestures, commands,
//! robot motion and course progress out.
//!
//! Everything runs on the logical clock carried by the frames. The robot is
//! advanced up to each frame's timestamp before the frame is classified, so
//! a motion finishing between two frames starts its cooldown at the exact
//! completion time.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::body::classify_body_frame;
use crate::config::Settings;
use crate::gesture::{Gesture, GestureKind, RobotCommand};
use crate::hand::classify_hand_frame;
use crate::pipeline::{CommandEvent, Phase, Pipeline};
use crate::session::{Frame, Session, SessionEvent};
use crate::sim::{Course, CourseStatus, CourseTracker, Posture, SimError, Simulator};

/// Default simulation step.
pub const DEFAULT_TICK_MS: u64 = 10;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("frame at {got} ms arrived after logical time {now} ms")]
pub struct OutOfOrder {
    pub now: u64,
    pub got: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobotSnapshot {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub posture: Posture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CourseSnapshot {
    pub next: usize,
    pub elapsed_ms: u64,
    pub completed: bool,
}

impl From<CourseStatus> for CourseSnapshot {
    fn from(s: CourseStatus) -> Self {
        Self {
            next: s.next_waypoint_index,
            elapsed_ms: s.elapsed_ms,
            completed: s.completed,
        }
    }
}

/// Telemetry view of the session at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub robot: RobotSnapshot,
    pub gesture: Gesture,
    pub phase: &'static str,
    pub cooldown_ms: u64,
    pub course: CourseSnapshot,
}

#[derive(Debug, Clone)]
pub struct Engine {
    settings: Settings,
    pipeline: Pipeline,
    sim: Simulator,
    tracker: CourseTracker,
    tick_ms: u64,
    last_gesture: Gesture,
    commands: Vec<CommandEvent>,
    rejected: Vec<(CommandEvent, SimError)>,
}

impl Engine {
    pub fn new(settings: Settings, mode: GestureKind, course: Course) -> Self {
        Self::with_tick(settings, mode, course, DEFAULT_TICK_MS)
    }

    pub fn with_tick(settings: Settings, mode: GestureKind, course: Course, tick_ms: u64) -> Self {
        assert!(tick_ms > 0, "tick must be positive");
        let sim = Simulator::new(course.start, settings.motion, course.arena, 0);
        Self {
            pipeline: Pipeline::new(mode, settings.pipeline),
            sim,
            tracker: CourseTracker::new(course),
            tick_ms,
            last_gesture: Gesture::Neutral,
            commands: Vec::new(),
            rejected: Vec::new(),
            settings,
        }
    }

    pub fn mode(&self) -> GestureKind {
        self.pipeline.mode()
    }

    pub fn now_ms(&self) -> u64 {
        self.sim.clock_ms()
    }

    pub fn commands(&self) -> &[CommandEvent] {
        &self.commands
    }

    /// Commands the robot refused because of its posture.
    pub fn rejected(&self) -> &[(CommandEvent, SimError)] {
        &self.rejected
    }

    pub fn course_status(&self) -> CourseStatus {
        self.tracker.status(self.now_ms())
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn phase(&self) -> Phase {
        self.pipeline.phase()
    }

    /// Runs the robot forward to `t_ms`, returning course and completion events.
    pub fn advance_to(&mut self, t_ms: u64) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        while self.sim.clock_ms() < t_ms {
            let dt = self.tick_ms.min(t_ms - self.sim.clock_ms());
            let tick = self.sim.tick(dt);
            for seg in &tick.path {
                for (_, at) in self.tracker.observe_segment(seg) {
                    let s = self.tracker.status(at);
                    out.push(SessionEvent::CourseStatus {
                        t_ms: at,
                        next: s.next_waypoint_index,
                        elapsed_ms: s.elapsed_ms,
                        completed: s.completed,
                    });
                }
            }
            if let Some(at) = tick.completed_at {
                self.pipeline
                    .motion_complete(at)
                    .expect("a motion only runs while the pipeline executes");
                out.push(SessionEvent::robot_state(at, self.sim.state()));
            }
        }
        out
    }

    /// Processes one frame; the returned events start with the frame itself
    /// (preceded by anything that happened since the last frame).
    pub fn handle_frame(&mut self, frame: &Frame) -> Result<Vec<SessionEvent>, OutOfOrder> {
        let t = frame.timestamp_ms();
        if t < self.now_ms() {
            return Err(OutOfOrder {
                now: self.now_ms(),
                got: t,
            });
        }
        let mut out = self.advance_to(t);
        out.push(SessionEvent::from_frame(frame));

        let gestures = &self.settings.gestures;
        let gesture = match frame {
            Frame::Body(f) => classify_body_frame(f, gestures),
            Frame::Hand(f) => classify_hand_frame(f, &gestures.hand),
        };
        self.last_gesture = gesture;
        out.push(SessionEvent::Gesture { t_ms: t, gesture });

        if let Some(ev) = self.pipeline.step(gesture, t) {
            out.push(SessionEvent::Command {
                action: ev.command,
                t_ms: t,
            });
            self.tracker.start(t);
            match self.sim.start(ev.command) {
                Ok(()) => out.push(SessionEvent::robot_state(t, self.sim.state())),
                Err(e) => {
                    self.sim
                        .hold(ev.command)
                        .expect("robot is idle while the pipeline dispatches");
                    self.rejected.push((ev, e));
                }
            }
            self.commands.push(ev);
        }
        Ok(out)
    }

    /// Lets any motion in progress run to completion.
    pub fn finish(&mut self) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        while !self.sim.state().is_idle() {
            let end = self.now_ms() + self.sim.remaining_ms();
            out.extend(self.advance_to(end));
        }
        out
    }

    pub fn snapshot(&self) -> Snapshot {
        let now = self.now_ms();
        let pose = self.sim.state().pose;
        Snapshot {
            robot: RobotSnapshot {
                x: pose.x,
                y: pose.y,
                heading: pose.heading,
                posture: self.sim.state().posture,
            },
            gesture: self.last_gesture,
            phase: self.pipeline.phase().name(),
            cooldown_ms: self.pipeline.cooldown_remaining(now),
            course: self.tracker.status(now).into(),
        }
    }

    /// Dispatched commands per source gesture.
    pub fn dispatch_counts(&self) -> BTreeMap<Gesture, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.commands {
            *counts.entry(c.source_gesture).or_insert(0) += 1;
        }
        counts
    }
}

/// How fast recorded frames are fed back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplaySpeed {
    /// Sleep so that frames arrive at their recorded spacing.
    Realtime,
    /// No waiting; logical time is unchanged.
    Max,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("record {index}: {source}")]
    Frame {
        index: usize,
        source: crate::landmarks::FrameError,
    },
    #[error(transparent)]
    Order(#[from] OutOfOrder),
}

/// Result of replaying a session through a fresh engine.
#[derive(Debug, Clone)]
pub struct Replay {
    pub engine: Engine,
    /// Every event the replay produced, frames included.
    pub events: Vec<SessionEvent>,
}

impl Replay {
    pub fn command_log(&self) -> String {
        self.events
            .iter()
            .filter(|e| matches!(e, SessionEvent::Command { .. }))
            .map(|e| e.to_json() + "\n")
            .collect()
    }

    pub fn commands(&self) -> Vec<RobotCommand> {
        self.engine.commands().iter().map(|c| c.command).collect()
    }
}

/// Feeds the frames of `session` into a new engine in recorded order.
pub fn replay(
    session: &Session,
    settings: &Settings,
    course: &Course,
    speed: ReplaySpeed,
) -> Result<Replay, ReplayError> {
    let mut engine = Engine::new(settings.clone(), session.header.mode, course.clone());
    let mut events = Vec::new();
    let mut previous: Option<(u64, std::time::Instant)> = None;
    for (index, record) in session.events.iter().enumerate() {
        let Some(frame) = record.to_frame() else {
            continue;
        };
        let frame = frame.map_err(|source| ReplayError::Frame { index, source })?;
        if speed == ReplaySpeed::Realtime {
            let t = frame.timestamp_ms();
            if let Some((t0, wall0)) = previous {
                let due = wall0 + std::time::Duration::from_millis(t - t0);
                if let Some(wait) = due.checked_duration_since(std::time::Instant::now()) {
                    std::thread::sleep(wait);
                }
            } else {
                previous = Some((t, std::time::Instant::now()));
            }
        }
        events.extend(engine.handle_frame(&frame)?);
    }
    events.extend(engine.finish());
    Ok(Replay { engine, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::BodyPose;
    use crate::synth::{canonical_body_frame, rest_body_frame};

    fn engine() -> Engine {
        Engine::new(Settings::bundled(), GestureKind::Body, Course::zigzag())
    }

    fn feed(
        e: &mut Engine,
        pose: Option<BodyPose>,
        from: u64,
        to: u64,
        step: u64,
    ) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        let mut t = from;
        while t < to {
            let f = match pose {
                Some(p) => canonical_body_frame(p, t),
                None => rest_body_frame(t),
            };
            out.extend(e.handle_frame(&Frame::Body(f)).unwrap());
            t += step;
        }
        out
    }

    #[test]
    fn hold_dispatches_and_motion_completes() {
        let mut e = engine();
        feed(&mut e, Some(BodyPose::HandsOnHips), 0, 250, 50);
        assert_eq!(e.commands().len(), 1);
        assert_eq!(e.commands()[0].timestamp_ms, 200);
        assert_eq!(e.phase(), Phase::Executing);
        let events = feed(&mut e, None, 250, 2000, 50);
        assert!(events.contains(&SessionEvent::RobotState {
            t_ms: 1700,
            x: 0.5,
            y: 0.0,
            heading: 0.0,
            posture: Posture::Standing,
        }));
        assert_eq!(e.phase(), Phase::Cooldown { deadline_ms: 3700 });
    }

    #[test]
    fn events_are_time_ordered() {
        let mut e = engine();
        let mut events = feed(&mut e, Some(BodyPose::LeftArmOut), 0, 5000, 33);
        events.extend(e.finish());
        assert!(events.windows(2).all(|w| w[0].t_ms() <= w[1].t_ms()));
    }

    #[test]
    fn lying_robot_refuses_locomotion_but_keeps_pacing() {
        let mut e = engine();
        // LayDown at 200, lying by 1200, cooldown until 3200.
        feed(&mut e, Some(BodyPose::TPose), 0, 250, 50);
        feed(&mut e, None, 250, 3200, 50);
        assert_eq!(e.simulator().state().posture, Posture::Lying);
        feed(&mut e, Some(BodyPose::HandsOnHips), 3200, 3450, 50);
        assert_eq!(e.rejected().len(), 1);
        assert_eq!(e.commands()[1].timestamp_ms, 3400);
        assert_eq!(e.phase(), Phase::Executing);
        feed(&mut e, None, 3450, 5000, 50);
        assert_eq!(e.phase(), Phase::Cooldown { deadline_ms: 6900 });
        assert_eq!(e.simulator().state().pose.x, 0.0);
    }

    #[test]
    fn stale_frame_is_rejected() {
        let mut e = engine();
        feed(&mut e, None, 0, 100, 50);
        let err = e
            .handle_frame(&Frame::Body(rest_body_frame(10)))
            .unwrap_err();
        assert_eq!(err, OutOfOrder { now: 50, got: 10 });
    }
}
