//! Planar kinematic model of the quadruped and the waypoint course.
//!
//! World frame: meters, `x` forward from the start line, `y` to the left,
//! heading in degrees counter-clockwise from `+x`. Each command is a fixed
//! motion primitive that plays out linearly over a fixed duration.

use std::ops::{Add, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::normalize_degrees;
use crate::gesture::RobotCommand;
use crate::landmarks::Point2;

/// The default course as a course file.
pub const ZIGZAG_COURSE: &str = include_str!("../data/zigzag_course.toml");

/// Robot body length, width and height in meters.
pub const ROBOT_FOOTPRINT: (f64, f64, f64) = (0.588, 0.22, 0.29);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionProfile {
    pub step_distance: f64,
    pub strafe_distance: f64,
    pub rotate_angle: f64,
    /// Seconds per locomotion command.
    pub motion_duration: f64,
    /// Seconds to lie down or stand up.
    pub posture_duration: f64,
    /// After each locomotion command, turn toward `user_anchor`.
    pub auto_face_user: bool,
    pub user_anchor: [f64; 2],
}

impl Default for MotionProfile {
    fn default() -> Self {
        Self {
            step_distance: 0.5,
            strafe_distance: 0.3,
            rotate_angle: 30.0,
            motion_duration: 1.5,
            posture_duration: 1.0,
            auto_face_user: false,
            user_anchor: [-1.5, 0.0],
        }
    }
}

impl MotionProfile {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("step_distance", self.step_distance),
            ("strafe_distance", self.strafe_distance),
            ("motion_duration", self.motion_duration),
            ("posture_duration", self.posture_duration),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.rotate_angle > 0.0 && self.rotate_angle <= 180.0) {
            return Err(format!(
                "rotate_angle must be in (0, 180], got {}",
                self.rotate_angle
            ));
        }
        if self.motion_ms() == 0 || self.posture_ms() == 0 {
            return Err("durations must be at least 1 ms".into());
        }
        Ok(())
    }

    pub fn motion_ms(&self) -> u64 {
        (self.motion_duration * 1000.0).round() as u64
    }

    pub fn posture_ms(&self) -> u64 {
        (self.posture_duration * 1000.0).round() as u64
    }

    pub fn duration_ms(&self, command: RobotCommand) -> u64 {
        if command.is_posture_change() {
            self.posture_ms()
        } else {
            self.motion_ms()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Self {
            min_x: -3.0,
            max_x: 9.0,
            min_y: -4.0,
            max_y: 4.0,
        }
    }
}

impl Arena {
    fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x.clamp(self.min_x, self.max_x),
            y.clamp(self.min_y, self.max_y),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Posture {
    Standing,
    Lying,
}

impl Posture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Posture::Standing => "standing",
            Posture::Lying => "lying",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// One motion being played out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    /// `None` for the automatic turn toward the user and for a refusal hold.
    pub command: Option<RobotCommand>,
    pub from: Pose,
    pub to: Pose,
    /// Signed heading change; `to.heading` is its normalized endpoint.
    pub heading_delta: f64,
    pub to_posture: Posture,
    pub elapsed_ms: u64,
    pub duration_ms: u64,
}

impl Motion {
    pub fn progress(&self) -> f64 {
        self.elapsed_ms as f64 / self.duration_ms as f64
    }

    fn pose_at(&self, progress: f64) -> Pose {
        Pose {
            x: self.from.x + (self.to.x - self.from.x) * progress,
            y: self.from.y + (self.to.y - self.from.y) * progress,
            heading: normalize_degrees(self.from.heading + self.heading_delta * progress),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub pose: Pose,
    pub posture: Posture,
    pub motion: Option<Motion>,
}

impl RobotState {
    pub fn new(pose: Pose) -> Self {
        Self {
            pose,
            posture: Posture::Standing,
            motion: None,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.motion.is_none()
    }
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{command} is not possible while {posture}")]
    InvalidPosture {
        command: RobotCommand,
        posture: &'static str,
    },
    #[error("robot is still executing a motion")]
    Busy,
}

/// Terminal state of `command` applied to an idle robot.
pub fn apply(
    state: &RobotState,
    command: RobotCommand,
    profile: &MotionProfile,
    arena: &Arena,
) -> Result<RobotState, SimError> {
    use RobotCommand::*;
    if !state.is_idle() {
        return Err(SimError::Busy);
    }
    let allowed = match command {
        StandUp => state.posture == Posture::Lying,
        _ => state.posture == Posture::Standing,
    };
    if !allowed {
        return Err(SimError::InvalidPosture {
            command,
            posture: state.posture.as_str(),
        });
    }

    let mut next = *state;
    let translate = |along: f64, distance: f64| {
        let r = along.to_radians();
        arena.clamp(
            state.pose.x + distance * r.cos(),
            state.pose.y + distance * r.sin(),
        )
    };
    let h = state.pose.heading;
    match command {
        GoForward => (next.pose.x, next.pose.y) = translate(h, profile.step_distance),
        GoBackward => (next.pose.x, next.pose.y) = translate(h, -profile.step_distance),
        StrafeLeft => (next.pose.x, next.pose.y) = translate(h + 90.0, profile.strafe_distance),
        StrafeRight => (next.pose.x, next.pose.y) = translate(h - 90.0, profile.strafe_distance),
        _ => {}
    }
    next.pose.heading = normalize_degrees(h + heading_delta(command, profile));
    next.posture = match command {
        LayDown => Posture::Lying,
        StandUp => Posture::Standing,
        _ => state.posture,
    };
    Ok(next)
}

fn heading_delta(command: RobotCommand, profile: &MotionProfile) -> f64 {
    match command {
        RobotCommand::RotateCCW => profile.rotate_angle,
        RobotCommand::RotateCW => -profile.rotate_angle,
        RobotCommand::TurnAround => 180.0,
        _ => 0.0,
    }
}

/// Straight-line displacement of the robot center over `[t0, t1]` ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub from: Point2,
    pub t0: u64,
    pub to: Point2,
    pub t1: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickOutcome {
    pub path: Vec<PathSegment>,
    /// Time at which the dispatched motion (including any automatic turn)
    /// finished, if that happened during this tick.
    pub completed_at: Option<u64>,
}

/// Robot plus its own logical clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    state: RobotState,
    profile: MotionProfile,
    arena: Arena,
    clock_ms: u64,
}

impl Simulator {
    pub fn new(start: Pose, profile: MotionProfile, arena: Arena, clock_ms: u64) -> Self {
        Self {
            state: RobotState::new(start),
            profile,
            arena,
            clock_ms,
        }
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn profile(&self) -> &MotionProfile {
        &self.profile
    }

    /// Time until the current motion finishes, counting an automatic turn
    /// only once it has started.
    pub fn remaining_ms(&self) -> u64 {
        self.state
            .motion
            .map_or(0, |m| m.duration_ms - m.elapsed_ms)
    }

    /// Begins `command` at the current clock.
    pub fn start(&mut self, command: RobotCommand) -> Result<(), SimError> {
        let target = apply(&self.state, command, &self.profile, &self.arena)?;
        self.state.motion = Some(Motion {
            command: Some(command),
            from: self.state.pose,
            to: target.pose,
            heading_delta: heading_delta(command, &self.profile),
            to_posture: target.posture,
            elapsed_ms: 0,
            duration_ms: self.profile.duration_ms(command),
        });
        Ok(())
    }

    /// Keeps the robot still for the nominal duration of a refused
    /// command, so refusals pace the operator like real motions do.
    pub fn hold(&mut self, command: RobotCommand) -> Result<(), SimError> {
        if !self.state.is_idle() {
            return Err(SimError::Busy);
        }
        self.state.motion = Some(Motion {
            command: None,
            from: self.state.pose,
            to: self.state.pose,
            heading_delta: 0.0,
            to_posture: self.state.posture,
            elapsed_ms: 0,
            duration_ms: self.profile.duration_ms(command),
        });
        Ok(())
    }

    fn auto_face(&self, finished: &Motion) -> Option<Motion> {
        let locomotion = finished.command.is_some_and(|c| !c.is_posture_change());
        if !self.profile.auto_face_user || !locomotion || self.state.posture != Posture::Standing {
            return None;
        }
        let pose = self.state.pose;
        let [ax, ay] = self.profile.user_anchor;
        let (dx, dy) = (ax - pose.x, ay - pose.y);
        if dx == 0.0 && dy == 0.0 {
            return None;
        }
        let target = normalize_degrees(dy.atan2(dx).to_degrees());
        let mut delta = normalize_degrees(target - pose.heading);
        if delta > 180.0 {
            delta -= 360.0;
        }
        if delta.abs() < 1e-9 {
            return None;
        }
        Some(Motion {
            command: None,
            from: pose,
            to: Pose {
                heading: target,
                ..pose
            },
            heading_delta: delta,
            to_posture: Posture::Standing,
            elapsed_ms: 0,
            duration_ms: self.profile.motion_ms(),
        })
    }

    /// Advances the clock by `dt_ms`.
    pub fn tick(&mut self, dt_ms: u64) -> TickOutcome {
        let end = self.clock_ms + dt_ms;
        let mut out = TickOutcome::default();
        while self.clock_ms < end {
            let Some(mut motion) = self.state.motion else {
                self.clock_ms = end;
                break;
            };
            let step = (motion.duration_ms - motion.elapsed_ms).min(end - self.clock_ms);
            let (from, t0) = (self.state.pose.position(), self.clock_ms);
            motion.elapsed_ms += step;
            self.clock_ms += step;

            let done = motion.elapsed_ms == motion.duration_ms;
            if done {
                self.state.pose = motion.to;
                self.state.posture = motion.to_posture;
                self.state.motion = None;
            } else {
                self.state.pose = motion.pose_at(motion.progress());
                self.state.motion = Some(motion);
            }
            let to = self.state.pose.position();
            if from != to {
                out.path.push(PathSegment {
                    from,
                    t0,
                    to,
                    t1: self.clock_ms,
                });
            }
            if done {
                match self.auto_face(&motion) {
                    Some(turn) => self.state.motion = Some(turn),
                    None => out.completed_at = Some(self.clock_ms),
                }
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CourseError {
    #[error("reading {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid course: {0}")]
    Invalid(String),
}

/// Waypoint course. File format (TOML):
///
/// ```toml
/// capture_radius = 0.3
/// waypoints = [[1.5, 1.0], [3.0, -1.0]]
/// [start]
/// x = 0.0
/// y = 0.0
/// heading = 0.0
/// [arena]            # optional
/// min_x = -3.0
/// max_x = 9.0
/// min_y = -4.0
/// max_y = 4.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    pub start: Pose,
    #[serde(default)]
    pub arena: Arena,
}

fn default_capture_radius() -> f64 {
    0.3
}

impl Course {
    /// Four waypoints alternating ±1 m laterally over 6 m forward.
    pub fn zigzag() -> Self {
        Self {
            waypoints: vec![[1.5, 1.0], [3.0, -1.0], [4.5, 1.0], [6.0, -1.0]],
            capture_radius: default_capture_radius(),
            start: Pose {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            arena: Arena::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CourseError> {
        if self.waypoints.len() < 2 {
            return Err(CourseError::Invalid(
                "at least two waypoints required".into(),
            ));
        }
        if self.capture_radius.is_nan() || self.capture_radius <= 0.0 {
            return Err(CourseError::Invalid(
                "capture_radius must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, CourseError> {
        let course: Course = toml::from_str(text)?;
        course.validate()?;
        Ok(course)
    }

    pub fn load(path: &Path) -> Result<Self, CourseError> {
        let text = std::fs::read_to_string(path).map_err(|source| CourseError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn waypoint(&self, i: usize) -> Point2 {
        Point2::new(self.waypoints[i][0], self.waypoints[i][1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseStatus {
    pub next_waypoint_index: usize,
    pub completed: bool,
    pub elapsed_ms: u64,
}

/// In-order waypoint capture and the course timer.
#[derive(Debug, Clone, PartialEq)]
pub struct CourseTracker {
    course: Course,
    next: usize,
    started_ms: Option<u64>,
    completed_at: Option<f64>,
}

impl CourseTracker {
    pub fn new(course: Course) -> Self {
        Self {
            course,
            next: 0,
            started_ms: None,
            completed_at: None,
        }
    }

    pub fn course(&self) -> &Course {
        &self.course
    }

    /// Starts the timer at the first command; later calls are no-ops.
    pub fn start(&mut self, t_ms: u64) {
        self.started_ms.get_or_insert(t_ms);
    }

    pub fn is_completed(&self) -> bool {
        self.completed_at.is_some()
    }

    fn capture(&mut self, t: f64) {
        self.next += 1;
        if self.next == self.course.waypoints.len() {
            self.completed_at = Some(t);
        }
    }

    /// Captures waypoints reached by a robot standing at `position`.
    pub fn course_step(&mut self, position: Point2, now_ms: u64) -> CourseStatus {
        while !self.is_completed()
            && position.distance(self.course.waypoint(self.next)) <= self.course.capture_radius
        {
            self.capture(now_ms as f64);
        }
        self.status(now_ms)
    }

    /// Captures waypoints along a straight path, at the exact time the
    /// path first enters each capture circle. Returns the capture times.
    pub fn observe_segment(&mut self, seg: &PathSegment) -> Vec<(usize, u64)> {
        let mut captured = Vec::new();
        let mut s_from = 0.0;
        let d = seg.to.sub(seg.from);
        let span = (seg.t1 - seg.t0) as f64;
        while !self.is_completed() {
            let wp = self.course.waypoint(self.next);
            let Some(s) = first_entry(seg.from, d, wp, self.course.capture_radius, s_from) else {
                break;
            };
            let t = seg.t0 as f64 + s * span;
            let index = self.next;
            self.capture(t);
            captured.push((index, ceil_ms(t)));
            s_from = s;
        }
        captured
    }

    pub fn status(&self, now_ms: u64) -> CourseStatus {
        let elapsed_ms = match (self.started_ms, self.completed_at) {
            (Some(start), Some(done)) => ceil_ms(done).saturating_sub(start),
            (Some(start), None) => now_ms.saturating_sub(start),
            (None, _) => 0,
        };
        CourseStatus {
            next_waypoint_index: self.next,
            completed: self.is_completed(),
            elapsed_ms,
        }
    }
}

fn ceil_ms(t: f64) -> u64 {
    (t - 1e-6).ceil().max(0.0) as u64
}

/// Smallest `s` in `[s_min, 1]` with `|from + s·d − center| <= radius`.
fn first_entry(from: Point2, d: Point2, center: Point2, radius: f64, s_min: f64) -> Option<f64> {
    let start = from.add(d.scale(s_min));
    if start.distance(center) <= radius {
        return Some(s_min);
    }
    let a = d.dot(d);
    if a == 0.0 {
        return None;
    }
    let f = from.sub(center);
    let b = 2.0 * f.dot(d);
    let c = f.dot(f) - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = (-b - disc.sqrt()) / (2.0 * a);
    (s >= s_min && s <= 1.0).then_some(s)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn idle_at(x: f64, y: f64, heading: f64) -> RobotState {
        RobotState::new(Pose { x, y, heading })
    }

    fn run(state: RobotState, cmds: &[RobotCommand]) -> RobotState {
        let p = MotionProfile::default();
        let a = Arena::default();
        cmds.iter()
            .fold(state, |s, c| apply(&s, *c, &p, &a).unwrap())
    }

    #[test]
    fn forward_along_x() {
        let s = run(idle_at(0.0, 0.0, 0.0), &[RobotCommand::GoForward]);
        assert_eq!((s.pose.x, s.pose.y, s.pose.heading), (0.5, 0.0, 0.0));
    }

    #[test]
    fn strafe_is_lateral() {
        let s = run(idle_at(0.0, 0.0, 0.0), &[RobotCommand::StrafeLeft]);
        assert!((s.pose.y - 0.3).abs() < 1e-12 && s.pose.x.abs() < 1e-12);
        let s = run(idle_at(0.0, 0.0, 90.0), &[RobotCommand::StrafeRight]);
        assert!((s.pose.x - 0.3).abs() < 1e-12 && s.pose.y.abs() < 1e-12);
    }

    #[test]
    fn turn_around_wraps() {
        let s = run(idle_at(0.0, 0.0, 90.0), &[RobotCommand::TurnAround]);
        assert_eq!(s.pose.heading, 270.0);
    }

    #[test]
    fn posture_rules() {
        let p = MotionProfile::default();
        let a = Arena::default();
        let lying = run(idle_at(0.0, 0.0, 0.0), &[RobotCommand::LayDown]);
        assert_eq!(lying.posture, Posture::Lying);
        assert!(matches!(
            apply(&lying, RobotCommand::GoForward, &p, &a),
            Err(SimError::InvalidPosture { .. })
        ));
        assert!(apply(&idle_at(0.0, 0.0, 0.0), RobotCommand::StandUp, &p, &a).is_err());
        let up = apply(&lying, RobotCommand::StandUp, &p, &a).unwrap();
        assert_eq!(up.posture, Posture::Standing);
    }

    #[test]
    fn arena_clamps() {
        let s = run(idle_at(8.9, 0.0, 0.0), &[RobotCommand::GoForward]);
        assert_eq!(s.pose.x, 9.0);
    }

    #[test]
    fn tick_interpolates_and_completes() {
        let mut sim = Simulator::new(
            Pose {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            MotionProfile::default(),
            Arena::default(),
            0,
        );
        sim.start(RobotCommand::GoForward).unwrap();
        assert_eq!(sim.tick(750).completed_at, None);
        let m = sim.state().motion.unwrap();
        assert_eq!(m.progress(), 0.5);
        // Half of the remaining 750 ms.
        sim.tick(375);
        assert_eq!(sim.state().motion.unwrap().progress(), 0.75);
        assert!((sim.state().pose.x - 0.375).abs() < 1e-12);
        let out = sim.tick(1000);
        assert_eq!(out.completed_at, Some(1500));
        assert!(sim.state().is_idle());
        assert_eq!(sim.state().pose.x, 0.5);
        assert_eq!(sim.clock_ms(), 2125);
        // Idle ticks change nothing.
        let before = *sim.state();
        assert_eq!(sim.tick(100), TickOutcome::default());
        assert_eq!(*sim.state(), before);
    }

    #[test]
    fn busy_robot_rejects_commands() {
        let mut sim = Simulator::new(
            Pose {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            MotionProfile::default(),
            Arena::default(),
            0,
        );
        sim.start(RobotCommand::RotateCW).unwrap();
        assert_eq!(sim.start(RobotCommand::GoForward), Err(SimError::Busy));
    }

    #[test]
    fn hold_keeps_pose_for_nominal_duration() {
        let mut sim = Simulator::new(
            Pose {
                x: 1.0,
                y: 2.0,
                heading: 45.0,
            },
            MotionProfile::default(),
            Arena::default(),
            100,
        );
        sim.hold(RobotCommand::GoForward).unwrap();
        assert_eq!(sim.tick(1499).completed_at, None);
        let out = sim.tick(1);
        assert_eq!(out.completed_at, Some(1600));
        assert!(out.path.is_empty());
        assert_eq!(
            sim.state().pose,
            Pose {
                x: 1.0,
                y: 2.0,
                heading: 45.0
            }
        );
    }

    #[test]
    fn auto_face_turns_toward_anchor_before_completing() {
        let profile = MotionProfile {
            auto_face_user: true,
            user_anchor: [0.5, 2.0],
            ..MotionProfile::default()
        };
        let mut sim = Simulator::new(
            Pose {
                x: 0.0,
                y: 0.0,
                heading: 0.0,
            },
            profile,
            Arena::default(),
            0,
        );
        sim.start(RobotCommand::GoForward).unwrap();
        let out = sim.tick(1500);
        assert_eq!(out.completed_at, None);
        let turn = sim.state().motion.unwrap();
        assert_eq!(turn.command, None);
        assert!((turn.heading_delta - 90.0).abs() < 1e-9);
        let out = sim.tick(1500);
        assert_eq!(out.completed_at, Some(3000));
        assert!((sim.state().pose.heading - 90.0).abs() < 1e-9);
    }

    #[test]
    fn capture_by_distance() {
        let mut t = CourseTracker::new(Course {
            waypoints: vec![[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
            ..Course::zigzag()
        });
        t.start(0);
        let s = t.course_step(Point2::new(1.0, 0.05), 10);
        assert_eq!(s.next_waypoint_index, 1);
        // Waypoint 3 first: not captured, order matters.
        let s = t.course_step(Point2::new(3.0, 0.0), 20);
        assert_eq!(s.next_waypoint_index, 1);
        assert!(!s.completed);
        t.course_step(Point2::new(2.0, 0.0), 30);
        let s = t.course_step(Point2::new(3.0, 0.1), 40);
        assert!(s.completed);
        assert_eq!(s.elapsed_ms, 40);
        assert_eq!(t.status(99).elapsed_ms, 40);
    }

    #[test]
    fn segment_entry_time_is_exact() {
        let mut t = CourseTracker::new(Course {
            waypoints: vec![[1.0, 0.0], [5.0, 0.0]],
            ..Course::zigzag()
        });
        t.start(0);
        let caps = t.observe_segment(&PathSegment {
            from: Point2::new(0.0, 0.0),
            t0: 0,
            to: Point2::new(1.0, 0.0),
            t1: 1000,
        });
        // Enters the 0.3 m circle at x = 0.7.
        assert_eq!(caps, vec![(0, 700)]);
    }

    #[test]
    fn bundled_course_file_is_the_zigzag() {
        assert_eq!(Course::from_toml(ZIGZAG_COURSE).unwrap(), Course::zigzag());
    }

    #[test]
    fn course_file_round_trip() {
        let c = Course::zigzag();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(Course::from_toml(&text).unwrap(), c);
        assert!(
            Course::from_toml("waypoints = [[1.0, 0.0]]\n[start]\nx=0.0\ny=0.0\nheading=0.0")
                .is_err()
        );
    }

    fn command() -> impl Strategy<Value = RobotCommand> {
        proptest::sample::select(RobotCommand::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn turn_around_twice_is_identity(h in 0.0f64..360.0) {
            let s = run(idle_at(0.0, 0.0, h), &[RobotCommand::TurnAround, RobotCommand::TurnAround]);
            prop_assert!((s.pose.heading - h).abs() < 1e-9);
        }

        #[test]
        fn rotations_cancel(h in 0.0f64..360.0) {
            let s = run(idle_at(0.0, 0.0, h), &[RobotCommand::RotateCCW, RobotCommand::RotateCW]);
            let d = (s.pose.heading - h).rem_euclid(360.0);
            prop_assert!(d.min(360.0 - d) < 1e-9);
        }

        #[test]
        fn forward_back_cancels(x in -2.0f64..8.0, y in -3.0f64..3.0, h in 0.0f64..360.0) {
            let s = run(idle_at(x, y, h), &[RobotCommand::GoForward, RobotCommand::GoBackward]);
            prop_assert!((s.pose.x - x).abs() < 1e-9 && (s.pose.y - y).abs() < 1e-9);
        }

        #[test]
        fn state_invariants_hold(cmds in proptest::collection::vec(command(), 0..40)) {
            let p = MotionProfile::default();
            let a = Arena::default();
            let mut s = idle_at(0.0, 0.0, 0.0);
            for c in cmds {
                if let Ok(next) = apply(&s, c, &p, &a) {
                    s = next;
                }
                prop_assert!((0.0..360.0).contains(&s.pose.heading));
                prop_assert!(s.pose.x >= a.min_x && s.pose.x <= a.max_x);
                prop_assert!(s.pose.y >= a.min_y && s.pose.y <= a.max_y);
            }
        }
    }
}
