//! Scripted sessions: a command plan turned into a timed stream of
//! synthetic frames, as a camera-facing operator would produce it.

use crate::gesture::{gesture_for_command, Gesture, GestureKind, RobotCommand};
use crate::landmarks::Landmark;
use crate::session::Frame;
use crate::synth::{
    canonical_body_frame, canonical_hand_frame, mirror_body, mirror_hand, rest_body_frame,
    rest_hand_frame,
};

/// Frame timing of a scripted session, all in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptTiming {
    /// Time of the first gesture frame.
    pub start_ms: u64,
    /// Spacing between the first frames of consecutive gestures.
    pub period_ms: u64,
    /// Frames per gesture hold.
    pub hold_frames: u64,
    /// Spacing of frames within a hold.
    pub frame_ms: u64,
    /// Spacing of the rest-pose frames between holds.
    pub rest_ms: u64,
    /// Rest-pose frames keep coming this long after the last hold.
    pub tail_ms: u64,
}

impl Default for ScriptTiming {
    /// One 5-frame hold every 3.7 s: dispatch 200 ms into the hold, 1.5 s of
    /// motion and a 2 s cooldown that ends exactly at the next hold.
    fn default() -> Self {
        Self {
            start_ms: 1000,
            period_ms: 3700,
            hold_frames: 5,
            frame_ms: 50,
            rest_ms: 250,
            tail_ms: 3000,
        }
    }
}

/// Strafe/forward plan that captures the four zigzag waypoints with the
/// default motion profile.
pub fn zigzag_plan() -> Vec<RobotCommand> {
    use RobotCommand::*;
    let legs = [
        (StrafeLeft, 3),
        (GoForward, 3),
        (StrafeRight, 6),
        (GoForward, 3),
        (StrafeLeft, 6),
        (GoForward, 3),
        (StrafeRight, 6),
        (GoForward, 3),
    ];
    legs.iter()
        .flat_map(|&(c, n)| std::iter::repeat_n(c, n))
        .collect()
}

fn rounded(lm: Landmark) -> Landmark {
    let r = |v: f64| (v * 1e4).round() / 1e4;
    Landmark {
        x: r(lm.x),
        y: r(lm.y),
        ..lm
    }
}

/// Mirrored frames, coordinates rounded to 1e-4 like a landmark model's output.
fn frame(kind: GestureKind, gesture: Gesture, t: u64) -> Frame {
    match (kind, gesture) {
        (GestureKind::Body, Gesture::Body(p)) => {
            Frame::Body(mirror_body(&canonical_body_frame(p, t)).map_landmarks(rounded))
        }
        (GestureKind::Body, _) => {
            Frame::Body(mirror_body(&rest_body_frame(t)).map_landmarks(rounded))
        }
        (GestureKind::Hand, Gesture::Hand(s)) => {
            Frame::Hand(mirror_hand(&canonical_hand_frame(s, t)).map_landmarks(rounded))
        }
        (GestureKind::Hand, _) => {
            Frame::Hand(mirror_hand(&rest_hand_frame(t)).map_landmarks(rounded))
        }
    }
}

/// Frames that perform `plan` with `kind` gestures under `timing`.
pub fn scripted_frames(
    kind: GestureKind,
    plan: &[RobotCommand],
    timing: &ScriptTiming,
) -> Vec<Frame> {
    let mut out = Vec::new();
    let mut t = 0;
    let rest_until = |out: &mut Vec<Frame>, t: &mut u64, end: u64| {
        while *t < end {
            out.push(frame(kind, Gesture::Neutral, *t));
            *t += timing.rest_ms;
        }
    };
    for (i, command) in plan.iter().enumerate() {
        let hold_start = timing.start_ms + i as u64 * timing.period_ms;
        rest_until(&mut out, &mut t, hold_start);
        let gesture = gesture_for_command(kind, *command);
        for k in 0..timing.hold_frames {
            out.push(frame(kind, gesture, hold_start + k * timing.frame_ms));
        }
        t = hold_start + timing.hold_frames * timing.frame_ms;
    }
    let last_hold = timing.start_ms + plan.len().saturating_sub(1) as u64 * timing.period_ms;
    rest_until(&mut out, &mut t, last_hold + timing.tail_ms);
    out
}
