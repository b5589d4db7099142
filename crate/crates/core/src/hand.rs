//! Hand sign classification from fingertip/knuckle coordinate comparisons.
//!
//! Finger directions are image-axis directions of the frame they are
//! computed on. Gestures are named from the subject's point of view: in an
//! unmirrored frame the subject faces the camera, so "toward the subject's
//! left" is toward `+x`, i.e. [`FingerState::ExtendedRight`].

use std::ops::Sub;
use thiserror::Error;

use crate::config::HandParams;
use crate::gesture::{Gesture, HandSign};
use crate::landmarks::{Finger, HandFrame, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FingerState {
    /// tip above middle joint above knuckle (decreasing y).
    ExtendedUp,
    /// tip, middle joint, knuckle in decreasing x.
    ExtendedLeft,
    /// tip, middle joint, knuckle in increasing x.
    ExtendedRight,
    /// tip closer to the wrist than the middle joint.
    Folded,
    Other,
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("missing keypoint {0}")]
pub struct MissingKeypoint(pub usize);

/// Side length of the larger dimension of the landmark bounding box.
fn hand_size(frame: &HandFrame) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for lm in frame.landmarks() {
        x0 = x0.min(lm.x);
        y0 = y0.min(lm.y);
        x1 = x1.max(lm.x);
        y1 = y1.max(lm.y);
    }
    (x1 - x0).max(y1 - y0)
}

/// Classifies one finger with zero margin.
pub fn finger_state(frame: &HandFrame, finger: Finger) -> Result<FingerState, MissingKeypoint> {
    finger_state_with_margin(frame, finger, 0.0)
}

/// Like [`finger_state`], but every comparison must clear `margin`
/// (absolute, in normalized image units).
///
/// When a finger satisfies both the vertical and a horizontal extension
/// predicate (a diagonal finger), the axis with the larger tip-to-knuckle
/// displacement decides.
pub fn finger_state_with_margin(
    frame: &HandFrame,
    finger: Finger,
    margin: f64,
) -> Result<FingerState, MissingKeypoint> {
    let j = frame.finger(finger);
    for (idx, lm) in finger.keypoints().iter().zip([j.knuckle, j.middle, j.tip]) {
        if lm.visibility <= 0.0 {
            return Err(MissingKeypoint(*idx));
        }
    }
    let (tip, mid, base) = (j.tip.point(), j.middle.point(), j.knuckle.point());

    let up = tip.y < mid.y - margin && mid.y < base.y - margin;
    let left = tip.x < mid.x - margin && mid.x < base.x - margin;
    let right = tip.x > mid.x + margin && mid.x > base.x + margin;
    let horizontal = if left {
        Some(FingerState::ExtendedLeft)
    } else if right {
        Some(FingerState::ExtendedRight)
    } else {
        None
    };

    let state = match (up, horizontal) {
        (true, Some(h)) => {
            if (base.x - tip.x).abs() > (base.y - tip.y).abs() {
                h
            } else {
                FingerState::ExtendedUp
            }
        }
        (true, None) => FingerState::ExtendedUp,
        (false, Some(h)) => h,
        (false, None) => {
            let wrist = frame.wrist().point();
            if tip.distance(wrist) < mid.distance(wrist) - margin {
                FingerState::Folded
            } else {
                FingerState::Other
            }
        }
    };
    Ok(state)
}

/// Orientation of the closed hand: direction from the wrist to the middle
/// knuckle, snapped to the nearest of up/left/right/down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FistOrientation {
    Up,
    SubjectLeft,
    SubjectRight,
}

fn fist_orientation(frame: &HandFrame, sector_deg: f64) -> Option<FistOrientation> {
    let wrist = frame.wrist().point();
    let knuckle = frame.finger(Finger::Middle).knuckle.point();
    let d = knuckle.sub(wrist);
    if d.norm() == 0.0 {
        return None;
    }
    // Bearing with 0 = up (−y), 90 = +x (subject's left), measured in [-180, 180).
    let bearing = d.x.atan2(-d.y).to_degrees();
    let candidates = [
        (0.0, Some(FistOrientation::Up)),
        (90.0, Some(FistOrientation::SubjectLeft)),
        (-90.0, Some(FistOrientation::SubjectRight)),
        (180.0, None),
        (-180.0, None),
    ];
    let (center, orientation) = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (bearing - a.0).abs();
            let db = (bearing - b.0).abs();
            da.total_cmp(&db)
        })
        .expect("non-empty");
    if (bearing - center).abs() <= sector_deg {
        orientation
    } else {
        None
    }
}

/// Finger states of one frame in `Finger::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandShape {
    pub thumb: FingerState,
    pub fingers: [FingerState; 4],
    orientation: Option<FistOrientation>,
}

impl HandShape {
    pub fn of(frame: &HandFrame, params: &HandParams) -> Result<Self, MissingKeypoint> {
        let margin = params.hysteresis_margin * hand_size(frame);
        let state = |f| finger_state_with_margin(frame, f, margin);
        Ok(Self {
            thumb: state(Finger::Thumb)?,
            fingers: [
                state(Finger::Index)?,
                state(Finger::Middle)?,
                state(Finger::Ring)?,
                state(Finger::Pinky)?,
            ],
            orientation: fist_orientation(frame, params.fist_sector_deg),
        })
    }

    fn all(&self, s: FingerState) -> bool {
        self.fingers.iter().all(|f| *f == s)
    }

    fn index_only(&self, s: FingerState) -> bool {
        self.fingers[0] == s && self.fingers[1..].iter().all(|f| *f == FingerState::Folded)
    }

    /// Every sign whose predicate holds. At most one by construction.
    pub fn satisfied(&self) -> Vec<HandSign> {
        use FingerState::*;
        // Subject-egocentric directions in an unmirrored frame.
        let toward_left = ExtendedRight;
        let toward_right = ExtendedLeft;
        let mut out = Vec::new();
        if self.index_only(ExtendedUp) {
            out.push(HandSign::PointUp);
        }
        if self.all(ExtendedUp) && self.thumb != Folded {
            out.push(HandSign::PalmOut);
        }
        if self.index_only(toward_left) {
            out.push(HandSign::PointLeft);
        }
        if self.index_only(toward_right) {
            out.push(HandSign::PointRight);
        }
        if self.all(toward_left) {
            out.push(HandSign::SidewaysLeft);
        }
        if self.all(toward_right) {
            out.push(HandSign::SidewaysRight);
        }
        if self.all(Folded) {
            match self.orientation {
                Some(FistOrientation::Up) => out.push(HandSign::Fist),
                Some(FistOrientation::SubjectLeft) => out.push(HandSign::FistLeft),
                Some(FistOrientation::SubjectRight) => out.push(HandSign::FistRight),
                None => {}
            }
        }
        out
    }
}

/// Signs whose predicates hold on an (already unmirrored) frame.
pub fn satisfied_signs(frame: &HandFrame, params: &HandParams) -> Vec<HandSign> {
    HandShape::of(frame, params).map_or_else(|_| Vec::new(), |s| s.satisfied())
}

/// Classifies an unmirrored frame. Missing keypoints yield `Neutral`.
pub fn classify_hand(frame: &HandFrame, params: &HandParams) -> Gesture {
    match satisfied_signs(frame, params).as_slice() {
        [one] => Gesture::Hand(*one),
        _ => Gesture::Neutral,
    }
}

/// Unmirrors, then classifies.
pub fn classify_hand_frame(frame: &HandFrame, params: &HandParams) -> Gesture {
    classify_hand(&frame.unmirror(), params)
}

/// Unit vector for a bearing measured like [`fist_orientation`] does.
pub fn bearing_vector(bearing_deg: f64) -> Point2 {
    let r = bearing_deg.to_radians();
    Point2::new(r.sin(), -r.cos())
}
