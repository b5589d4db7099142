//! Skeleton landmark frames as delivered by an upstream pose estimator.
//!
//! Coordinates use the image convention: `x` grows rightward and `y` grows
//! downward, both normalized to `[0, 1]`. Anything described as "up" means
//! decreasing `y`.
//!
//! Body frames carry 33 landmarks and hand frames 21, indexed with the
//! MediaPipe Pose and MediaPipe Hands layouts respectively. The index tables
//! below are protocol constants: producers must emit landmarks in this order.
//!
//! A frame is *unmirrored* when it is in raw camera orientation: the subject
//! faces the camera, so the subject's own left side lies toward `+x`.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Sub};
use thiserror::Error;

pub const BODY_LANDMARK_COUNT: usize = 33;
pub const HAND_LANDMARK_COUNT: usize = 21;

/// Named indices into a [`BodyFrame`].
pub mod body_index {
    pub const NOSE: usize = 0;
    pub const LEFT_EYE_INNER: usize = 1;
    pub const LEFT_EYE: usize = 2;
    pub const LEFT_EYE_OUTER: usize = 3;
    pub const RIGHT_EYE_INNER: usize = 4;
    pub const RIGHT_EYE: usize = 5;
    pub const RIGHT_EYE_OUTER: usize = 6;
    pub const LEFT_EAR: usize = 7;
    pub const RIGHT_EAR: usize = 8;
    pub const MOUTH_LEFT: usize = 9;
    pub const MOUTH_RIGHT: usize = 10;
    pub const LEFT_SHOULDER: usize = 11;
    pub const RIGHT_SHOULDER: usize = 12;
    pub const LEFT_ELBOW: usize = 13;
    pub const RIGHT_ELBOW: usize = 14;
    pub const LEFT_WRIST: usize = 15;
    pub const RIGHT_WRIST: usize = 16;
    pub const LEFT_PINKY: usize = 17;
    pub const RIGHT_PINKY: usize = 18;
    pub const LEFT_INDEX: usize = 19;
    pub const RIGHT_INDEX: usize = 20;
    pub const LEFT_THUMB: usize = 21;
    pub const RIGHT_THUMB: usize = 22;
    pub const LEFT_HIP: usize = 23;
    pub const RIGHT_HIP: usize = 24;
    pub const LEFT_KNEE: usize = 25;
    pub const RIGHT_KNEE: usize = 26;
    pub const LEFT_ANKLE: usize = 27;
    pub const RIGHT_ANKLE: usize = 28;
    pub const LEFT_HEEL: usize = 29;
    pub const RIGHT_HEEL: usize = 30;
    pub const LEFT_FOOT_INDEX: usize = 31;
    pub const RIGHT_FOOT_INDEX: usize = 32;

    /// Every (left, right) index pair. Swapped when a frame is unmirrored.
    pub const LEFT_RIGHT_PAIRS: [(usize, usize); 16] = [
        (LEFT_EYE_INNER, RIGHT_EYE_INNER),
        (LEFT_EYE, RIGHT_EYE),
        (LEFT_EYE_OUTER, RIGHT_EYE_OUTER),
        (LEFT_EAR, RIGHT_EAR),
        (MOUTH_LEFT, MOUTH_RIGHT),
        (LEFT_SHOULDER, RIGHT_SHOULDER),
        (LEFT_ELBOW, RIGHT_ELBOW),
        (LEFT_WRIST, RIGHT_WRIST),
        (LEFT_PINKY, RIGHT_PINKY),
        (LEFT_INDEX, RIGHT_INDEX),
        (LEFT_THUMB, RIGHT_THUMB),
        (LEFT_HIP, RIGHT_HIP),
        (LEFT_KNEE, RIGHT_KNEE),
        (LEFT_ANKLE, RIGHT_ANKLE),
        (LEFT_HEEL, RIGHT_HEEL),
        (LEFT_FOOT_INDEX, RIGHT_FOOT_INDEX),
    ];
}

/// Named indices into a [`HandFrame`].
pub mod hand_index {
    pub const WRIST: usize = 0;
    pub const THUMB_CMC: usize = 1;
    pub const THUMB_MCP: usize = 2;
    pub const THUMB_IP: usize = 3;
    pub const THUMB_TIP: usize = 4;
    pub const INDEX_MCP: usize = 5;
    pub const INDEX_PIP: usize = 6;
    pub const INDEX_DIP: usize = 7;
    pub const INDEX_TIP: usize = 8;
    pub const MIDDLE_MCP: usize = 9;
    pub const MIDDLE_PIP: usize = 10;
    pub const MIDDLE_DIP: usize = 11;
    pub const MIDDLE_TIP: usize = 12;
    pub const RING_MCP: usize = 13;
    pub const RING_PIP: usize = 14;
    pub const RING_DIP: usize = 15;
    pub const RING_TIP: usize = 16;
    pub const PINKY_MCP: usize = 17;
    pub const PINKY_PIP: usize = 18;
    pub const PINKY_DIP: usize = 19;
    pub const PINKY_TIP: usize = 20;
}

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("expected {expected} landmarks, got {actual}")]
    WrongLandmarkCount { expected: usize, actual: usize },
    #[error("landmark {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("landmark {index} visibility {visibility} outside [0, 1]")]
    Visibility { index: usize, visibility: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(rename = "v")]
    pub visibility: f64,
}

impl Landmark {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            z: None,
            visibility: 1.0,
        }
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn point(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    fn reflected(self) -> Self {
        Self {
            x: 1.0 - self.x,
            ..self
        }
    }
}

/// Plain 2D point/vector used by the geometry code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Sub for Point2 {
    type Output = Point2;

    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

impl Add for Point2 {
    type Output = Point2;

    fn add(self, other: Point2) -> Point2 {
        Point2::new(self.x + other.x, self.y + other.y)
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.sub(other).norm()
    }
}

fn validate(landmarks: &[Landmark], expected: usize) -> Result<(), FrameError> {
    if landmarks.len() != expected {
        return Err(FrameError::WrongLandmarkCount {
            expected,
            actual: landmarks.len(),
        });
    }
    for (index, lm) in landmarks.iter().enumerate() {
        if !lm.x.is_finite() || !lm.y.is_finite() || lm.z.is_some_and(|z| !z.is_finite()) {
            return Err(FrameError::NonFinite { index });
        }
        if !(0.0..=1.0).contains(&lm.visibility) {
            return Err(FrameError::Visibility {
                index,
                visibility: lm.visibility,
            });
        }
    }
    Ok(())
}

/// Full-body landmark set for one captured image.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyFrame {
    pub timestamp_ms: u64,
    landmarks: Vec<Landmark>,
    pub mirrored: bool,
}

impl BodyFrame {
    pub fn new(
        timestamp_ms: u64,
        landmarks: Vec<Landmark>,
        mirrored: bool,
    ) -> Result<Self, FrameError> {
        validate(&landmarks, BODY_LANDMARK_COUNT)?;
        Ok(Self {
            timestamp_ms,
            landmarks,
            mirrored,
        })
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn landmark(&self, index: usize) -> &Landmark {
        &self.landmarks[index]
    }

    pub fn nose(&self) -> &Landmark {
        self.landmark(body_index::NOSE)
    }

    pub fn shoulder(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_SHOULDER, body_index::RIGHT_SHOULDER))
    }

    pub fn elbow(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_ELBOW, body_index::RIGHT_ELBOW))
    }

    pub fn wrist(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_WRIST, body_index::RIGHT_WRIST))
    }

    pub fn hip(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_HIP, body_index::RIGHT_HIP))
    }

    pub fn knee(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_KNEE, body_index::RIGHT_KNEE))
    }

    pub fn ankle(&self, side: Side) -> &Landmark {
        self.landmark(side.pick(body_index::LEFT_ANKLE, body_index::RIGHT_ANKLE))
    }

    /// Applies `f` to every landmark, keeping metadata.
    pub fn map_landmarks(&self, f: impl Fn(Landmark) -> Landmark) -> Self {
        Self {
            landmarks: self.landmarks.iter().copied().map(f).collect(),
            ..self.clone()
        }
    }

    /// Converts to raw camera orientation. Identity for unmirrored frames.
    pub fn unmirror(&self) -> Self {
        if !self.mirrored {
            return self.clone();
        }
        let mut landmarks: Vec<Landmark> = self.landmarks.iter().map(|lm| lm.reflected()).collect();
        for (l, r) in body_index::LEFT_RIGHT_PAIRS {
            landmarks.swap(l, r);
        }
        Self {
            timestamp_ms: self.timestamp_ms,
            landmarks,
            mirrored: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    fn pick(self, left: usize, right: usize) -> usize {
        match self {
            Side::Left => left,
            Side::Right => right,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Pinky,
}

impl Finger {
    pub const ALL: [Finger; 5] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Pinky,
    ];

    /// Landmark indices from base to tip: MCP, PIP, DIP, TIP
    /// (for the thumb: CMC, MCP, IP, TIP).
    pub fn joints(self) -> [usize; 4] {
        let base = match self {
            Finger::Thumb => hand_index::THUMB_CMC,
            Finger::Index => hand_index::INDEX_MCP,
            Finger::Middle => hand_index::MIDDLE_MCP,
            Finger::Ring => hand_index::RING_MCP,
            Finger::Pinky => hand_index::PINKY_MCP,
        };
        [base, base + 1, base + 2, base + 3]
    }

    /// Indices of knuckle, middle joint and tip. The middle joint is the PIP
    /// for the four fingers and the IP for the thumb; the knuckle is the MCP
    /// (for the thumb too, skipping the CMC).
    pub fn keypoints(self) -> [usize; 3] {
        let [base, second, third, tip] = self.joints();
        match self {
            Finger::Thumb => [second, third, tip],
            _ => [base, second, tip],
        }
    }
}

/// The three joints compared by the finger predicates.
#[derive(Debug, Clone, Copy)]
pub struct FingerJoints {
    pub knuckle: Landmark,
    pub middle: Landmark,
    pub tip: Landmark,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandFrame {
    pub timestamp_ms: u64,
    landmarks: Vec<Landmark>,
    pub handedness: Side,
    pub mirrored: bool,
}

impl HandFrame {
    pub fn new(
        timestamp_ms: u64,
        landmarks: Vec<Landmark>,
        handedness: Side,
        mirrored: bool,
    ) -> Result<Self, FrameError> {
        validate(&landmarks, HAND_LANDMARK_COUNT)?;
        Ok(Self {
            timestamp_ms,
            landmarks,
            handedness,
            mirrored,
        })
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn landmark(&self, index: usize) -> &Landmark {
        &self.landmarks[index]
    }

    pub fn wrist(&self) -> &Landmark {
        self.landmark(hand_index::WRIST)
    }

    /// Knuckle, middle joint and tip for the given finger.
    pub fn finger(&self, finger: Finger) -> FingerJoints {
        let [knuckle, middle, tip] = finger.keypoints();
        FingerJoints {
            knuckle: self.landmarks[knuckle],
            middle: self.landmarks[middle],
            tip: self.landmarks[tip],
        }
    }

    pub fn map_landmarks(&self, f: impl Fn(Landmark) -> Landmark) -> Self {
        Self {
            landmarks: self.landmarks.iter().copied().map(f).collect(),
            ..self.clone()
        }
    }

    pub fn unmirror(&self) -> Self {
        if !self.mirrored {
            return self.clone();
        }
        Self {
            timestamp_ms: self.timestamp_ms,
            landmarks: self.landmarks.iter().map(|lm| lm.reflected()).collect(),
            handedness: self.handedness.opposite(),
            mirrored: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(mirrored: bool) -> BodyFrame {
        let landmarks = (0..BODY_LANDMARK_COUNT)
            .map(|i| {
                let mut lm = Landmark::new(i as f64 / 40.0, 1.0 - i as f64 / 40.0);
                lm.z = Some(-(i as f64));
                lm.visibility = 0.5 + i as f64 / 100.0;
                lm
            })
            .collect();
        BodyFrame::new(17, landmarks, mirrored).unwrap()
    }

    #[test]
    fn landmark_count_is_enforced() {
        let err = BodyFrame::new(0, vec![Landmark::new(0.5, 0.5); 32], false).unwrap_err();
        assert_eq!(
            err,
            FrameError::WrongLandmarkCount {
                expected: 33,
                actual: 32
            }
        );
        assert!(HandFrame::new(0, vec![Landmark::new(0.5, 0.5); 22], Side::Left, false).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut lms = vec![Landmark::new(0.5, 0.5); 21];
        lms[3].x = f64::NAN;
        assert_eq!(
            HandFrame::new(0, lms.clone(), Side::Left, false).unwrap_err(),
            FrameError::NonFinite { index: 3 }
        );
        lms[3].x = 0.1;
        lms[4].visibility = 1.5;
        assert!(matches!(
            HandFrame::new(0, lms, Side::Left, false),
            Err(FrameError::Visibility { index: 4, .. })
        ));
    }

    #[test]
    fn unmirror_reflects_and_swaps_sides() {
        let mut frame = body(true);
        frame.landmarks[body_index::LEFT_WRIST].x = 0.2;
        let right_before = frame.wrist(Side::Right).x;
        let un = frame.unmirror();
        assert!(!un.mirrored);
        // The point labelled left in the flipped image is the subject's right.
        assert!((un.wrist(Side::Right).x - 0.8).abs() < 1e-12);
        assert!((un.wrist(Side::Left).x - (1.0 - right_before)).abs() < 1e-12);
        assert_eq!(un.nose().x, 1.0 - frame.nose().x);
    }

    #[test]
    fn unmirror_keeps_y_z_visibility_and_time() {
        let frame = body(true);
        let un = frame.unmirror();
        assert_eq!(un.timestamp_ms, frame.timestamp_ms);
        for (l, r) in body_index::LEFT_RIGHT_PAIRS {
            assert_eq!(un.landmark(l).y, frame.landmark(r).y);
            assert_eq!(un.landmark(l).z, frame.landmark(r).z);
            assert_eq!(un.landmark(l).visibility, frame.landmark(r).visibility);
        }
    }

    #[test]
    fn unmirror_is_idempotent_and_identity_when_unmirrored() {
        let frame = body(true);
        assert_eq!(frame.unmirror().unmirror(), frame.unmirror());
        let plain = body(false);
        assert_eq!(plain.unmirror(), plain);

        let hand = HandFrame::new(3, vec![Landmark::new(0.25, 0.5); 21], Side::Left, true).unwrap();
        let un = hand.unmirror();
        assert_eq!(un.handedness, Side::Right);
        assert_eq!(un.wrist().x, 0.75);
        assert_eq!(un.unmirror(), un);
    }

    #[test]
    fn finger_joint_layout() {
        assert_eq!(Finger::Index.joints(), [5, 6, 7, 8]);
        assert_eq!(Finger::Pinky.joints(), [17, 18, 19, 20]);
        assert_eq!(Finger::Thumb.joints(), [1, 2, 3, 4]);
    }
}
