//! Synthetic landmark generators: a 2D stick figure for body poses and a
//! schematic hand for hand signs.
//!
//! Both produce unmirrored frames with the subject facing the camera, so the
//! subject's left side is toward `+x`. These figures are the reference from
//! which the default body bounds are derived, and they drive the scripted
//! sessions used in tests.
//!
//! The canonical poses encode a reading of photographs, not measurements:
//! "arms elevated" is taken as both arms straight overhead, "arm bent" as the
//! upper arm horizontal with the forearm pointing straight up, and so on.

use rand::Rng;
use std::ops::{Add, Sub};

use crate::gesture::{BodyPose, HandSign};
use crate::hand::bearing_vector;
use crate::landmarks::{
    body_index as b, hand_index as h, BodyFrame, Finger, HandFrame, Landmark, Point2, Side,
    BODY_LANDMARK_COUNT, HAND_LANDMARK_COUNT,
};

/// Arm articulation. Angles are degrees measured from straight down,
/// positive away from the body midline: 90 is horizontal outward, 180 is
/// straight up, negative values point across the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPose {
    pub upper: f64,
    pub forearm: f64,
}

impl ArmPose {
    pub const REST: ArmPose = ArmPose {
        upper: 8.0,
        forearm: 4.0,
    };
    pub const OUT: ArmPose = ArmPose {
        upper: 90.0,
        forearm: 90.0,
    };
    pub const BENT: ArmPose = ArmPose {
        upper: 90.0,
        forearm: 180.0,
    };
    pub const ON_HIP: ArmPose = ArmPose {
        upper: 40.0,
        forearm: -40.0,
    };
    pub const ON_HEAD: ArmPose = ArmPose {
        upper: 140.0,
        forearm: 225.0,
    };
    pub const OVERHEAD: ArmPose = ArmPose {
        upper: 170.0,
        forearm: 172.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickFigure {
    pub left: ArmPose,
    pub right: ArmPose,
}

// Figure dimensions in normalized image units.
const CENTER_X: f64 = 0.5;
const SHOULDER_Y: f64 = 0.35;
const SHOULDER_HALF_WIDTH: f64 = 0.10;
const HIP_Y: f64 = 0.60;
const HIP_HALF_WIDTH: f64 = 0.06;
const KNEE_Y: f64 = 0.78;
const ANKLE_Y: f64 = 0.95;
const UPPER_ARM: f64 = 0.15;
const FOREARM: f64 = 0.14;
const NOSE_Y: f64 = 0.25;

impl StickFigure {
    pub const REST: StickFigure = StickFigure {
        left: ArmPose::REST,
        right: ArmPose::REST,
    };

    pub fn canonical(pose: BodyPose) -> Self {
        let both = |a| StickFigure { left: a, right: a };
        match pose {
            BodyPose::HandsOnHips => both(ArmPose::ON_HIP),
            BodyPose::HandsOnHead => both(ArmPose::ON_HEAD),
            BodyPose::LeftArmBent => StickFigure {
                left: ArmPose::BENT,
                right: ArmPose::REST,
            },
            BodyPose::RightArmBent => StickFigure {
                left: ArmPose::REST,
                right: ArmPose::BENT,
            },
            BodyPose::LeftArmOut => StickFigure {
                left: ArmPose::OUT,
                right: ArmPose::REST,
            },
            BodyPose::RightArmOut => StickFigure {
                left: ArmPose::REST,
                right: ArmPose::OUT,
            },
            BodyPose::TPose => both(ArmPose::OUT),
            BodyPose::ArmsElevated => both(ArmPose::OVERHEAD),
            BodyPose::BothArmsBent => both(ArmPose::BENT),
        }
    }

    fn arm(&self, side: Side) -> ArmPose {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    /// All 33 landmarks at full visibility.
    pub fn landmarks(&self) -> Vec<Landmark> {
        let mut lms = vec![Landmark::new(CENTER_X, NOSE_Y); BODY_LANDMARK_COUNT];
        let mut put = |i: usize, p: Point2| lms[i] = Landmark::new(p.x, p.y);

        put(b::NOSE, Point2::new(CENTER_X, NOSE_Y));
        for side in Side::BOTH {
            // Outward direction in image x: the subject's left is +x.
            let s = match side {
                Side::Left => 1.0,
                Side::Right => -1.0,
            };
            let pick = |l: usize, r: usize| if side == Side::Left { l } else { r };
            let x = |dx: f64| CENTER_X + s * dx;

            put(
                pick(b::LEFT_EYE_INNER, b::RIGHT_EYE_INNER),
                Point2::new(x(0.012), NOSE_Y - 0.02),
            );
            put(
                pick(b::LEFT_EYE, b::RIGHT_EYE),
                Point2::new(x(0.022), NOSE_Y - 0.022),
            );
            put(
                pick(b::LEFT_EYE_OUTER, b::RIGHT_EYE_OUTER),
                Point2::new(x(0.032), NOSE_Y - 0.02),
            );
            put(
                pick(b::LEFT_EAR, b::RIGHT_EAR),
                Point2::new(x(0.045), NOSE_Y - 0.01),
            );
            put(
                pick(b::MOUTH_LEFT, b::MOUTH_RIGHT),
                Point2::new(x(0.015), NOSE_Y + 0.025),
            );

            let shoulder = Point2::new(x(SHOULDER_HALF_WIDTH), SHOULDER_Y);
            let arm = self.arm(side);
            let dir = |deg: f64| {
                let r = deg.to_radians();
                Point2::new(s * r.sin(), r.cos())
            };
            let elbow = shoulder.add(dir(arm.upper).scale(UPPER_ARM));
            let fore = dir(arm.forearm);
            let wrist = elbow.add(fore.scale(FOREARM));
            put(pick(b::LEFT_SHOULDER, b::RIGHT_SHOULDER), shoulder);
            put(pick(b::LEFT_ELBOW, b::RIGHT_ELBOW), elbow);
            put(pick(b::LEFT_WRIST, b::RIGHT_WRIST), wrist);
            put(
                pick(b::LEFT_PINKY, b::RIGHT_PINKY),
                wrist.add(fore.scale(0.03)).add(Point2::new(s * 0.008, 0.0)),
            );
            put(
                pick(b::LEFT_INDEX, b::RIGHT_INDEX),
                wrist.add(fore.scale(0.035)),
            );
            put(
                pick(b::LEFT_THUMB, b::RIGHT_THUMB),
                wrist.add(fore.scale(0.02)).add(Point2::new(-s * 0.01, 0.0)),
            );

            let hip = Point2::new(x(HIP_HALF_WIDTH), HIP_Y);
            let knee = Point2::new(x(HIP_HALF_WIDTH), KNEE_Y);
            let ankle = Point2::new(x(HIP_HALF_WIDTH), ANKLE_Y);
            put(pick(b::LEFT_HIP, b::RIGHT_HIP), hip);
            put(pick(b::LEFT_KNEE, b::RIGHT_KNEE), knee);
            put(pick(b::LEFT_ANKLE, b::RIGHT_ANKLE), ankle);
            put(
                pick(b::LEFT_HEEL, b::RIGHT_HEEL),
                ankle.add(Point2::new(0.0, 0.02)),
            );
            put(
                pick(b::LEFT_FOOT_INDEX, b::RIGHT_FOOT_INDEX),
                ankle.add(Point2::new(s * 0.03, 0.03)),
            );
        }
        lms
    }

    pub fn frame(&self, timestamp_ms: u64) -> BodyFrame {
        BodyFrame::new(timestamp_ms, self.landmarks(), false).expect("figure has 33 landmarks")
    }
}

pub fn canonical_body_frame(pose: BodyPose, timestamp_ms: u64) -> BodyFrame {
    StickFigure::canonical(pose).frame(timestamp_ms)
}

pub fn rest_body_frame(timestamp_ms: u64) -> BodyFrame {
    StickFigure::REST.frame(timestamp_ms)
}

/// Adds independent uniform noise in `[-amplitude, amplitude]` to every x and y.
pub fn perturb_body<R: Rng>(frame: &BodyFrame, amplitude: f64, rng: &mut R) -> BodyFrame {
    let noisy: Vec<Landmark> = frame
        .landmarks()
        .iter()
        .map(|lm| Landmark {
            x: lm.x + rng.gen_range(-amplitude..=amplitude),
            y: lm.y + rng.gen_range(-amplitude..=amplitude),
            ..*lm
        })
        .collect();
    BodyFrame::new(frame.timestamp_ms, noisy, frame.mirrored).expect("same landmark count")
}

/// Horizontal reflection with left/right relabelling: what a selfie-style
/// preview would report for the same physical pose.
pub fn mirror_body(frame: &BodyFrame) -> BodyFrame {
    // unmirror is an involution on the coordinates; reuse it and flip the flag.
    let flipped = BodyFrame::new(frame.timestamp_ms, frame.landmarks().to_vec(), true)
        .expect("same landmark count")
        .unmirror();
    BodyFrame::new(flipped.timestamp_ms, flipped.landmarks().to_vec(), true)
        .expect("same landmark count")
}

pub fn mirror_hand(frame: &HandFrame) -> HandFrame {
    let flipped = HandFrame::new(
        frame.timestamp_ms,
        frame.landmarks().to_vec(),
        frame.handedness,
        true,
    )
    .expect("same landmark count")
    .unmirror();
    HandFrame::new(
        flipped.timestamp_ms,
        flipped.landmarks().to_vec(),
        flipped.handedness,
        true,
    )
    .expect("same landmark count")
}

/// Posture of one finger in a schematic hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FingerPose {
    /// Straight, pointing along a bearing (0 = up, 90 = +x).
    Extended(f64),
    /// Curled toward the palm.
    Curled,
}

/// A schematic hand: palm bearing plus per-finger posture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandSketch {
    pub wrist: Point2,
    /// Direction from the wrist to the knuckles (0 = up, 90 = +x).
    pub palm_bearing: f64,
    pub palm_length: f64,
    pub thumb: FingerPose,
    /// Index, middle, ring, pinky.
    pub fingers: [FingerPose; 4],
}

const SEGMENT: f64 = 0.035;

impl HandSketch {
    pub fn canonical(sign: HandSign) -> Self {
        use FingerPose::{Curled, Extended};
        // Subject's left is +x in an unmirrored frame.
        const LEFT: f64 = 90.0;
        const RIGHT: f64 = -90.0;
        let (bearing, thumb, fingers) = match sign {
            HandSign::PointUp => (0.0, Curled, [Extended(0.0), Curled, Curled, Curled]),
            HandSign::PalmOut => (0.0, Extended(-60.0), [Extended(0.0); 4]),
            HandSign::PointLeft => (LEFT, Curled, [Extended(LEFT), Curled, Curled, Curled]),
            HandSign::PointRight => (RIGHT, Curled, [Extended(RIGHT), Curled, Curled, Curled]),
            HandSign::SidewaysLeft => (LEFT, Extended(LEFT - 60.0), [Extended(LEFT); 4]),
            HandSign::SidewaysRight => (RIGHT, Extended(RIGHT + 60.0), [Extended(RIGHT); 4]),
            HandSign::FistLeft => (LEFT, Curled, [Curled; 4]),
            HandSign::FistRight => (RIGHT, Curled, [Curled; 4]),
            HandSign::Fist => (0.0, Curled, [Curled; 4]),
        };
        Self {
            wrist: Point2::new(0.5, 0.5),
            palm_bearing: bearing,
            palm_length: 0.09,
            thumb,
            fingers,
        }
    }

    fn place_finger(&self, base: Point2, pose: FingerPose, scale: f64) -> [Point2; 4] {
        let palm = bearing_vector(self.palm_bearing);
        match pose {
            FingerPose::Extended(bearing) => {
                let d = bearing_vector(bearing).scale(SEGMENT * scale);
                [
                    base,
                    base.add(d),
                    base.add(d.scale(2.0)),
                    base.add(d.scale(3.0)),
                ]
            }
            FingerPose::Curled => {
                let seg = SEGMENT * scale;
                let pip = base.add(palm.scale(0.8 * seg));
                let dip = base.add(palm.scale(0.6 * seg));
                let tip = base.sub(palm.scale(0.3 * seg));
                [base, pip, dip, tip]
            }
        }
    }

    pub fn landmarks(&self) -> Vec<Landmark> {
        let palm = bearing_vector(self.palm_bearing);
        // Perpendicular toward the thumb side.
        let across = Point2::new(-palm.y, palm.x).scale(-1.0);
        let mut lms = vec![Landmark::new(self.wrist.x, self.wrist.y); HAND_LANDMARK_COUNT];
        let mut put = |i: usize, p: Point2| lms[i] = Landmark::new(p.x, p.y);

        put(h::WRIST, self.wrist);
        let knuckle_row = self.wrist.add(palm.scale(self.palm_length));
        let offsets = [0.03, 0.01, -0.01, -0.03];
        let lengths = [1.0, 1.1, 1.0, 0.8];
        let fingers = [Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky];
        for (i, finger) in fingers.iter().enumerate() {
            let base = knuckle_row.add(across.scale(offsets[i]));
            let joints = self.place_finger(base, self.fingers[i], lengths[i]);
            for (idx, p) in finger.joints().iter().zip(joints) {
                put(*idx, p);
            }
        }

        let cmc = self.wrist.add(palm.scale(0.025)).add(across.scale(0.025));
        let thumb_mcp = cmc.add(palm.scale(0.02)).add(across.scale(0.02));
        let (ip, tip) = match self.thumb {
            FingerPose::Extended(bearing) => {
                let d = bearing_vector(bearing).scale(0.03);
                (thumb_mcp.add(d), thumb_mcp.add(d.scale(2.0)))
            }
            // Tucked across the palm, tip nearer the wrist than the IP joint.
            FingerPose::Curled => (
                thumb_mcp.add(palm.scale(0.03)),
                thumb_mcp.add(palm.scale(0.01)).sub(across.scale(0.02)),
            ),
        };
        put(h::THUMB_CMC, cmc);
        put(h::THUMB_MCP, thumb_mcp);
        put(h::THUMB_IP, ip);
        put(h::THUMB_TIP, tip);
        lms
    }

    pub fn frame(&self, timestamp_ms: u64, handedness: Side) -> HandFrame {
        HandFrame::new(timestamp_ms, self.landmarks(), handedness, false)
            .expect("sketch has 21 landmarks")
    }
}

pub fn canonical_hand_frame(sign: HandSign, timestamp_ms: u64) -> HandFrame {
    HandSketch::canonical(sign).frame(timestamp_ms, Side::Right)
}

/// An open, relaxed hand hanging down: matches no sign.
pub fn rest_hand_frame(timestamp_ms: u64) -> HandFrame {
    HandSketch {
        wrist: Point2::new(0.5, 0.4),
        palm_bearing: 180.0,
        palm_length: 0.09,
        thumb: FingerPose::Extended(150.0),
        fingers: [FingerPose::Extended(180.0); 4],
    }
    .frame(timestamp_ms, Side::Right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{compute_angles, JointName};

    #[test]
    fn t_pose_shoulders_are_quarter_turns() {
        let a = compute_angles(&canonical_body_frame(BodyPose::TPose, 0), 0.5);
        // Image y points down: from the outward arm to the downward hip
        // vector is +90 on the subject's left (+x) and 270 on the right.
        let l = a.get(JointName::LeftShoulder).unwrap();
        let r = a.get(JointName::RightShoulder).unwrap();
        let torso_tilt = ((SHOULDER_HALF_WIDTH - HIP_HALF_WIDTH) / (HIP_Y - SHOULDER_Y))
            .atan()
            .to_degrees();
        assert!((l - (90.0 + torso_tilt)).abs() < 1e-9, "{l}");
        assert!((r - (270.0 - torso_tilt)).abs() < 1e-9, "{r}");
        assert!((a.get(JointName::LeftElbow).unwrap() - 180.0).abs() < 1e-9);
    }

    #[test]
    fn figures_stay_in_frame() {
        for pose in BodyPose::ALL {
            for lm in canonical_body_frame(*pose, 0).landmarks() {
                assert!(
                    (0.02..=0.98).contains(&lm.x) && (0.02..=0.98).contains(&lm.y),
                    "{pose}: {lm:?}"
                );
            }
        }
    }

    #[test]
    fn mirror_round_trips() {
        let f = canonical_body_frame(BodyPose::LeftArmOut, 5);
        let m = mirror_body(&f);
        assert!(m.mirrored);
        let close = |a: &[Landmark], b: &[Landmark]| {
            a.iter()
                .zip(b)
                .all(|(p, q)| (p.x - q.x).abs() < 1e-12 && p.y == q.y)
        };
        assert!(!m.unmirror().mirrored);
        assert!(close(m.unmirror().landmarks(), f.landmarks()));
        let hf = canonical_hand_frame(HandSign::PointLeft, 5);
        let back = mirror_hand(&hf).unmirror();
        assert_eq!(back.handedness, hf.handedness);
        assert!(close(back.landmarks(), hf.landmarks()));
    }
}
