//! Planar joint angles of the body skeleton.
//!
//! Every angle is the signed counter-clockwise rotation, in the `(x, y)`
//! plane exactly as given, from the first limb vector to the second,
//! normalized to `[0, 360)`. With image coordinates (y down) this reads as
//! clockwise on screen, which is fine: bounds are derived in the same frame.

use std::fmt;
use std::ops::Sub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landmarks::{BodyFrame, Landmark, Point2, Side};

pub const DEFAULT_VISIBILITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Error, PartialEq)]
#[error("degenerate vector: a limb endpoint coincides with the joint")]
pub struct DegenerateVector;

/// Signed CCW angle in degrees from `vertex→p1` to `vertex→p2`, in `[0, 360)`.
pub fn joint_angle(vertex: Point2, p1: Point2, p2: Point2) -> Result<f64, DegenerateVector> {
    let a = p1.sub(vertex);
    let b = p2.sub(vertex);
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(DegenerateVector);
    }
    let deg = a.cross(b).atan2(a.dot(b)).to_degrees();
    Ok(normalize_degrees(deg))
}

/// Wraps any finite angle into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointName {
    LeftShoulder,
    RightShoulder,
    LeftElbow,
    RightElbow,
    LeftHip,
    RightHip,
    LeftKnee,
    RightKnee,
}

impl JointName {
    pub const ALL: [JointName; 8] = [
        JointName::LeftShoulder,
        JointName::RightShoulder,
        JointName::LeftElbow,
        JointName::RightElbow,
        JointName::LeftHip,
        JointName::RightHip,
        JointName::LeftKnee,
        JointName::RightKnee,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            JointName::LeftShoulder => "left_shoulder",
            JointName::RightShoulder => "right_shoulder",
            JointName::LeftElbow => "left_elbow",
            JointName::RightElbow => "right_elbow",
            JointName::LeftHip => "left_hip",
            JointName::RightHip => "right_hip",
            JointName::LeftKnee => "left_knee",
            JointName::RightKnee => "right_knee",
        }
    }

    pub fn side(&self) -> Side {
        match self {
            JointName::LeftShoulder
            | JointName::LeftElbow
            | JointName::LeftHip
            | JointName::LeftKnee => Side::Left,
            _ => Side::Right,
        }
    }

    fn slot(&self) -> usize {
        *self as usize
    }

    /// Vertex and the two limb endpoints, in operand order.
    fn operands<'a>(&self, f: &'a BodyFrame) -> [&'a Landmark; 3] {
        let s = self.side();
        match self {
            JointName::LeftShoulder | JointName::RightShoulder => {
                [f.shoulder(s), f.elbow(s), f.hip(s)]
            }
            JointName::LeftElbow | JointName::RightElbow => [f.elbow(s), f.shoulder(s), f.wrist(s)],
            JointName::LeftHip | JointName::RightHip => [f.hip(s), f.shoulder(s), f.knee(s)],
            JointName::LeftKnee | JointName::RightKnee => [f.knee(s), f.hip(s), f.ankle(s)],
        }
    }
}

impl fmt::Display for JointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The eight joint angles of one frame; `None` marks an unavailable angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngleVector([Option<f64>; 8]);

impl AngleVector {
    pub fn get(&self, joint: JointName) -> Option<f64> {
        self.0[joint.slot()]
    }

    pub fn set(&mut self, joint: JointName, value: Option<f64>) {
        self.0[joint.slot()] = value.map(normalize_degrees);
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointName, Option<f64>)> + '_ {
        JointName::ALL.iter().map(|j| (*j, self.get(*j)))
    }
}

impl FromIterator<(JointName, f64)> for AngleVector {
    fn from_iter<I: IntoIterator<Item = (JointName, f64)>>(iter: I) -> Self {
        let mut v = AngleVector::default();
        for (j, a) in iter {
            v.set(j, Some(a));
        }
        v
    }
}

/// Computes all eight angles of an unmirrored frame.
///
/// An angle is unavailable when any of its three landmarks is below
/// `vis_threshold` or when a limb vector is degenerate.
pub fn compute_angles(frame: &BodyFrame, vis_threshold: f64) -> AngleVector {
    let mut out = AngleVector::default();
    for joint in JointName::ALL {
        let [vertex, p1, p2] = joint.operands(frame);
        let visible = [vertex, p1, p2]
            .iter()
            .all(|lm| lm.visibility >= vis_threshold);
        let value = if visible {
            joint_angle(vertex.point(), p1.point(), p2.point()).ok()
        } else {
            None
        };
        out.set(joint, value);
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::landmarks::{body_index, BODY_LANDMARK_COUNT};

    const O: Point2 = Point2::new(0.0, 0.0);

    #[test]
    fn axis_examples() {
        let ex = Point2::new(1.0, 0.0);
        let ey = Point2::new(0.0, 1.0);
        assert_eq!(joint_angle(O, ex, ey).unwrap(), 90.0);
        assert_eq!(joint_angle(O, ex, Point2::new(-1.0, 0.0)).unwrap(), 180.0);
        assert_eq!(joint_angle(O, ey, ex).unwrap(), 270.0);
        assert_eq!(joint_angle(O, ex, ex).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_vectors() {
        let p = Point2::new(0.3, 0.3);
        assert_eq!(
            joint_angle(p, p, Point2::new(1.0, 0.0)),
            Err(DegenerateVector)
        );
        assert_eq!(
            joint_angle(p, Point2::new(1.0, 0.0), p),
            Err(DegenerateVector)
        );
    }

    #[test]
    fn normalize_never_returns_360() {
        assert_eq!(normalize_degrees(-1e-20), 0.0);
        assert_eq!(normalize_degrees(360.0), 0.0);
        assert_eq!(normalize_degrees(-90.0), 270.0);
        assert_eq!(normalize_degrees(725.0), 5.0);
    }

    fn frame_with(points: &[(usize, f64, f64)]) -> BodyFrame {
        let mut lms = vec![Landmark::new(0.5, 0.5); BODY_LANDMARK_COUNT];
        for &(i, x, y) in points {
            lms[i] = Landmark::new(x, y);
        }
        BodyFrame::new(0, lms, false).unwrap()
    }

    #[test]
    fn hanging_arm_has_zero_shoulder_angle() {
        use body_index::*;
        let f = frame_with(&[
            (LEFT_SHOULDER, 0.6, 0.3),
            (LEFT_ELBOW, 0.6, 0.45),
            (LEFT_WRIST, 0.6, 0.6),
            (LEFT_HIP, 0.6, 0.6),
        ]);
        let a = compute_angles(&f, 0.5);
        assert_eq!(a.get(JointName::LeftShoulder), Some(0.0));
        assert_eq!(a.get(JointName::LeftElbow), Some(180.0));
    }

    #[test]
    fn low_visibility_marks_dependent_angles_unavailable() {
        use body_index::*;
        let f = frame_with(&[
            (LEFT_SHOULDER, 0.6, 0.3),
            (LEFT_ELBOW, 0.75, 0.3),
            (LEFT_WRIST, 0.9, 0.3),
            (LEFT_HIP, 0.6, 0.6),
            (LEFT_KNEE, 0.6, 0.8),
            (LEFT_ANKLE, 0.6, 0.95),
        ]);
        let mut lms = f.landmarks().to_vec();
        lms[LEFT_ELBOW].visibility = 0.1;
        let f = BodyFrame::new(0, lms, false).unwrap();
        let a = compute_angles(&f, 0.5);
        assert_eq!(a.get(JointName::LeftElbow), None);
        assert_eq!(a.get(JointName::LeftShoulder), None);
        assert!(a.get(JointName::LeftHip).is_some());
        assert!(a.get(JointName::LeftKnee).is_some());
    }

    #[test]
    fn coincident_landmarks_are_unavailable() {
        // Default landmarks all sit at (0.5, 0.5).
        let f = frame_with(&[]);
        let a = compute_angles(&f, 0.5);
        assert!(a.iter().all(|(_, v)| v.is_none()));
    }

    fn pt() -> impl Strategy<Value = Point2> {
        (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Point2::new(x, y))
    }

    fn circular_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(360.0);
        d.min(360.0 - d)
    }

    proptest! {
        #[test]
        fn swapping_operands_negates(v in pt(), p1 in pt(), p2 in pt()) {
            prop_assume!(p1.distance(v) > 1e-6 && p2.distance(v) > 1e-6);
            let fwd = joint_angle(v, p1, p2).unwrap();
            let back = joint_angle(v, p2, p1).unwrap();
            prop_assert!(circular_diff(fwd + back, 0.0) < 1e-9);
        }

        #[test]
        fn frame_scaling_preserves_angles(s in 0.05f64..20.0) {
            use body_index::*;
            let f = frame_with(&[
                (LEFT_SHOULDER, 0.6, 0.3), (LEFT_ELBOW, 0.7, 0.4), (LEFT_WRIST, 0.65, 0.5),
                (LEFT_HIP, 0.58, 0.6), (LEFT_KNEE, 0.6, 0.8), (LEFT_ANKLE, 0.61, 0.95),
                (RIGHT_SHOULDER, 0.4, 0.3), (RIGHT_ELBOW, 0.3, 0.3), (RIGHT_WRIST, 0.3, 0.15),
                (RIGHT_HIP, 0.42, 0.6), (RIGHT_KNEE, 0.4, 0.8), (RIGHT_ANKLE, 0.39, 0.95),
            ]);
            let scaled = f.map_landmarks(|lm| Landmark { x: lm.x * s, y: lm.y * s, ..lm });
            let a = compute_angles(&f, 0.5);
            let b = compute_angles(&scaled, 0.5);
            for j in JointName::ALL {
                prop_assert!(circular_diff(a.get(j).unwrap(), b.get(j).unwrap()) < 1e-9);
            }
        }
    }
}
