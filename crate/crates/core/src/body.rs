//! Body pose classification by angle-interval membership.

use crate::angles::{compute_angles, AngleVector};
use crate::config::{BodyPoseDefinition, GestureConfig};
use crate::gesture::{BodyPose, Gesture};
use crate::landmarks::BodyFrame;

pub fn matches(def: &BodyPoseDefinition, angles: &AngleVector) -> bool {
    def.matches(angles)
}

/// Every pose whose bounds contain `angles`, highest priority first.
pub fn matching_poses(angles: &AngleVector, config: &GestureConfig) -> Vec<BodyPose> {
    let mut hits: Vec<&BodyPoseDefinition> =
        config.body.iter().filter(|d| d.matches(angles)).collect();
    hits.sort_by_key(|h| std::cmp::Reverse(h.priority));
    hits.into_iter().map(|d| d.name).collect()
}

/// Highest-priority matching pose, or `Neutral`.
pub fn classify_body(angles: &AngleVector, config: &GestureConfig) -> Gesture {
    config
        .body
        .iter()
        .filter(|d| d.matches(angles))
        .max_by_key(|d| d.priority)
        .map_or(Gesture::Neutral, |d| Gesture::Body(d.name))
}

/// Unmirrors, computes angles and classifies in one go.
pub fn classify_body_frame(frame: &BodyFrame, config: &GestureConfig) -> Gesture {
    let angles = compute_angles(&frame.unmirror(), config.vis_threshold);
    classify_body(&angles, config)
}
