//! Derivation of the default body-pose bounds from the synthetic figure.
//!
//! Each pose gets an interval of ±25° around its canonical angle on the four
//! arm joints (hips and knees stay unconstrained). A pose whose noisy
//! variants classify correctly less than 95% of the time is widened in 5°
//! steps, as long as every canonical figure still matches exactly its own
//! definition and the rest figure matches none.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::angles::{compute_angles, AngleVector, JointName, DEFAULT_VISIBILITY_THRESHOLD};
use crate::body::{classify_body, matching_poses};
use crate::config::{AngleInterval, BodyPoseDefinition, GestureConfig, HandParams, Settings};
use crate::gesture::{BodyPose, Gesture};
use crate::pipeline::PipelineConfig;
use crate::sim::MotionProfile;
use crate::synth::{canonical_body_frame, perturb_body, rest_body_frame};

pub const BASE_HALF_WIDTH: f64 = 25.0;
pub const WIDEN_STEP: f64 = 5.0;
pub const MAX_HALF_WIDTH: f64 = 45.0;
pub const NOISE_AMPLITUDE: f64 = 0.02;
pub const NOISE_TRIALS: usize = 1000;
pub const MIN_STABILITY: f64 = 0.95;

const ARM_JOINTS: [JointName; 4] = [
    JointName::LeftShoulder,
    JointName::RightShoulder,
    JointName::LeftElbow,
    JointName::RightElbow,
];

/// Compound poses outrank the single-limb poses they subsume.
pub fn default_priority(pose: BodyPose) -> i32 {
    match pose {
        BodyPose::TPose => 9,
        BodyPose::BothArmsBent => 8,
        BodyPose::ArmsElevated => 7,
        BodyPose::HandsOnHead => 6,
        BodyPose::HandsOnHips => 5,
        BodyPose::LeftArmOut => 4,
        BodyPose::RightArmOut => 3,
        BodyPose::LeftArmBent => 2,
        BodyPose::RightArmBent => 1,
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DeriveError {
    #[error("canonical {pose} figure has unavailable joint {joint}")]
    Unavailable { pose: BodyPose, joint: JointName },
    #[error("canonical {pose} figure matches {matched:?} under the base bounds")]
    Separation {
        pose: BodyPose,
        matched: Vec<BodyPose>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseReport {
    pub pose: BodyPose,
    pub canonical: AngleVector,
    pub half_width: f64,
    pub stability: f64,
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub settings: Settings,
    pub report: Vec<PoseReport>,
}

fn canonical_angles(pose: BodyPose) -> AngleVector {
    compute_angles(&canonical_body_frame(pose, 0), DEFAULT_VISIBILITY_THRESHOLD)
}

fn definition(pose: BodyPose, half: f64) -> Result<BodyPoseDefinition, DeriveError> {
    let angles = canonical_angles(pose);
    let mut constraints = BTreeMap::new();
    for joint in ARM_JOINTS {
        let a = angles
            .get(joint)
            .ok_or(DeriveError::Unavailable { pose, joint })?;
        let iv = AngleInterval::around(round_bound(a), half);
        let bound = |b: f64| round_bound(b).rem_euclid(360.0);
        constraints.insert(
            joint,
            AngleInterval {
                lo: bound(iv.lo),
                hi: bound(iv.hi),
                ..iv
            },
        );
    }
    Ok(BodyPoseDefinition {
        name: pose,
        priority: default_priority(pose),
        constraints,
    })
}

/// Bounds are kept to 1e-6 degrees so the emitted file stays readable.
fn round_bound(a: f64) -> f64 {
    (a * 1e6).round() / 1e6
}

fn build(halves: &BTreeMap<BodyPose, f64>) -> Result<GestureConfig, DeriveError> {
    let body = BodyPose::ALL
        .iter()
        .map(|p| definition(*p, halves[p]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GestureConfig {
        vis_threshold: DEFAULT_VISIBILITY_THRESHOLD,
        hand: HandParams::default(),
        body,
    })
}

/// `Ok(())` iff each canonical figure matches only its own pose and the rest
/// figure matches nothing.
pub fn check_separation(config: &GestureConfig) -> Result<(), DeriveError> {
    for pose in BodyPose::ALL {
        let matched = matching_poses(&canonical_angles(*pose), config);
        if matched != [*pose] {
            return Err(DeriveError::Separation {
                pose: *pose,
                matched,
            });
        }
    }
    let rest = compute_angles(&rest_body_frame(0), config.vis_threshold);
    let matched = matching_poses(&rest, config);
    if !matched.is_empty() {
        // Reported against the pose that swallowed the rest figure.
        return Err(DeriveError::Separation {
            pose: matched[0],
            matched,
        });
    }
    Ok(())
}

/// Fraction of noisy copies of `pose`'s canonical figure classified as `pose`.
pub fn stability(
    pose: BodyPose,
    config: &GestureConfig,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let frame = canonical_body_frame(pose, 0);
    let hits = (0..trials)
        .filter(|_| {
            let noisy = perturb_body(&frame, NOISE_AMPLITUDE, rng);
            let angles = compute_angles(&noisy, config.vis_threshold);
            classify_body(&angles, config) == Gesture::Body(pose)
        })
        .count();
    hits as f64 / trials as f64
}

fn stabilities(config: &GestureConfig, seed: u64) -> BTreeMap<BodyPose, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BodyPose::ALL
        .iter()
        .map(|p| (*p, stability(*p, config, NOISE_TRIALS, &mut rng)))
        .collect()
}

/// Runs the derivation. Deterministic for a given seed.
pub fn derive_settings(seed: u64) -> Result<Derivation, DeriveError> {
    let mut halves: BTreeMap<BodyPose, f64> = BodyPose::ALL
        .iter()
        .map(|p| (*p, BASE_HALF_WIDTH))
        .collect();
    let mut config = build(&halves)?;
    check_separation(&config)?;

    loop {
        let stab = stabilities(&config, seed);
        let mut changed = false;
        for pose in BodyPose::ALL {
            if stab[pose] >= MIN_STABILITY || halves[pose] + WIDEN_STEP > MAX_HALF_WIDTH {
                continue;
            }
            let mut trial = halves.clone();
            *trial.get_mut(pose).expect("all poses present") += WIDEN_STEP;
            let candidate = build(&trial)?;
            if check_separation(&candidate).is_ok() {
                halves = trial;
                config = candidate;
                changed = true;
            }
        }
        if !changed {
            let report = BodyPose::ALL
                .iter()
                .map(|p| PoseReport {
                    pose: *p,
                    canonical: canonical_angles(*p),
                    half_width: halves[p],
                    stability: stab[p],
                })
                .collect();
            let settings = Settings {
                gestures: config,
                pipeline: PipelineConfig::default(),
                motion: MotionProfile::default(),
            };
            return Ok(Derivation { settings, report });
        }
    }
}

/// TOML text of the derived settings, with a provenance comment.
pub fn render(derivation: &Derivation, seed: u64) -> String {
    let mut out = format!(
        "# Generated by `gesturequad derive-config --seed {seed}`.\n\
         # Bounds are canonical synthetic-figure angles +/- the listed half-width.\n"
    );
    for r in &derivation.report {
        out.push_str(&format!(
            "#   {:<13} half-width {:>4.1} deg, noise stability {:.3}\n",
            r.pose, r.half_width, r.stability
        ));
    }
    out.push('\n');
    out.push_str(&derivation.settings.to_toml());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BUNDLED_CONFIG;

    #[test]
    fn derivation_is_deterministic_and_separated() {
        let a = derive_settings(0).unwrap();
        let b = derive_settings(0).unwrap();
        assert_eq!(a.settings, b.settings);
        check_separation(&a.settings.gestures).unwrap();
        a.settings.validate().unwrap();
        for r in &a.report {
            assert!(r.stability >= MIN_STABILITY, "{:?}", r);
        }
    }

    #[test]
    fn bundled_config_matches_derivation() {
        let d = derive_settings(0).unwrap();
        assert_eq!(
            BUNDLED_CONFIG,
            render(&d, 0),
            "bundled config is stale; run `gesturequad derive-config --out crates/core/data/default_gestures.toml`"
        );
    }

    #[test]
    fn legs_are_unconstrained() {
        let d = derive_settings(0).unwrap();
        for def in &d.settings.gestures.body {
            assert!(def.constraints.keys().all(|j| ARM_JOINTS.contains(j)));
        }
    }
}
