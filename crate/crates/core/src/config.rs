//! Gesture configuration: body pose angle bounds and hand predicate
//! parameters, plus the pipeline and motion settings that share its file.
//!
//! File format (TOML):
//!
//! ```toml
//! vis_threshold = 0.5
//!
//! [hand]
//! fist_sector_deg = 45.0      # half-width of each fist orientation sector
//! hysteresis_margin = 0.0     # fraction of the hand bounding-box size
//!
//! [[body]]
//! name = "TPose"
//! priority = 9                # higher wins when several poses match
//! [body.constraints.left_shoulder]
//! lo = 65.0
//! hi = 115.0
//! wrap = false                # true when the interval crosses 0 degrees
//!
//! [pipeline]                  # optional, defaults shown
//! stability_frames = 5
//! cooldown_ms = 2000
//!
//! [motion]                    # optional, see `MotionProfile`
//! ```
//!
//! Joints absent from `constraints` are unconstrained.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::angles::{AngleVector, JointName, DEFAULT_VISIBILITY_THRESHOLD};
use crate::gesture::BodyPose;
use crate::pipeline::PipelineConfig;
use crate::sim::MotionProfile;

pub const CONFIG_ENV_VAR: &str = "GESTUREQUAD_CONFIG";

/// Default configuration as emitted by `derive-config --seed 0`.
pub const BUNDLED_CONFIG: &str = include_str!("../data/default_gestures.toml");

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("interval bound {0} outside [0, 360)")]
    BoundOutOfRange(f64),
    #[error("interval [{lo}, {hi}] has lo > hi but is not marked wrap")]
    InvertedInterval { lo: f64, hi: f64 },
    #[error("wrap interval [{lo}, {hi}] must have lo > hi")]
    NonWrappingInterval { lo: f64, hi: f64 },
    #[error("pose {0} has no constraints")]
    NoConstraints(BodyPose),
    #[error("pose {0} defined more than once")]
    DuplicatePose(BodyPose),
    #[error("pose {0} is missing")]
    MissingPose(BodyPose),
    #[error("priority {0} used by more than one pose")]
    DuplicatePriority(i32),
    #[error("visibility threshold {0} outside [0, 1]")]
    VisibilityThreshold(f64),
    #[error("fist sector half-width {0} must be in (0, 45]")]
    FistSector(f64),
    #[error("hysteresis margin {0} must be in [0, 1)")]
    Hysteresis(f64),
    #[error("invalid pipeline settings: {0}")]
    Pipeline(String),
    #[error("invalid motion profile: {0}")]
    Motion(String),
}

/// An angle range in degrees. With `wrap` set, membership means
/// `angle >= lo || angle <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub wrap: bool,
}

impl AngleInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            wrap: false,
        }
    }

    pub fn wrapping(lo: f64, hi: f64) -> Self {
        Self { lo, hi, wrap: true }
    }

    /// Interval of half-width `half` around `center`, wrapping if needed.
    /// Half-widths of 180 or more yield the full circle `[0, 359.999..]`.
    pub fn around(center: f64, half: f64) -> Self {
        if half >= 180.0 {
            return Self::new(0.0, f64::from_bits(360f64.to_bits() - 1));
        }
        let lo = (center - half).rem_euclid(360.0);
        let hi = (center + half).rem_euclid(360.0);
        if lo > hi {
            Self::wrapping(lo, hi)
        } else {
            Self::new(lo, hi)
        }
    }

    pub fn contains(&self, angle: f64) -> bool {
        if self.wrap {
            angle >= self.lo || angle <= self.hi
        } else {
            angle >= self.lo && angle <= self.hi
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for b in [self.lo, self.hi] {
            if !(0.0..360.0).contains(&b) {
                return Err(ConfigError::BoundOutOfRange(b));
            }
        }
        match (self.wrap, self.lo > self.hi) {
            (false, true) => Err(ConfigError::InvertedInterval {
                lo: self.lo,
                hi: self.hi,
            }),
            (true, false) => Err(ConfigError::NonWrappingInterval {
                lo: self.lo,
                hi: self.hi,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyPoseDefinition {
    pub name: BodyPose,
    pub priority: i32,
    pub constraints: BTreeMap<JointName, AngleInterval>,
}

impl BodyPoseDefinition {
    /// True iff every constrained angle is available and inside its interval.
    pub fn matches(&self, angles: &AngleVector) -> bool {
        self.constraints
            .iter()
            .all(|(joint, iv)| angles.get(*joint).is_some_and(|a| iv.contains(a)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandParams {
    pub fist_sector_deg: f64,
    pub hysteresis_margin: f64,
}

impl Default for HandParams {
    fn default() -> Self {
        Self {
            fist_sector_deg: 45.0,
            hysteresis_margin: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureConfig {
    #[serde(default = "default_vis_threshold")]
    pub vis_threshold: f64,
    #[serde(default)]
    pub hand: HandParams,
    pub body: Vec<BodyPoseDefinition>,
}

fn default_vis_threshold() -> f64 {
    DEFAULT_VISIBILITY_THRESHOLD
}

impl GestureConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.vis_threshold) {
            return Err(ConfigError::VisibilityThreshold(self.vis_threshold));
        }
        let sector = self.hand.fist_sector_deg;
        if !(sector > 0.0 && sector <= 45.0) {
            return Err(ConfigError::FistSector(sector));
        }
        let margin = self.hand.hysteresis_margin;
        if !(0.0..1.0).contains(&margin) {
            return Err(ConfigError::Hysteresis(margin));
        }
        let mut names = HashSet::new();
        let mut priorities = HashSet::new();
        for def in &self.body {
            if def.constraints.is_empty() {
                return Err(ConfigError::NoConstraints(def.name));
            }
            for iv in def.constraints.values() {
                iv.validate()?;
            }
            if !names.insert(def.name) {
                return Err(ConfigError::DuplicatePose(def.name));
            }
            if !priorities.insert(def.priority) {
                return Err(ConfigError::DuplicatePriority(def.priority));
            }
        }
        if let Some(missing) = BodyPose::ALL.iter().find(|p| !names.contains(*p)) {
            return Err(ConfigError::MissingPose(*missing));
        }
        Ok(())
    }

    pub fn definition(&self, pose: BodyPose) -> Option<&BodyPoseDefinition> {
        self.body.iter().find(|d| d.name == pose)
    }
}

/// Everything a session needs to turn frames into robot motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    #[serde(flatten)]
    pub gestures: GestureConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub motion: MotionProfile,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let settings: Settings = toml::from_str(text)?;
        settings.validate()?;
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_CONFIG).expect("bundled configuration is valid")
    }

    /// Explicit path, then `$GESTUREQUAD_CONFIG`, then the bundled default.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        if let Some(path) = explicit {
            return Self::load(path);
        }
        match std::env::var_os(CONFIG_ENV_VAR) {
            Some(path) if !path.is_empty() => Self::load(Path::new(&path)),
            _ => Ok(Self::bundled()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.gestures.validate()?;
        self.pipeline.validate().map_err(ConfigError::Pipeline)?;
        self.motion.validate().map_err(ConfigError::Motion)?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize to TOML")
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
