//! Debounced gesture → command dispatch with a post-motion cooldown.
//!
//! The state machine never reads a clock; every call carries the logical
//! time of the event that triggered it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{map_gesture_to_command, Gesture, GestureKind, RobotCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Identical consecutive frames required before dispatch.
    pub stability_frames: u32,
    /// Quiet period after the robot stops moving.
    pub cooldown_ms: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stability_frames: 5,
            cooldown_ms: 2000,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.stability_frames == 0 {
            return Err("stability_frames must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Executing,
    Cooldown { deadline_ms: u64 },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "Idle",
            Phase::Executing => "Executing",
            Phase::Cooldown { .. } => "Cooldown",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandEvent {
    pub timestamp_ms: u64,
    pub command: RobotCommand,
    pub source_gesture: Gesture,
}

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("motion_complete is only valid while executing (phase is {0})")]
pub struct IllegalTransition(pub &'static str);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipeline {
    config: PipelineConfig,
    mode: GestureKind,
    phase: Phase,
    stable_gesture: Gesture,
    stable_count: u32,
    last_ms: u64,
}

impl Pipeline {
    pub fn new(mode: GestureKind, config: PipelineConfig) -> Self {
        Self {
            config,
            mode,
            phase: Phase::Idle,
            stable_gesture: Gesture::Neutral,
            stable_count: 0,
            last_ms: 0,
        }
    }

    pub fn mode(&self) -> GestureKind {
        self.mode
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn stable_gesture(&self) -> Gesture {
        self.stable_gesture
    }

    pub fn stable_count(&self) -> u32 {
        self.stable_count
    }

    /// Cooldown time left at `now_ms`, zero outside cooldown.
    pub fn cooldown_remaining(&self, now_ms: u64) -> u64 {
        match self.phase {
            Phase::Cooldown { deadline_ms } => deadline_ms.saturating_sub(now_ms),
            _ => 0,
        }
    }

    fn clear(&mut self) {
        self.stable_gesture = Gesture::Neutral;
        self.stable_count = 0;
    }

    /// Feeds one classified frame. Gestures of the other kind are ignored
    /// outright; `Neutral` resets the stability counter.
    pub fn step(&mut self, gesture: Gesture, now_ms: u64) -> Option<CommandEvent> {
        let now_ms = now_ms.max(self.last_ms);
        self.last_ms = now_ms;

        if let Phase::Cooldown { deadline_ms } = self.phase {
            if now_ms < deadline_ms {
                return None;
            }
            self.phase = Phase::Idle;
            self.clear();
        }
        if self.phase == Phase::Executing {
            return None;
        }
        if gesture.kind().is_some_and(|k| k != self.mode) {
            return None;
        }
        if gesture.is_neutral() {
            self.clear();
            return None;
        }

        if gesture == self.stable_gesture {
            self.stable_count += 1;
        } else {
            self.stable_gesture = gesture;
            self.stable_count = 1;
        }
        if self.stable_count < self.config.stability_frames {
            return None;
        }

        let command = map_gesture_to_command(gesture)?;
        self.phase = Phase::Executing;
        self.clear();
        Some(CommandEvent {
            timestamp_ms: now_ms,
            command,
            source_gesture: gesture,
        })
    }

    /// The robot finished the dispatched motion at `now_ms`.
    pub fn motion_complete(&mut self, now_ms: u64) -> Result<(), IllegalTransition> {
        if self.phase != Phase::Executing {
            return Err(IllegalTransition(self.phase.name()));
        }
        let now_ms = now_ms.max(self.last_ms);
        self.last_ms = now_ms;
        self.phase = Phase::Cooldown {
            deadline_ms: now_ms + self.config.cooldown_ms,
        };
        Ok(())
    }
}
