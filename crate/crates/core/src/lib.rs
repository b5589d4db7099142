//! Gesture recognition, command dispatch, quadruped simulation and
//! evaluation statistics for gesture-controlled robot navigation.
//!
//! Everything here is deterministic and clock-free: time enters only
//! through the timestamps of the frames being processed.

pub mod angles;
pub mod body;
pub mod config;
pub mod derive;
pub mod engine;
pub mod gesture;
pub mod hand;
pub mod landmarks;
pub mod pipeline;
pub mod script;
pub mod session;
pub mod sim;
pub mod stats;
pub mod synth;
pub mod ueq;

pub use config::Settings;
pub use engine::Engine;
pub use gesture::{Gesture, GestureKind, RobotCommand};
pub use landmarks::{BodyFrame, HandFrame, Landmark};
