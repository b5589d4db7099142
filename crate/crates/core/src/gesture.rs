//! Gesture vocabulary and the gesture → robot command table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which recognizer a gesture comes from, and which one a session listens to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestureKind {
    Body,
    Hand,
}

impl fmt::Display for GestureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GestureKind::Body => "body",
            GestureKind::Hand => "hand",
        })
    }
}

impl FromStr for GestureKind {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "body" => Ok(GestureKind::Body),
            "hand" => Ok(GestureKind::Hand),
            other => Err(UnknownName(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unknown name `{0}`")]
pub struct UnknownName(pub String);

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownName;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    other => Err(UnknownName(other.to_string())),
                }
            }
        }
    };
}

named_enum! {
    /// Static full-body poses.
    BodyPose {
        HandsOnHips,
        HandsOnHead,
        LeftArmBent,
        RightArmBent,
        LeftArmOut,
        RightArmOut,
        TPose,
        ArmsElevated,
        BothArmsBent,
    }
}

named_enum! {
    /// Static single-hand signs.
    HandSign {
        PointUp,
        PalmOut,
        PointLeft,
        PointRight,
        SidewaysLeft,
        SidewaysRight,
        FistLeft,
        FistRight,
        Fist,
    }
}

named_enum! {
    RobotCommand {
        GoForward,
        GoBackward,
        RotateCCW,
        RotateCW,
        StrafeLeft,
        StrafeRight,
        LayDown,
        StandUp,
        TurnAround,
    }
}

impl RobotCommand {
    /// Human-readable action label.
    pub fn label(&self) -> &'static str {
        match self {
            RobotCommand::GoForward => "Go forward",
            RobotCommand::GoBackward => "Go backward",
            RobotCommand::RotateCCW => "Rotate counter-clockwise",
            RobotCommand::RotateCW => "Rotate clockwise",
            RobotCommand::StrafeLeft => "Strafe left",
            RobotCommand::StrafeRight => "Strafe right",
            RobotCommand::LayDown => "Lay down",
            RobotCommand::StandUp => "Stand up",
            RobotCommand::TurnAround => "Turn around",
        }
    }

    pub fn is_posture_change(&self) -> bool {
        matches!(self, RobotCommand::LayDown | RobotCommand::StandUp)
    }
}

/// A recognized gesture, or `Neutral` when nothing in the vocabulary matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gesture {
    Body(BodyPose),
    Hand(HandSign),
    Neutral,
}

impl Gesture {
    pub fn kind(&self) -> Option<GestureKind> {
        match self {
            Gesture::Body(_) => Some(GestureKind::Body),
            Gesture::Hand(_) => Some(GestureKind::Hand),
            Gesture::Neutral => None,
        }
    }

    pub fn is_neutral(&self) -> bool {
        matches!(self, Gesture::Neutral)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Gesture::Body(p) => p.as_str(),
            Gesture::Hand(h) => h.as_str(),
            Gesture::Neutral => "Neutral",
        }
    }

    /// Every non-neutral gesture of one kind.
    pub fn vocabulary(kind: GestureKind) -> Vec<Gesture> {
        match kind {
            GestureKind::Body => BodyPose::ALL.iter().copied().map(Gesture::Body).collect(),
            GestureKind::Hand => HandSign::ALL.iter().copied().map(Gesture::Hand).collect(),
        }
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gesture {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "Neutral" {
            return Ok(Gesture::Neutral);
        }
        if let Ok(p) = s.parse::<BodyPose>() {
            return Ok(Gesture::Body(p));
        }
        s.parse::<HandSign>().map(Gesture::Hand)
    }
}

impl Serialize for Gesture {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Gesture {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Action bound to a gesture; `None` for `Neutral`.
pub fn map_gesture_to_command(gesture: Gesture) -> Option<RobotCommand> {
    use RobotCommand::*;
    let cmd = match gesture {
        Gesture::Neutral => return None,
        Gesture::Hand(sign) => match sign {
            HandSign::PointUp => GoForward,
            HandSign::PalmOut => GoBackward,
            HandSign::PointLeft => RotateCCW,
            HandSign::PointRight => RotateCW,
            HandSign::SidewaysLeft => StrafeLeft,
            HandSign::SidewaysRight => StrafeRight,
            HandSign::FistLeft => LayDown,
            HandSign::FistRight => StandUp,
            HandSign::Fist => TurnAround,
        },
        Gesture::Body(pose) => match pose {
            BodyPose::HandsOnHips => GoForward,
            BodyPose::HandsOnHead => GoBackward,
            BodyPose::LeftArmBent => RotateCCW,
            BodyPose::RightArmBent => RotateCW,
            BodyPose::LeftArmOut => StrafeLeft,
            BodyPose::RightArmOut => StrafeRight,
            BodyPose::TPose => LayDown,
            BodyPose::ArmsElevated => StandUp,
            BodyPose::BothArmsBent => TurnAround,
        },
    };
    Some(cmd)
}

/// Inverse of [`map_gesture_to_command`] within one vocabulary.
pub fn gesture_for_command(kind: GestureKind, command: RobotCommand) -> Gesture {
    Gesture::vocabulary(kind)
        .into_iter()
        .find(|g| map_gesture_to_command(*g) == Some(command))
        .expect("gesture table is total over commands")
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn table_rows() {
        assert_eq!(
            map_gesture_to_command(Gesture::Hand(HandSign::PointUp)),
            Some(RobotCommand::GoForward)
        );
        assert_eq!(
            map_gesture_to_command(Gesture::Body(BodyPose::TPose)),
            Some(RobotCommand::LayDown)
        );
        assert_eq!(
            map_gesture_to_command(Gesture::Hand(HandSign::FistLeft)),
            Some(RobotCommand::LayDown)
        );
        assert_eq!(
            map_gesture_to_command(Gesture::Hand(HandSign::Fist)),
            Some(RobotCommand::TurnAround)
        );
        assert_eq!(map_gesture_to_command(Gesture::Neutral), None);
    }

    #[test]
    fn mapping_is_bijective_per_kind() {
        for kind in [GestureKind::Body, GestureKind::Hand] {
            let vocab = Gesture::vocabulary(kind);
            assert_eq!(vocab.len(), 9);
            let commands: HashSet<_> = vocab
                .iter()
                .map(|g| map_gesture_to_command(*g).unwrap())
                .collect();
            assert_eq!(commands.len(), RobotCommand::ALL.len());
            for cmd in RobotCommand::ALL {
                let g = gesture_for_command(kind, *cmd);
                assert_eq!(g.kind(), Some(kind));
                assert_eq!(map_gesture_to_command(g), Some(*cmd));
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in [GestureKind::Body, GestureKind::Hand] {
            for g in Gesture::vocabulary(kind) {
                assert_eq!(g.as_str().parse::<Gesture>().unwrap(), g);
                let json = serde_json::to_string(&g).unwrap();
                assert_eq!(serde_json::from_str::<Gesture>(&json).unwrap(), g);
            }
        }
        assert_eq!("Neutral".parse::<Gesture>().unwrap(), Gesture::Neutral);
        assert!("Wave".parse::<Gesture>().is_err());
        assert_eq!(
            "RotateCCW".parse::<RobotCommand>().unwrap(),
            RobotCommand::RotateCCW
        );
    }
}
