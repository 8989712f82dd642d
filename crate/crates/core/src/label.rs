use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Gesture vocabulary. The first eight variants are the trained atomic
/// classes; `Hug` and `HoldHands` are composites; `None` is the null class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GestureLabel {
    R5,
    L5,
    RH,
    LH,
    RS,
    LS,
    RM,
    LM,
    Hug,
    HoldHands,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown gesture label {0:?}")]
pub struct UnknownLabel(pub String);

impl GestureLabel {
    pub const ATOMIC: [GestureLabel; 8] = [
        GestureLabel::R5,
        GestureLabel::L5,
        GestureLabel::RH,
        GestureLabel::LH,
        GestureLabel::RS,
        GestureLabel::LS,
        GestureLabel::RM,
        GestureLabel::LM,
    ];

    /// The six gestures of the headline pilot analysis (mat gestures excluded).
    pub const RETAINED: [GestureLabel; 6] = [
        GestureLabel::R5,
        GestureLabel::L5,
        GestureLabel::RH,
        GestureLabel::LH,
        GestureLabel::RS,
        GestureLabel::LS,
    ];

    pub const ALL: [GestureLabel; 11] = [
        GestureLabel::R5,
        GestureLabel::L5,
        GestureLabel::RH,
        GestureLabel::LH,
        GestureLabel::RS,
        GestureLabel::LS,
        GestureLabel::RM,
        GestureLabel::LM,
        GestureLabel::Hug,
        GestureLabel::HoldHands,
        GestureLabel::None,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn is_atomic(self) -> bool {
        self.code() < 8
    }

    pub fn is_composite(self) -> bool {
        matches!(self, GestureLabel::Hug | GestureLabel::HoldHands)
    }

    /// Index into an 8-slot per-gesture array, for atomic labels only.
    pub fn atomic_index(self) -> Option<usize> {
        self.is_atomic().then(|| self.code())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GestureLabel::R5 => "R5",
            GestureLabel::L5 => "L5",
            GestureLabel::RH => "RH",
            GestureLabel::LH => "LH",
            GestureLabel::RS => "RS",
            GestureLabel::LS => "LS",
            GestureLabel::RM => "RM",
            GestureLabel::LM => "LM",
            GestureLabel::Hug => "HUG",
            GestureLabel::HoldHands => "HOLD_HANDS",
            GestureLabel::None => "NONE",
        }
    }

    /// Left/right counterpart; symmetric labels map to themselves.
    pub fn mirrored(self) -> GestureLabel {
        use GestureLabel::*;
        match self {
            R5 => L5,
            L5 => R5,
            RH => LH,
            LH => RH,
            RS => LS,
            LS => RS,
            RM => LM,
            LM => RM,
            other => other,
        }
    }

    pub fn is_left_handed(self) -> bool {
        use GestureLabel::*;
        matches!(self, L5 | LH | LS | LM)
    }
}

impl fmt::Display for GestureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GestureLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GestureLabel::ALL
            .iter()
            .copied()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}
