//! Skeleton data model: joints, hand states, frames, labelled clips.

mod format;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geom::Vec3;
use crate::label::GestureLabel;

pub use format::{parse_clip, serialize_clip, ParseError};
pub use format::CLIP_FORMAT_VERSION;
pub use synth::{
    cohort, cohort_with, participant_traits, synth_clip, synth_two_sided, ArmPlan, CohortClip,
    ParticipantTraits, SynthError, SynthParams, DEFAULT_CLIPS_PER_GESTURE, DEFAULT_VOLUNTEERS,
};

pub const JOINT_COUNT: usize = 25;

/// Tracked body joints. Discriminants are the stable on-disk codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JointId {
    SpineBase,
    SpineMid,
    SpineShoulder,
    Neck,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    HandTipLeft,
    ThumbLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HandTipRight,
    ThumbRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
}

impl JointId {
    pub const ALL: [JointId; JOINT_COUNT] = [
        JointId::SpineBase,
        JointId::SpineMid,
        JointId::SpineShoulder,
        JointId::Neck,
        JointId::Head,
        JointId::ShoulderLeft,
        JointId::ElbowLeft,
        JointId::WristLeft,
        JointId::HandLeft,
        JointId::HandTipLeft,
        JointId::ThumbLeft,
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::HandTipRight,
        JointId::ThumbRight,
        JointId::HipLeft,
        JointId::KneeLeft,
        JointId::AnkleLeft,
        JointId::FootLeft,
        JointId::HipRight,
        JointId::KneeRight,
        JointId::AnkleRight,
        JointId::FootRight,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<JointId> {
        JointId::ALL.get(code).copied()
    }

    /// The same joint on the other side of the body; midline joints map to themselves.
    pub fn mirrored(self) -> JointId {
        use JointId::*;
        match self {
            ShoulderLeft => ShoulderRight,
            ElbowLeft => ElbowRight,
            WristLeft => WristRight,
            HandLeft => HandRight,
            HandTipLeft => HandTipRight,
            ThumbLeft => ThumbRight,
            HipLeft => HipRight,
            KneeLeft => KneeRight,
            AnkleLeft => AnkleRight,
            FootLeft => FootRight,
            ShoulderRight => ShoulderLeft,
            ElbowRight => ElbowLeft,
            WristRight => WristLeft,
            HandRight => HandLeft,
            HandTipRight => HandTipLeft,
            ThumbRight => ThumbLeft,
            HipRight => HipLeft,
            KneeRight => KneeLeft,
            AnkleRight => AnkleLeft,
            FootRight => FootLeft,
            midline => midline,
        }
    }
}

/// Discrete hand configuration reported alongside joint positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum HandState {
    #[default]
    Neutral = 0,
    OnTable = 1,
    PalmOut = 2,
    CurvedTowardCamera = 3,
    ReachingSide = 4,
}

impl HandState {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<HandState> {
        Some(match code {
            0 => HandState::Neutral,
            1 => HandState::OnTable,
            2 => HandState::PalmOut,
            3 => HandState::CurvedTowardCamera,
            4 => HandState::ReachingSide,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    /// Seconds since the start of the clip.
    pub t: f64,
    pub joints: [Vec3; JOINT_COUNT],
    pub hand_left: HandState,
    pub hand_right: HandState,
}

impl SkeletonFrame {
    pub fn new(t: f64, joints: [Vec3; JOINT_COUNT]) -> Self {
        Self {
            t,
            joints,
            hand_left: HandState::Neutral,
            hand_right: HandState::Neutral,
        }
    }

    pub fn joint(&self, j: JointId) -> Vec3 {
        self.joints[j.code()]
    }

    pub fn set_joint(&mut self, j: JointId, p: Vec3) {
        self.joints[j.code()] = p;
    }

    /// Reflect through the sagittal plane: negate x and swap left/right roles.
    pub fn mirrored(&self) -> SkeletonFrame {
        let mut joints = [Vec3::ZERO; JOINT_COUNT];
        for j in JointId::ALL {
            joints[j.mirrored().code()] = self.joint(j).mirror_x();
        }
        SkeletonFrame {
            t: self.t,
            joints,
            hand_left: self.hand_right,
            hand_right: self.hand_left,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFiniteTimestamp,
    NegativeTimestamp,
    NonFiniteCoordinate { joint: JointId, axis: char },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteTimestamp => f.write_str("non-finite timestamp"),
            Violation::NegativeTimestamp => f.write_str("negative timestamp"),
            Violation::NonFiniteCoordinate { joint, axis } => {
                write!(f, "non-finite {axis} in joint {} ({joint:?})", joint.code())
            }
        }
    }
}

/// Outcome of [`validate_frame`]; empty means the frame is usable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameReport {
    pub violations: Vec<Violation>,
}

impl FrameReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FrameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_frame(frame: &SkeletonFrame) -> FrameReport {
    let mut violations = Vec::new();
    if !frame.t.is_finite() {
        violations.push(Violation::NonFiniteTimestamp);
    } else if frame.t < 0.0 {
        violations.push(Violation::NegativeTimestamp);
    }
    for j in JointId::ALL {
        let p = frame.joint(j);
        for (axis, v) in [('x', p.x), ('y', p.y), ('z', p.z)] {
            if !v.is_finite() {
                violations.push(Violation::NonFiniteCoordinate { joint: j, axis });
            }
        }
    }
    FrameReport { violations }
}

/// A labelled run of frames, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelSpan {
    pub gesture: GestureLabel,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl LabelSpan {
    pub fn contains_range(&self, first: usize, last: usize) -> bool {
        self.start_frame <= first && last <= self.end_frame
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClipError {
    #[error("fps must be positive and finite, got {0}")]
    BadFps(f64),
    #[error("frame {index}: {report}")]
    InvalidFrame { index: usize, report: FrameReport },
    #[error("frame {index}: timestamp {t} does not match {index}/fps")]
    Timestamp { index: usize, t: f64 },
    #[error("span {gesture} [{start}, {end}] is outside a clip of {len} frames or inverted")]
    SpanBounds {
        gesture: GestureLabel,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("span label {0} is not an atomic gesture")]
    SpanLabel(GestureLabel),
    #[error("overlapping spans for {0}")]
    SpanOverlap(GestureLabel),
}

/// Allowed drift between a stored timestamp and `i / fps`.
pub const TIMESTAMP_TOLERANCE: f64 = 1e-9;

/// A fixed-rate recording with optional gesture annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub fps: f64,
    pub frames: Vec<SkeletonFrame>,
    pub spans: Vec<LabelSpan>,
    pub meta: BTreeMap<String, String>,
}

impl Clip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Gestures annotated in this clip, in code order, without duplicates.
    pub fn gestures(&self) -> Vec<GestureLabel> {
        let mut g: Vec<GestureLabel> = self.spans.iter().map(|s| s.gesture).collect();
        g.sort();
        g.dedup();
        g
    }

    pub fn validate(&self) -> Result<(), ClipError> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(ClipError::BadFps(self.fps));
        }
        for (index, frame) in self.frames.iter().enumerate() {
            let report = validate_frame(frame);
            if !report.is_ok() {
                return Err(ClipError::InvalidFrame { index, report });
            }
            if (frame.t - index as f64 / self.fps).abs() > TIMESTAMP_TOLERANCE {
                return Err(ClipError::Timestamp { index, t: frame.t });
            }
        }
        let len = self.frames.len();
        for s in &self.spans {
            if !s.gesture.is_atomic() {
                return Err(ClipError::SpanLabel(s.gesture));
            }
            if s.start_frame > s.end_frame || s.end_frame >= len {
                return Err(ClipError::SpanBounds {
                    gesture: s.gesture,
                    start: s.start_frame,
                    end: s.end_frame,
                    len,
                });
            }
        }
        for (i, a) in self.spans.iter().enumerate() {
            for b in &self.spans[i + 1..] {
                if a.gesture == b.gesture
                    && a.start_frame <= b.end_frame
                    && b.start_frame <= a.end_frame
                {
                    return Err(ClipError::SpanOverlap(a.gesture));
                }
            }
        }
        Ok(())
    }
}
