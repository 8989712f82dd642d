//! Body-normalized per-frame features and their sliding-window summaries.
//!
//! Every length is divided by the shoulder width `B = |ShoulderRight - ShoulderLeft|`,
//! which makes the features invariant to where the body stands and to its size.

use thiserror::Error;

use crate::geom::Vec3;
use crate::skeleton::{validate_frame, FrameReport, JointId, SkeletonFrame};

/// Bumped whenever the meaning or order of the feature vector changes.
pub const FEATURE_SPEC_VERSION: u32 = 1;

pub const FRAME_FEATURES: usize = 15;
pub const WINDOW_FEATURES: usize = 32;

/// Bodies narrower than this cannot be normalized.
pub const MIN_SHOULDER_WIDTH: f64 = 1e-6;

// Per-side offsets within a six-feature block.
pub const REL_HEAD_Y: usize = 0;
pub const EXTENSION: usize = 1;
pub const FORWARD: usize = 2;
pub const REL_SHOULDER_Y: usize = 3;
pub const CROSS_BODY: usize = 4;
pub const ELBOW_ANGLE: usize = 5;

pub const LEFT_BLOCK: usize = 0;
pub const RIGHT_BLOCK: usize = 6;
pub const HANDS_DISTANCE: usize = 12;
pub const HAND_STATE_LEFT: usize = 13;
pub const HAND_STATE_RIGHT: usize = 14;

/// Offset of the window maxima inside a [`FeatureVector`].
pub const MAX_OFFSET: usize = 15;
pub const SPEED_LEFT: usize = 30;
pub const SPEED_RIGHT: usize = 31;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("invalid frame: {0}")]
    InvalidFrame(FrameReport),
    #[error("degenerate body: shoulder width {0} is below 1e-6 m")]
    DegenerateBody(f64),
    #[error("window needs exactly {expected} frames, got {got}")]
    FrameCount { expected: usize, got: usize },
    #[error("fps must be positive, got {0}")]
    BadFps(f64),
    #[error("invalid window configuration: {0}")]
    BadWindow(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameFeatures(pub [f64; FRAME_FEATURES]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; WINDOW_FEATURES]);

impl FeatureVector {
    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    /// Frames per window.
    pub window: usize,
    /// Frames between consecutive window ends.
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 15,
            stride: 1,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.window < 2 {
            return Err(FeatureError::BadWindow("window must be at least 2 frames".into()));
        }
        if self.stride < 1 {
            return Err(FeatureError::BadWindow("stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Window end frames for a clip of `len` frames.
    pub fn ends(&self, len: usize) -> impl Iterator<Item = usize> {
        let first = self.window - 1;
        (first..len).step_by(self.stride)
    }
}

/// What a window needs from each frame: its features plus the raw hand
/// positions and body scale for the speed terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSummary {
    pub features: FrameFeatures,
    pub hand_left: Vec3,
    pub hand_right: Vec3,
    pub scale: f64,
}

fn side_features(f: &SkeletonFrame, right: bool, b: f64) -> [f64; 6] {
    use JointId::*;
    let (hand, shoulder, opposite, elbow, wrist) = if right {
        (HandRight, ShoulderRight, ShoulderLeft, ElbowRight, WristRight)
    } else {
        (HandLeft, ShoulderLeft, ShoulderRight, ElbowLeft, WristLeft)
    };
    let h = f.joint(hand);
    let s = f.joint(shoulder);
    let e = f.joint(elbow);
    [
        (h.y - f.joint(Head).y) / b,
        h.distance(f.joint(SpineShoulder)) / b,
        (f.joint(SpineMid).z - h.z) / b,
        (h.y - s.y) / b,
        h.distance(f.joint(opposite)) / b,
        (s - e).angle_between(f.joint(wrist) - e),
    ]
}

pub fn frame_summary(frame: &SkeletonFrame) -> Result<FrameSummary, FeatureError> {
    let report = validate_frame(frame);
    if !report.is_ok() {
        return Err(FeatureError::InvalidFrame(report));
    }
    let b = frame
        .joint(JointId::ShoulderRight)
        .distance(frame.joint(JointId::ShoulderLeft));
    if !(b >= MIN_SHOULDER_WIDTH) {
        return Err(FeatureError::DegenerateBody(b));
    }
    let mut out = [0.0; FRAME_FEATURES];
    out[LEFT_BLOCK..LEFT_BLOCK + 6].copy_from_slice(&side_features(frame, false, b));
    out[RIGHT_BLOCK..RIGHT_BLOCK + 6].copy_from_slice(&side_features(frame, true, b));
    let hl = frame.joint(JointId::HandLeft);
    let hr = frame.joint(JointId::HandRight);
    out[HANDS_DISTANCE] = hl.distance(hr) / b;
    out[HAND_STATE_LEFT] = f64::from(frame.hand_left.code());
    out[HAND_STATE_RIGHT] = f64::from(frame.hand_right.code());
    Ok(FrameSummary {
        features: FrameFeatures(out),
        hand_left: hl,
        hand_right: hr,
        scale: b,
    })
}

pub fn frame_features(frame: &SkeletonFrame) -> Result<FrameFeatures, FeatureError> {
    frame_summary(frame).map(|s| s.features)
}

/// Means, maxima and mean hand speeds over consecutive frame summaries.
pub fn aggregate(window: &[FrameSummary], fps: f64) -> FeatureVector {
    debug_assert!(window.len() >= 2);
    let n = window.len() as f64;
    let mut out = [0.0; WINDOW_FEATURES];
    let mut max = [f64::NEG_INFINITY; FRAME_FEATURES];
    let mut min = [f64::INFINITY; FRAME_FEATURES];
    let mut sum = [0.0; FRAME_FEATURES];
    for s in window {
        for k in 0..FRAME_FEATURES {
            let v = s.features.0[k];
            sum[k] += v;
            max[k] = max[k].max(v);
            min[k] = min[k].min(v);
        }
    }
    for k in 0..FRAME_FEATURES {
        // Summation rounding must not push the mean outside [min, max].
        out[k] = (sum[k] / n).clamp(min[k], max[k]);
        out[MAX_OFFSET + k] = max[k];
    }
    let (mut vl, mut vr) = (0.0, 0.0);
    for pair in window.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        vl += b.hand_left.distance(a.hand_left) * fps / b.scale;
        vr += b.hand_right.distance(a.hand_right) * fps / b.scale;
    }
    out[SPEED_LEFT] = vl / (n - 1.0);
    out[SPEED_RIGHT] = vr / (n - 1.0);
    FeatureVector(out)
}

pub fn window_features(
    frames: &[SkeletonFrame],
    fps: f64,
    config: &WindowConfig,
) -> Result<FeatureVector, FeatureError> {
    config.validate()?;
    if frames.len() != config.window {
        return Err(FeatureError::FrameCount {
            expected: config.window,
            got: frames.len(),
        });
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(FeatureError::BadFps(fps));
    }
    let summaries = frames
        .iter()
        .map(frame_summary)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(&summaries, fps))
}

/// Every window of a frame sequence, keyed by the window's last frame index.
pub fn sliding_windows(
    frames: &[SkeletonFrame],
    fps: f64,
    config: &WindowConfig,
) -> Result<Vec<(usize, FeatureVector)>, FeatureError> {
    config.validate()?;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(FeatureError::BadFps(fps));
    }
    let summaries = frames
        .iter()
        .map(frame_summary)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(config
        .ends(summaries.len())
        .map(|end| (end, aggregate(&summaries[end + 1 - config.window..=end], fps)))
        .collect())
}
