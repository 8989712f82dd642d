//! Streaming gesture detection.
//!
//! Each frame extends a rolling window; once the window is full every atomic
//! detector reports a confidence, and a per-gesture hysteresis machine turns
//! the confidence series into events. Left and right shoulder pats whose
//! peaks coincide are merged into a hug.

mod compose;
mod machine;

use std::collections::VecDeque;

use thiserror::Error;

use crate::classifier::{BundleError, ModelBundle};
use crate::features::{aggregate, frame_summary, FeatureError, FeatureVector, FrameSummary, WindowConfig};
use crate::label::GestureLabel;
use crate::skeleton::{Clip, ClipError};

pub use compose::compose_events;
pub use machine::{run_series, GestureMachine, Peak, Phase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Confidence that must be held to open an event.
    pub trigger_threshold: f64,
    /// An open event closes on the first window below this.
    pub release_threshold: f64,
    /// Consecutive windows at or above the trigger threshold before opening.
    pub min_hold: usize,
    /// Frames after an emitted event during which that gesture stays silent.
    pub refractory: usize,
    /// Largest peak-to-peak distance, in frames, for LS + RS to form a hug.
    pub hug_window: usize,
    pub window: WindowConfig,
    /// Silence RM/LM while any other gesture's event is open.
    pub suppress_mat_while_active: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            trigger_threshold: 0.5,
            release_threshold: 0.4,
            min_hold: 5,
            refractory: 30,
            hug_window: 10,
            window: WindowConfig::default(),
            suppress_mat_while_active: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        let (r, t) = (self.release_threshold, self.trigger_threshold);
        if !(0.0 <= r && r < t && t <= 1.0) {
            return Err(DetectError::Config(
                "thresholds must satisfy 0 <= release < trigger <= 1".into(),
            ));
        }
        if self.min_hold < 1 {
            return Err(DetectError::Config("min_hold must be at least 1".into()));
        }
        self.window.validate().map_err(DetectError::Feature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub gesture: GestureLabel,
    pub peak_confidence: f64,
    pub start_frame: usize,
    pub peak_frame: usize,
    pub end_frame: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("invalid detector configuration: {0}")]
    Config(String),
    #[error("frame {index}: {source}")]
    Frame { index: usize, source: FeatureError },
    #[error(transparent)]
    Feature(FeatureError),
    #[error(transparent)]
    Clip(#[from] ClipError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// Result of feeding one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub frame: usize,
    /// Window features ending at this frame, once the window is full and
    /// this frame falls on the stride.
    pub features: Option<FeatureVector>,
    /// Per-gesture confidences in code order; all zero until a window exists.
    pub confidences: [f64; 8],
    pub events: Vec<DetectionEvent>,
}

const HUG_PARTS: [GestureLabel; 2] = [GestureLabel::LS, GestureLabel::RS];

/// Single-owner detector state for one skeleton stream.
pub struct Detector<'b> {
    bundle: &'b ModelBundle,
    config: DetectorConfig,
    fps: f64,
    buffer: VecDeque<FrameSummary>,
    frames_seen: usize,
    machines: [GestureMachine; 8],
    /// LS/RS events held back until no hug partner can still appear.
    pending: Vec<DetectionEvent>,
}

impl<'b> Detector<'b> {
    pub fn new(bundle: &'b ModelBundle, config: DetectorConfig, fps: f64) -> Result<Self, DetectError> {
        config.validate()?;
        bundle.check_feature_spec()?;
        if !(fps.is_finite() && fps > 0.0) {
            return Err(DetectError::Feature(FeatureError::BadFps(fps)));
        }
        Ok(Self {
            bundle,
            config,
            fps,
            buffer: VecDeque::with_capacity(config.window.window),
            frames_seen: 0,
            machines: GestureLabel::ATOMIC.map(GestureMachine::new),
            pending: Vec::new(),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn step(&mut self, frame: &crate::skeleton::SkeletonFrame) -> Result<StepOutput, DetectError> {
        let index = self.frames_seen;
        let summary = frame_summary(frame).map_err(|source| DetectError::Frame { index, source })?;
        self.frames_seen += 1;
        let w = self.config.window.window;
        if self.buffer.len() == w {
            self.buffer.pop_front();
        }
        self.buffer.push_back(summary);

        let mut out = StepOutput {
            frame: index,
            features: None,
            confidences: [0.0; 8],
            events: Vec::new(),
        };
        let on_stride = index + 1 >= w && (index + 1 - w) % self.config.window.stride == 0;
        if self.buffer.len() == w && on_stride {
            let window: Vec<FrameSummary> = self.buffer.iter().copied().collect();
            let x = aggregate(&window, self.fps);
            let conf = self.bundle.confidences(&x);
            let mut atomic = Vec::new();
            step_machines(&mut self.machines, index, &conf, &self.config, &mut atomic);
            out.features = Some(x);
            out.confidences = conf;
            for e in atomic {
                if HUG_PARTS.contains(&e.gesture) {
                    self.pending.push(e);
                } else {
                    out.events.push(e);
                }
            }
        }
        self.flush_pending(index, false, &mut out.events);
        Ok(out)
    }

    /// Ends the stream: closes open events and releases held ones.
    pub fn finish(&mut self) -> Vec<DetectionEvent> {
        let mut events = Vec::new();
        for m in self.machines.iter_mut() {
            if let Some(e) = m.finish() {
                if HUG_PARTS.contains(&e.gesture) {
                    self.pending.push(e);
                } else {
                    events.push(e);
                }
            }
        }
        self.flush_pending(self.frames_seen, true, &mut events);
        events
    }

    fn flush_pending(&mut self, now: usize, force: bool, out: &mut Vec<DetectionEvent>) {
        if self.pending.is_empty() {
            return;
        }
        let busy = HUG_PARTS
            .iter()
            .any(|g| self.machines[g.code()].is_engaged());
        let latest = self.pending.iter().map(|e| e.peak_frame).max().unwrap_or(0);
        if force || (!busy && now > latest + self.config.hug_window) {
            let held = std::mem::take(&mut self.pending);
            out.extend(compose_events(&held, &self.config));
        }
    }
}

/// Advances every machine by one window. Shared by the streaming and batch paths.
fn step_machines(
    machines: &mut [GestureMachine; 8],
    frame: usize,
    conf: &[f64; 8],
    config: &DetectorConfig,
    out: &mut Vec<DetectionEvent>,
) {
    let others_active = config.suppress_mat_while_active
        && machines
            .iter()
            .any(|m| !matches!(m.gesture(), GestureLabel::RM | GestureLabel::LM) && m.is_open());
    for (m, &c) in machines.iter_mut().zip(conf) {
        if others_active && matches!(m.gesture(), GestureLabel::RM | GestureLabel::LM) {
            m.cancel();
            continue;
        }
        out.extend(m.step(frame, c, config));
    }
}

/// Runs a whole clip through a fresh streaming detector; returns the final
/// (composed) events ordered by peak frame, then gesture code.
pub fn detect_clip(
    clip: &Clip,
    bundle: &ModelBundle,
    config: &DetectorConfig,
) -> Result<Vec<DetectionEvent>, DetectError> {
    clip.validate()?;
    let mut det = Detector::new(bundle, *config, clip.fps)?;
    let mut events = Vec::new();
    for f in &clip.frames {
        events.extend(det.step(f)?.events);
    }
    events.extend(det.finish());
    events.sort_by_key(|e| (e.peak_frame, e.gesture));
    Ok(events)
}

/// The same detection computed from all windows at once.
pub fn detect_clip_batch(
    clip: &Clip,
    bundle: &ModelBundle,
    config: &DetectorConfig,
) -> Result<Vec<DetectionEvent>, DetectError> {
    clip.validate()?;
    config.validate()?;
    bundle.check_feature_spec()?;
    let windows = crate::features::sliding_windows(&clip.frames, clip.fps, &config.window)
        .map_err(DetectError::Feature)?;
    let series: Vec<(usize, [f64; 8])> = windows
        .iter()
        .map(|(end, x)| (*end, bundle.confidences(x)))
        .collect();
    let atomic = run_series(&series, config);
    Ok(compose_events(&atomic, config))
}

/// The strongest event's gesture, or `NONE` when nothing fired.
pub fn strongest(events: &[DetectionEvent]) -> GestureLabel {
    events
        .iter()
        .min_by(|a, b| {
            b.peak_confidence
                .total_cmp(&a.peak_confidence)
                .then(a.peak_frame.cmp(&b.peak_frame))
                .then(a.gesture.cmp(&b.gesture))
        })
        .map_or(GestureLabel::None, |e| e.gesture)
}

pub fn classify_prompted_clip(
    clip: &Clip,
    bundle: &ModelBundle,
    config: &DetectorConfig,
) -> Result<GestureLabel, DetectError> {
    Ok(strongest(&detect_clip(clip, bundle, config)?))
}
