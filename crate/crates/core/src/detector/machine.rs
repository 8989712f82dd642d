//! Per-gesture hysteresis with minimum hold and refractory period.

use super::{DetectionEvent, DetectorConfig};
use crate::label::GestureLabel;

/// Windows whose confidence is within this of a run's maximum count as
/// part of its peak.
pub const PEAK_TOLERANCE: f64 = 0.05;

/// Confidence history of one run above threshold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Peak {
    run: Vec<(usize, f64)>,
    value: f64,
}

impl Peak {
    fn new(value: f64, frame: usize) -> Self {
        Self {
            run: vec![(frame, value)],
            value,
        }
    }

    fn push(&mut self, value: f64, frame: usize) {
        self.run.push((frame, value));
        self.value = self.value.max(value);
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Middle of the stretch from the first to the last window near the
    /// maximum, so a saturated plateau peaks at its center rather than
    /// wherever noise happened to touch the top.
    pub fn frame(&self) -> usize {
        let near = |&&(_, c): &&(usize, f64)| c >= self.value - PEAK_TOLERANCE;
        let first = self.run.iter().find(near).map_or(0, |r| r.0);
        let last = self.run.iter().rev().find(near).map_or(first, |r| r.0);
        first + (last - first) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    Idle,
    /// Consecutive windows at or above the trigger threshold, not yet enough.
    Counting {
        start: usize,
        count: usize,
        peak: Peak,
    },
    Open {
        start: usize,
        peak: Peak,
        last: usize,
    },
    /// Silent through frame `until`, inclusive.
    Refractory { until: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureMachine {
    gesture: GestureLabel,
    phase: Phase,
}

impl GestureMachine {
    pub fn new(gesture: GestureLabel) -> Self {
        Self {
            gesture,
            phase: Phase::Idle,
        }
    }

    pub fn gesture(&self) -> GestureLabel {
        self.gesture
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_open(&self) -> bool {
        matches!(self.phase, Phase::Open { .. })
    }

    /// Counting or open: an event may still come out of the current run.
    pub fn is_engaged(&self) -> bool {
        matches!(self.phase, Phase::Open { .. } | Phase::Counting { .. })
    }

    /// Feeds the confidence of the window ending at `frame`.
    pub fn step(&mut self, frame: usize, conf: f64, cfg: &DetectorConfig) -> Option<DetectionEvent> {
        if let Phase::Refractory { until } = self.phase {
            if frame <= until {
                return None;
            }
            self.phase = Phase::Idle;
        }
        let above = conf >= cfg.trigger_threshold;
        match std::mem::replace(&mut self.phase, Phase::Idle) {
            Phase::Idle | Phase::Refractory { .. } => {
                if above {
                    self.phase = Phase::Counting {
                        start: frame,
                        count: 1,
                        peak: Peak::new(conf, frame),
                    };
                    self.promote(frame, cfg);
                }
                None
            }
            Phase::Counting { start, count, mut peak } => {
                if above {
                    peak.push(conf, frame);
                    self.phase = Phase::Counting {
                        start,
                        count: count + 1,
                        peak,
                    };
                    self.promote(frame, cfg);
                }
                None
            }
            Phase::Open { start, mut peak, last } => {
                if conf < cfg.release_threshold {
                    self.phase = Phase::Refractory {
                        until: frame + cfg.refractory,
                    };
                    Some(self.event(start, &peak, last))
                } else {
                    peak.push(conf, frame);
                    self.phase = Phase::Open {
                        start,
                        peak,
                        last: frame,
                    };
                    None
                }
            }
        }
    }

    fn promote(&mut self, frame: usize, cfg: &DetectorConfig) {
        if matches!(self.phase, Phase::Counting { count, .. } if count >= cfg.min_hold) {
            if let Phase::Counting { start, peak, .. } = std::mem::replace(&mut self.phase, Phase::Idle) {
                self.phase = Phase::Open {
                    start,
                    peak,
                    last: frame,
                };
            }
        }
    }

    fn event(&self, start: usize, peak: &Peak, end: usize) -> DetectionEvent {
        DetectionEvent {
            gesture: self.gesture,
            peak_confidence: peak.value(),
            start_frame: start,
            peak_frame: peak.frame(),
            end_frame: end,
        }
    }

    /// Abandons the current run without emitting anything.
    pub fn cancel(&mut self) {
        if self.is_engaged() {
            self.phase = Phase::Idle;
        }
    }

    /// Closes an event still open at end of stream.
    pub fn finish(&mut self) -> Option<DetectionEvent> {
        match std::mem::replace(&mut self.phase, Phase::Idle) {
            Phase::Open { start, peak, last } => Some(self.event(start, &peak, last)),
            _ => None,
        }
    }
}

/// Runs fresh machines over a precomputed `(window_end_frame, confidences)`
/// series and returns the atomic events, including ones open at the end.
pub fn run_series(series: &[(usize, [f64; 8])], cfg: &DetectorConfig) -> Vec<DetectionEvent> {
    let mut machines = GestureLabel::ATOMIC.map(GestureMachine::new);
    let mut out = Vec::new();
    for (frame, conf) in series {
        super::step_machines(&mut machines, *frame, conf, cfg, &mut out);
    }
    out.extend(machines.iter_mut().filter_map(GestureMachine::finish));
    out
}
