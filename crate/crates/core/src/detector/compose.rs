//! Composite gestures built from simultaneous atomic events.

use super::{DetectionEvent, DetectorConfig};
use crate::label::GestureLabel;

/// Pairs LS and RS events whose peaks lie within `hug_window` frames into a
/// HUG spanning both; paired constituents are dropped from the output.
/// Pairing is greedy in LS peak order, each LS taking the nearest free RS
/// (earlier RS on equal distance). Output is ordered by peak frame, then
/// gesture code.
pub fn compose_events(events: &[DetectionEvent], config: &DetectorConfig) -> Vec<DetectionEvent> {
    let mut consumed = vec![false; events.len()];
    let mut lefts: Vec<usize> = (0..events.len())
        .filter(|&i| events[i].gesture == GestureLabel::LS)
        .collect();
    lefts.sort_by_key(|&i| (events[i].peak_frame, i));
    let mut out = Vec::new();
    for l in lefts {
        let ls = events[l];
        let partner = (0..events.len())
            .filter(|&r| !consumed[r] && events[r].gesture == GestureLabel::RS)
            .filter(|&r| events[r].peak_frame.abs_diff(ls.peak_frame) <= config.hug_window)
            .min_by_key(|&r| (events[r].peak_frame.abs_diff(ls.peak_frame), events[r].peak_frame, r));
        if let Some(r) = partner {
            let rs = events[r];
            consumed[l] = true;
            consumed[r] = true;
            let weaker = if rs.peak_confidence < ls.peak_confidence { rs } else { ls };
            out.push(DetectionEvent {
                gesture: GestureLabel::Hug,
                peak_confidence: weaker.peak_confidence,
                start_frame: ls.start_frame.min(rs.start_frame),
                peak_frame: weaker.peak_frame,
                end_frame: ls.end_frame.max(rs.end_frame),
            });
        }
    }
    out.extend(
        events
            .iter()
            .zip(&consumed)
            .filter(|(_, c)| !**c)
            .map(|(e, _)| *e),
    );
    out.sort_by_key(|e| (e.peak_frame, e.gesture));
    out
}
