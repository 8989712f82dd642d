//! `skel-jsonl v1`: a header object line followed by one object per frame.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use super::{Clip, ClipError, HandState, LabelSpan, SkeletonFrame, JOINT_COUNT};
use crate::geom::Vec3;
use crate::label::GestureLabel;
use crate::num::fmt6;

pub const CLIP_FORMAT_VERSION: u32 = 1;

/// Stored timestamps are written on a 1e-6 grid, so a parsed `t` may sit up
/// to half a quantum away from `i / fps`.
const PARSED_TIMESTAMP_TOLERANCE: f64 = 5.1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("line {line}: not valid UTF-8")]
    Utf8 { line: usize },
    #[error("line {line}: malformed: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line 1: unsupported clip format version {0}")]
    Version(u32),
    #[error("line {line}: expected 25 joints, found {found}")]
    JointCount { line: usize, found: usize },
    #[error("line {line}: non-finite coordinate in joint {joint}")]
    NonFinite { line: usize, joint: usize },
    #[error("line {line}: unknown hand state code {code}")]
    HandState { line: usize, code: u64 },
    #[error("line {line}: timestamp {t} is not increasing")]
    NonMonotone { line: usize, t: f64 },
    #[error("line {line}: timestamp {t} does not match frame index / fps")]
    OffGrid { line: usize, t: f64 },
    #[error("line 1: unknown gesture label {label:?} in span")]
    UnknownGesture { label: String },
    #[error(transparent)]
    Invalid(#[from] ClipError),
}

#[derive(Deserialize)]
struct HeaderRec {
    v: u32,
    fps: f64,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    #[serde(default)]
    spans: Vec<SpanRec>,
}

#[derive(Deserialize)]
struct SpanRec {
    g: String,
    a: usize,
    b: usize,
}

#[derive(Deserialize)]
struct FrameRec {
    t: f64,
    j: Vec<[f64; 3]>,
    hl: u64,
    hr: u64,
}

fn hand_state(line: usize, code: u64) -> Result<HandState, ParseError> {
    u8::try_from(code)
        .ok()
        .and_then(HandState::from_code)
        .ok_or(ParseError::HandState { line, code })
}

pub fn parse_clip(bytes: &[u8]) -> Result<Clip, ParseError> {
    let mut lines = bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix(b"\r").unwrap_or(l)))
        .filter(|(_, l)| !l.iter().all(u8::is_ascii_whitespace));

    let (_, header) = lines.next().ok_or(ParseError::Empty)?;
    let header = std::str::from_utf8(header).map_err(|_| ParseError::Utf8 { line: 1 })?;
    let header: HeaderRec = serde_json::from_str(header).map_err(|e| ParseError::Malformed {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.v != CLIP_FORMAT_VERSION {
        return Err(ParseError::Version(header.v));
    }
    let fps = header.fps;
    if !(fps.is_finite() && fps > 0.0) {
        return Err(ClipError::BadFps(fps).into());
    }
    let spans = header
        .spans
        .into_iter()
        .map(|s| {
            let gesture: GestureLabel = s
                .g
                .parse()
                .map_err(|_| ParseError::UnknownGesture { label: s.g.clone() })?;
            Ok(LabelSpan {
                gesture,
                start_frame: s.a,
                end_frame: s.b,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;

    let mut frames = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for (line, raw) in lines {
        let text = std::str::from_utf8(raw).map_err(|_| ParseError::Utf8 { line })?;
        let rec: FrameRec = serde_json::from_str(text).map_err(|e| ParseError::Malformed {
            line,
            msg: e.to_string(),
        })?;
        if rec.j.len() != JOINT_COUNT {
            return Err(ParseError::JointCount {
                line,
                found: rec.j.len(),
            });
        }
        let mut joints = [Vec3::ZERO; JOINT_COUNT];
        for (k, p) in rec.j.iter().enumerate() {
            let v = Vec3::from(*p);
            if !v.is_finite() {
                return Err(ParseError::NonFinite { line, joint: k });
            }
            joints[k] = v;
        }
        if !rec.t.is_finite() || rec.t <= prev_t {
            return Err(ParseError::NonMonotone { line, t: rec.t });
        }
        let index = frames.len();
        let nominal = index as f64 / fps;
        if (rec.t - nominal).abs() > PARSED_TIMESTAMP_TOLERANCE {
            return Err(ParseError::OffGrid { line, t: rec.t });
        }
        prev_t = rec.t;
        frames.push(SkeletonFrame {
            t: nominal,
            joints,
            hand_left: hand_state(line, rec.hl)?,
            hand_right: hand_state(line, rec.hr)?,
        });
    }

    let clip = Clip {
        fps,
        frames,
        spans,
        meta: header.meta,
    };
    clip.validate()?;
    Ok(clip)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Canonical encoding. Coordinates off the 1e-6 grid are rounded onto it.
pub fn serialize_clip(clip: &Clip) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("{\"v\":1,\"fps\":");
    out.push_str(&fmt6(clip.fps));
    out.push_str(",\"meta\":{");
    for (i, (k, v)) in clip.meta.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}:{}", json_string(k), json_string(v));
    }
    out.push_str("},\"spans\":[");
    for (i, s) in clip.spans.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"g\":\"{}\",\"a\":{},\"b\":{}}}",
            s.gesture, s.start_frame, s.end_frame
        );
    }
    out.push_str("]}\n");
    for f in &clip.frames {
        out.push_str("{\"t\":");
        out.push_str(&fmt6(f.t));
        out.push_str(",\"j\":[");
        for (k, p) in f.joints.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "[{},{},{}]", fmt6(p.x), fmt6(p.y), fmt6(p.z));
        }
        let _ = writeln!(
            out,
            "],\"hl\":{},\"hr\":{}}}",
            f.hand_left.code(),
            f.hand_right.code()
        );
    }
    out.into_bytes()
}
