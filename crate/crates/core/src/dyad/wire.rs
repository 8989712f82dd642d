//! `dyad v1` line protocol.
//!
//! ```text
//! {"v":1,"type":"hello","peer":"A"}
//! {"v":1,"type":"conf","peer":"A","t":1.033333,"c":{"R5":0.01,...,"LM":0.0}}
//! {"v":1,"type":"trigger","g":"RH","t":1.033333,"fused":0.519615}
//! {"v":1,"type":"bye","peer":"A"}
//! ```
//!
//! Decoding is total: any byte sequence yields one message or one
//! classified error. Unknown top-level fields are ignored.

use std::fmt::Write as _;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::label::GestureLabel;
use crate::num::fmt6;

pub const PROTOCOL_VERSION: u32 = 1;

/// Confidence of each atomic detector, in gesture code order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSet(pub [f64; 8]);

impl ConfidenceSet {
    pub fn get(&self, g: GestureLabel) -> f64 {
        g.atomic_index().map_or(0.0, |i| self.0[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    Hello { peer: String, version: u32 },
    Conf { peer: String, t: f64, conf: ConfidenceSet },
    Trigger { gesture: GestureLabel, t: f64, fused: f64 },
    Bye { peer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("truncated message")]
    Truncated,
    #[error("not valid UTF-8")]
    Utf8,
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unsupported protocol version {0}")]
    Version(u64),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
    #[error("missing field {0:?}")]
    MissingField(&'static str),
    #[error("value out of range for {0:?}")]
    OutOfRange(String),
    #[error("unknown gesture {0:?}")]
    UnknownGesture(String),
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// One newline-terminated line.
pub fn encode_message(m: &WireMessage) -> Vec<u8> {
    let mut out = String::new();
    match m {
        WireMessage::Hello { peer, version } => {
            let _ = write!(out, "{{\"v\":{version},\"type\":\"hello\",\"peer\":{}}}", json_string(peer));
        }
        WireMessage::Conf { peer, t, conf } => {
            let _ = write!(
                out,
                "{{\"v\":{PROTOCOL_VERSION},\"type\":\"conf\",\"peer\":{},\"t\":{},\"c\":{{",
                json_string(peer),
                fmt6(*t)
            );
            for (i, g) in GestureLabel::ATOMIC.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "\"{g}\":{}", fmt6(conf.0[i]));
            }
            out.push_str("}}");
        }
        WireMessage::Trigger { gesture, t, fused } => {
            let _ = write!(
                out,
                "{{\"v\":{PROTOCOL_VERSION},\"type\":\"trigger\",\"g\":\"{gesture}\",\"t\":{},\"fused\":{}}}",
                fmt6(*t),
                fmt6(*fused)
            );
        }
        WireMessage::Bye { peer } => {
            let _ = write!(out, "{{\"v\":{PROTOCOL_VERSION},\"type\":\"bye\",\"peer\":{}}}", json_string(peer));
        }
    }
    out.push('\n');
    out.into_bytes()
}

fn field<'a>(obj: &'a Map<String, Value>, name: &'static str) -> Result<&'a Value, WireError> {
    obj.get(name).ok_or(WireError::MissingField(name))
}

fn peer(obj: &Map<String, Value>) -> Result<String, WireError> {
    match field(obj, "peer")? {
        Value::String(s) if !s.is_empty() => Ok(s.clone()),
        Value::String(_) => Err(WireError::Malformed("empty peer id".into())),
        _ => Err(WireError::Malformed("peer must be a string".into())),
    }
}

fn number(v: &Value, name: &str) -> Result<f64, WireError> {
    v.as_f64()
        .ok_or_else(|| WireError::Malformed(format!("{name} must be a number")))
}

fn unit_interval(v: &Value, name: &str) -> Result<f64, WireError> {
    let x = number(v, name)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(WireError::OutOfRange(name.to_string()))
    }
}

fn timestamp(obj: &Map<String, Value>) -> Result<f64, WireError> {
    let t = number(field(obj, "t")?, "t")?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(WireError::OutOfRange("t".into()))
    }
}

pub fn decode_message(bytes: &[u8]) -> Result<WireMessage, WireError> {
    let line = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    if line.contains(&b'\n') {
        return Err(WireError::Malformed("more than one line".into()));
    }
    let text = std::str::from_utf8(line).map_err(|_| WireError::Utf8)?;
    if text.trim().is_empty() {
        return Err(WireError::Truncated);
    }
    let value: Value = serde_json::from_str(text).map_err(|e| {
        if e.is_eof() {
            WireError::Truncated
        } else {
            WireError::Malformed(e.to_string())
        }
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| WireError::Malformed("message must be an object".into()))?;
    let version = field(obj, "v")?
        .as_u64()
        .ok_or_else(|| WireError::Malformed("v must be an unsigned integer".into()))?;
    if version != u64::from(PROTOCOL_VERSION) {
        return Err(WireError::Version(version));
    }
    let kind = field(obj, "type")?
        .as_str()
        .ok_or_else(|| WireError::Malformed("type must be a string".into()))?;
    match kind {
        "hello" => Ok(WireMessage::Hello {
            peer: peer(obj)?,
            version: PROTOCOL_VERSION,
        }),
        "bye" => Ok(WireMessage::Bye { peer: peer(obj)? }),
        "conf" => {
            let peer = peer(obj)?;
            let t = timestamp(obj)?;
            let c = field(obj, "c")?
                .as_object()
                .ok_or_else(|| WireError::Malformed("c must be an object".into()))?;
            let mut conf = [0.0; 8];
            let mut seen = [false; 8];
            for (k, v) in c {
                let g: GestureLabel = k
                    .parse()
                    .ok()
                    .filter(|g: &GestureLabel| g.is_atomic() && g.as_str() == k)
                    .ok_or_else(|| WireError::UnknownGesture(k.clone()))?;
                conf[g.code()] = unit_interval(v, k)?;
                seen[g.code()] = true;
            }
            if let Some(i) = seen.iter().position(|s| !s) {
                return Err(WireError::MissingField(GestureLabel::ATOMIC[i].as_str()));
            }
            Ok(WireMessage::Conf {
                peer,
                t,
                conf: ConfidenceSet(conf),
            })
        }
        "trigger" => {
            let g = field(obj, "g")?
                .as_str()
                .ok_or_else(|| WireError::Malformed("g must be a string".into()))?;
            let gesture: GestureLabel = g
                .parse()
                .ok()
                .filter(|x: &GestureLabel| *x != GestureLabel::None && x.as_str() == g)
                .ok_or_else(|| WireError::UnknownGesture(g.to_string()))?;
            Ok(WireMessage::Trigger {
                gesture,
                t: timestamp(obj)?,
                fused: unit_interval(field(obj, "fused")?, "fused")?,
            })
        }
        other => Err(WireError::UnknownType(other.to_string())),
    }
}
