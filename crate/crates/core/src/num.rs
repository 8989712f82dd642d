//! Fixed-precision helpers shared by every text format in the crate.
//!
//! All persisted reals live on a 1e-6 grid. A value produced by [`round6`]
//! survives a [`fmt6`] / `str::parse` round trip bit-exactly.

const SCALE: f64 = 1e6;

/// Snap a value onto the 1e-6 grid. Halves round away from zero, so
/// `round6(-x) == -round6(x)`.
pub fn round6(x: f64) -> f64 {
    let r = (x * SCALE).round() / SCALE;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest decimal form with at most six fractional digits; always keeps
/// one fractional digit (`30.0`, `0.0`, `-0.05`).
pub fn fmt6(x: f64) -> String {
    let mut s = format!("{:.6}", x);
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    if s == "-0.0" {
        s = "0.0".to_string();
    }
    s
}

/// Six-decimal fixed point (`0.500000`), used by the tabular outputs.
pub fn fixed6(x: f64) -> String {
    let s = format!("{:.6}", x);
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}
