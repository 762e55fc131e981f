use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DemodError;

/// Weighting applied across the correlation span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Rectangular,
    Bartlett,
    Hann,
}

impl FromStr for WindowKind {
    type Err = DemodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rectangular" | "rect" => Ok(Self::Rectangular),
            "bartlett" | "triangular" => Ok(Self::Bartlett),
            "hann" | "hanning" => Ok(Self::Hann),
            other => Err(DemodError::Config(format!("unknown window kind '{other}'"))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rectangular => "rectangular",
            Self::Bartlett => "bartlett",
            Self::Hann => "hann",
        })
    }
}

/// Window weight at `n` of a span of `span_length` samples, as a fixed-point
/// fraction with `frac_bits` fractional bits (`1 << frac_bits` is 1.0).
///
/// Weights are computed from the distance to the nearer edge, so
/// `weight(n) == weight(L-1-n)` holds exactly.
pub fn window_weight(n: usize, span_length: usize, kind: WindowKind, frac_bits: u32) -> i64 {
    assert!(
        n < span_length,
        "window index {n} outside span of {span_length}"
    );
    let one = (1i64 << frac_bits) as f64;
    if span_length < 2 {
        return one as i64;
    }
    let m = n.min(span_length - 1 - n) as f64;
    let x = m / (span_length - 1) as f64;
    let w = match kind {
        WindowKind::Rectangular => 1.0,
        WindowKind::Bartlett => 2.0 * x,
        WindowKind::Hann => 0.5 * (1.0 - (TAU * x).cos()),
    };
    (w * one).round() as i64
}

/// All weights of a span.
pub fn window_table(span_length: usize, kind: WindowKind, frac_bits: u32) -> Vec<i64> {
    (0..span_length)
        .map(|n| window_weight(n, span_length, kind, frac_bits))
        .collect()
}
