//! Software model of a flux-ramp readout chain for multiplexed SQUID
//! detectors.
//!
//! The crate is organised after the data flow of the firmware it models:
//!
//! * [`sigmodel`] synthesises flux-ramp-modulated waveforms with embedded
//!   calorimeter pulses and provides a double-precision reference demodulator.
//! * [`demod`] is the fixed-point, time-division-multiplexed demodulator
//!   (magnitude, NCO, windowed correlation, block scaling, arctangent).
//! * [`trigger`] is the event-detection engine: difference-of-boxcars filter,
//!   3-point peak trigger, pre-trigger history and a descriptor pool with a
//!   separate evacuation domain.
//! * [`queueing`] sizes the descriptor pool with the Erlang-B formula and
//!   validates it by Monte-Carlo.
//! * [`formats`] holds the binary file layouts and CSV export.
//! * [`config`] parses the declarative run configuration and
//!   [`pipeline`] wires the stages together.

pub mod config;
pub mod demod;
pub mod formats;
pub mod pipeline;
pub mod queueing;
pub mod sigmodel;
pub mod stream;
pub mod trigger;

pub use stream::{SampleStream, Samples, StreamKind};

/// Signal value that maps to the largest positive 16-bit code.
pub const FULL_SCALE: f64 = 32767.0;

/// Quantises a signal value in full-scale units to a 16-bit code, saturating.
pub fn quantize(x: f64) -> i16 {
    let v = (x * FULL_SCALE).round();
    v.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}
