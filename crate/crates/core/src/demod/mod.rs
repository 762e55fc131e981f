//! Fixed-point, time-division-multiplexed flux-ramp demodulator.
//!
//! Per frame and channel the datapath is: optional magnitude (complex
//! envelope input), NCO step, trim/window gating, DC-removing correlation,
//! and at the end of the correlated span block scaling plus arctangent. All
//! channels share one sine table and one ramp counter; a sync marker resets
//! the counter and every channel's NCO.

mod accumulator;
pub mod cordic;
pub mod nco;
mod stream;
mod window;

use thiserror::Error;

pub use accumulator::{block_scaled_phase, RampAccumulator, RampPhase};
pub use cordic::{angle_to_rad, magnitude, MagnitudeCordic};
pub use nco::{NcoState, SineTable};
pub use stream::{demodulate_stream, DemodOutput, DemodStats, Demodulator, SyncMarkers};
pub use window::{window_table, window_weight, WindowKind};

use crate::stream::StreamKind;

#[derive(Debug, Error, PartialEq)]
pub enum DemodError {
    #[error("demodulator configuration: {0}")]
    Config(String),
    #[error("stream format: {0}")]
    Format(String),
}

fn config_err(msg: impl Into<String>) -> DemodError {
    DemodError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    ComplexEnvelope,
    Real,
}

impl InputKind {
    pub fn from_stream(kind: StreamKind) -> Result<Self, DemodError> {
        match kind {
            StreamKind::Real => Ok(Self::Real),
            StreamKind::Complex => Ok(Self::ComplexEnvelope),
            StreamKind::Phase => Err(DemodError::Format(
                "phase streams cannot be demodulated".into(),
            )),
        }
    }

    pub fn stream_kind(self) -> StreamKind {
        match self {
            Self::Real => StreamKind::Real,
            Self::ComplexEnvelope => StreamKind::Complex,
        }
    }
}

/// Per-channel demodulation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDemod {
    pub modulation_freq_hz: f64,
    pub trim_begin: usize,
    pub trim_end: usize,
    pub window: WindowKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemodConfig {
    pub sample_rate_hz: f64,
    /// Samples per flux ramp; shared by all channels since one ramp
    /// generator drives the sync.
    pub ramp_length: usize,
    pub channels: Vec<ChannelDemod>,
    pub input_kind: InputKind,
    /// Sine table address and amplitude width.
    pub nco_width_bits: u32,
    /// Phase accumulator width; the table is addressed by its top bits.
    pub nco_phase_bits: u32,
    pub accumulator_width_bits: u32,
}

/// Input samples are 16-bit codes; after DC removal a difference spans 17 bits.
const MAX_SAMPLE_DIFF: i64 = 65535;

impl DemodConfig {
    /// Configuration with the same parameters on every channel and default widths.
    pub fn uniform(
        channel_count: usize,
        sample_rate_hz: f64,
        ramp_length: usize,
        channel: ChannelDemod,
        input_kind: InputKind,
    ) -> Self {
        Self {
            sample_rate_hz,
            ramp_length,
            channels: vec![channel; channel_count],
            input_kind,
            nco_width_bits: 16,
            nco_phase_bits: 32,
            accumulator_width_bits: 48,
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Decimation factor from input frames to phase points.
    pub fn decimation(&self) -> usize {
        self.ramp_length
    }

    pub fn validate(&self) -> Result<(), DemodError> {
        if self.channels.is_empty() || self.channels.len() > u16::MAX as usize {
            return Err(config_err("channel count must be in 1..=65535"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(config_err("sample rate must be positive"));
        }
        if self.ramp_length < 2 {
            return Err(config_err("ramp length must be at least 2"));
        }
        if !(4..=20).contains(&self.nco_width_bits) {
            return Err(config_err("nco_width_bits must be in 4..=20"));
        }
        if !(self.nco_width_bits..=48).contains(&self.nco_phase_bits) {
            return Err(config_err("nco_phase_bits must be in nco_width_bits..=48"));
        }
        if !(16..=63).contains(&self.accumulator_width_bits) {
            return Err(config_err("accumulator_width_bits must be in 16..=63"));
        }
        let n = self.ramp_length;
        let max_ref = (1i64 << (self.nco_width_bits - 1)) - 1;
        for (c, ch) in self.channels.iter().enumerate() {
            if !(ch.modulation_freq_hz > 0.0 && ch.modulation_freq_hz < self.sample_rate_hz / 2.0) {
                return Err(config_err(format!(
                    "channel {c}: modulation frequency outside (0, fs/2)"
                )));
            }
            if ch.trim_begin + ch.trim_end >= n - 1 {
                return Err(config_err(format!(
                    "channel {c}: trims leave fewer than two samples"
                )));
            }
            let span = n - ch.trim_begin - ch.trim_end;
            if span as f64 * ch.modulation_freq_hz / self.sample_rate_hz < 1.0 {
                return Err(config_err(format!(
                    "channel {c}: correlated span holds less than one modulation period"
                )));
            }
            // Worst case: every product at full scale with the same sign.
            let worst = (span as i128) * (MAX_SAMPLE_DIFF as i128) * (max_ref as i128);
            if worst >= 1i128 << (self.accumulator_width_bits - 1) {
                return Err(config_err(format!(
                    "channel {c}: {}-bit accumulator can overflow over a {span}-sample span",
                    self.accumulator_width_bits
                )));
            }
        }
        Ok(())
    }

    /// Inclusive correlated span `[begin, end]` of a channel.
    pub fn span(&self, channel: usize) -> (usize, usize) {
        let ch = &self.channels[channel];
        (ch.trim_begin, self.ramp_length - 1 - ch.trim_end)
    }
}

/// One demodulated sample: the phase of channel `channel` over ramp `ramp_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub channel: usize,
    pub ramp_index: u64,
    pub phase_rad: f64,
    /// Binary angle as produced by the arctangent stage (`2^31` = π).
    pub phase_raw: i32,
    /// MSB position found by the scaling unit; −1 for an all-zero ramp.
    pub magnitude_class: i32,
}
