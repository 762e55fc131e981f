//! In-memory TDM sample streams.
//!
//! A stream is a sequence of frames; each frame carries one value (or one
//! I/Q pair) per channel, channel-major. This is the transport unit between
//! the signal model, the demodulator and the file formats.

use crate::{quantize, FULL_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamKind {
    /// Real-valued amplitude samples (dc-SQUID path).
    Real = 0,
    /// Complex envelope, interleaved I/Q per channel (microwave multiplexer path).
    Complex = 1,
    /// Demodulated phase, one value per channel per ramp.
    Phase = 2,
}

impl StreamKind {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Real),
            1 => Some(Self::Complex),
            2 => Some(Self::Phase),
            _ => None,
        }
    }

    /// Number of stored values per channel in one frame.
    pub fn values_per_channel(self) -> usize {
        match self {
            Self::Complex => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    I16(Vec<i16>),
    F64(Vec<f64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Self::I16(v) => v.len(),
            Self::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Borrowed view of one frame.
#[derive(Debug, Clone, Copy)]
pub enum Frame<'a> {
    I16(&'a [i16]),
    F64(&'a [f64]),
}

impl Frame<'_> {
    pub fn len(&self) -> usize {
        match self {
            Self::I16(v) => v.len(),
            Self::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at `idx` as a 16-bit code (float values are quantised).
    pub fn code(&self, idx: usize) -> i32 {
        match self {
            Self::I16(v) => v[idx] as i32,
            Self::F64(v) => quantize(v[idx]) as i32,
        }
    }

    /// Value at `idx` in signal units (codes are scaled by full scale).
    pub fn value(&self, idx: usize) -> f64 {
        match self {
            Self::I16(v) => v[idx] as f64 / FULL_SCALE,
            Self::F64(v) => v[idx],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub kind: StreamKind,
    pub channel_count: usize,
    /// Frame rate in Hz.
    pub sample_rate_hz: f64,
    /// Samples per flux-ramp period; 0 when unknown.
    pub ramp_length: u32,
    pub samples: Samples,
}

impl SampleStream {
    pub fn new(
        kind: StreamKind,
        channel_count: usize,
        sample_rate_hz: f64,
        ramp_length: u32,
        samples: Samples,
    ) -> Self {
        Self {
            kind,
            channel_count,
            sample_rate_hz,
            ramp_length,
            samples,
        }
    }

    pub fn frame_width(&self) -> usize {
        self.channel_count * self.kind.values_per_channel()
    }

    pub fn frame_count(&self) -> usize {
        match self.frame_width() {
            0 => 0,
            w => self.samples.len() / w,
        }
    }

    pub fn frame(&self, index: usize) -> Frame<'_> {
        let w = self.frame_width();
        let range = index * w..(index + 1) * w;
        match &self.samples {
            Samples::I16(v) => Frame::I16(&v[range]),
            Samples::F64(v) => Frame::F64(&v[range]),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = Frame<'_>> {
        (0..self.frame_count()).map(move |i| self.frame(i))
    }

    /// Converts float samples to 16-bit codes; no-op for integer streams.
    pub fn quantized(&self) -> SampleStream {
        let samples = match &self.samples {
            Samples::I16(v) => Samples::I16(v.clone()),
            Samples::F64(v) => Samples::I16(v.iter().map(|&x| quantize(x)).collect()),
        };
        SampleStream {
            samples,
            ..self.clone()
        }
    }

    /// Values of one channel across all frames (real part for complex streams).
    pub fn channel_values(&self, channel: usize) -> Vec<f64> {
        let stride = self.kind.values_per_channel();
        self.frames().map(|f| f.value(channel * stride)).collect()
    }
}
