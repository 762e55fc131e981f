use super::accumulator::RampAccumulator;
use super::cordic::MagnitudeCordic;
use super::nco::{NcoState, SineTable};
use super::window::window_table;
use super::{DemodConfig, DemodError, InputKind, PhasePoint};
use crate::stream::{Frame, SampleStream};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DemodStats {
    pub frames: u64,
    pub ramps_started: u64,
    pub points: u64,
    /// Sync markers that arrived away from a ramp boundary.
    pub resyncs: u64,
    /// Channel ramps dropped because a sync cut them short.
    pub discarded: u64,
}

#[derive(Debug)]
struct ChannelState {
    nco: NcoState,
    acc: RampAccumulator,
    weights: Vec<i64>,
    begin: usize,
    end: usize,
    /// The current ramp has produced its point.
    done: bool,
}

/// Streaming demodulator over TDM frames.
///
/// The ramp counter free-runs with period `ramp_length`; a sync marker
/// restarts it. A marker arriving mid-ramp discards every channel's partial
/// correlation and counts one resync.
#[derive(Debug)]
pub struct Demodulator {
    config: DemodConfig,
    table: SineTable,
    magnitude: MagnitudeCordic,
    channels: Vec<ChannelState>,
    position: usize,
    ramp_index: u64,
    next_ramp: u64,
    stats: DemodStats,
}

impl Demodulator {
    pub fn new(config: DemodConfig) -> Result<Self, DemodError> {
        config.validate()?;
        let channels = (0..config.channel_count())
            .map(|c| {
                let ch = config.channels[c];
                let (begin, end) = config.span(c);
                ChannelState {
                    nco: NcoState::for_frequency(
                        ch.modulation_freq_hz,
                        config.sample_rate_hz,
                        config.nco_phase_bits,
                    ),
                    acc: RampAccumulator::new(config.accumulator_width_bits),
                    weights: window_table(end - begin + 1, ch.window, config.nco_width_bits),
                    begin,
                    end,
                    done: false,
                }
            })
            .collect();
        Ok(Self {
            table: SineTable::new(config.nco_width_bits),
            magnitude: MagnitudeCordic::new(config.nco_width_bits),
            channels,
            position: 0,
            ramp_index: 0,
            next_ramp: 0,
            stats: DemodStats::default(),
            config,
        })
    }

    pub fn config(&self) -> &DemodConfig {
        &self.config
    }

    pub fn stats(&self) -> DemodStats {
        self.stats
    }

    /// Current DC estimates, one per channel.
    pub fn dc_estimates(&self) -> Vec<i32> {
        self.channels.iter().map(|c| c.acc.dc_estimate).collect()
    }

    fn frame_width(&self) -> usize {
        self.config.channel_count() * self.config.input_kind.stream_kind().values_per_channel()
    }

    /// Processes one frame. `sync` marks a ramp start from the ramp generator.
    pub fn push_frame<F>(
        &mut self,
        frame: Frame<'_>,
        sync: bool,
        mut emit: F,
    ) -> Result<(), DemodError>
    where
        F: FnMut(PhasePoint),
    {
        if frame.len() != self.frame_width() {
            return Err(DemodError::Format(format!(
                "frame holds {} values, expected {}",
                frame.len(),
                self.frame_width()
            )));
        }
        if sync && self.position != 0 {
            self.stats.resyncs += 1;
            for ch in &mut self.channels {
                if !ch.done && ch.acc.sample_count > 0 {
                    ch.acc.discard_partial();
                    self.stats.discarded += 1;
                }
            }
            self.position = 0;
        }
        if self.position == 0 {
            self.ramp_index = self.next_ramp;
            self.next_ramp += 1;
            self.stats.ramps_started += 1;
            for ch in &mut self.channels {
                ch.nco.reset();
                ch.done = false;
            }
        }

        let n = self.position;
        let frac = self.config.nco_width_bits;
        let complex = self.config.input_kind == InputKind::ComplexEnvelope;
        for (c, ch) in self.channels.iter_mut().enumerate() {
            let (sine, cosine) = ch.nco.step(&self.table);
            if n < ch.begin || n > ch.end {
                continue;
            }
            let sample = if complex {
                let i = frame.code(2 * c).clamp(i16::MIN as i32, i16::MAX as i32) as i16;
                let q = frame
                    .code(2 * c + 1)
                    .clamp(i16::MIN as i32, i16::MAX as i32) as i16;
                self.magnitude.eval(i, q) as i32
            } else {
                frame.code(c)
            };
            ch.acc
                .accumulate_sample(sample, sine, cosine, ch.weights[n - ch.begin], frac);
            if n == ch.end {
                let phase = ch.acc.finalize_ramp();
                ch.done = true;
                self.stats.points += 1;
                emit(PhasePoint {
                    channel: c,
                    ramp_index: self.ramp_index,
                    phase_rad: phase.radians(),
                    phase_raw: phase.angle,
                    magnitude_class: phase.magnitude_class,
                });
            }
        }

        self.stats.frames += 1;
        self.position += 1;
        if self.position == self.config.ramp_length {
            self.position = 0;
        }
        Ok(())
    }
}

/// Where ramp starts occur in a stream.
#[derive(Debug, Clone, Copy)]
pub enum SyncMarkers<'a> {
    /// Every `ramp_length` frames, starting at frame 0.
    Periodic,
    /// Explicit ascending frame indices.
    At(&'a [u64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemodOutput {
    pub points: Vec<PhasePoint>,
    pub stats: DemodStats,
}

/// Demodulates a whole in-memory stream.
pub fn demodulate_stream(
    input: &SampleStream,
    config: &DemodConfig,
    sync: SyncMarkers<'_>,
) -> Result<DemodOutput, DemodError> {
    if input.channel_count != config.channel_count() {
        return Err(DemodError::Format(format!(
            "stream has {} channels, configuration expects {}",
            input.channel_count,
            config.channel_count()
        )));
    }
    if InputKind::from_stream(input.kind)? != config.input_kind {
        return Err(DemodError::Format(format!(
            "stream kind {:?} does not match configured input {:?}",
            input.kind, config.input_kind
        )));
    }
    let mut demod = Demodulator::new(config.clone())?;
    let mut points =
        Vec::with_capacity(input.frame_count() / config.ramp_length * config.channel_count());
    let mut markers = match sync {
        SyncMarkers::At(m) => m,
        SyncMarkers::Periodic => &[][..],
    }
    .iter()
    .peekable();
    for (i, frame) in input.frames().enumerate() {
        let i = i as u64;
        let is_sync = match sync {
            SyncMarkers::Periodic => i % config.ramp_length as u64 == 0,
            SyncMarkers::At(_) => {
                let mut hit = false;
                while let Some(&&m) = markers.peek() {
                    if m > i {
                        break;
                    }
                    hit |= m == i;
                    markers.next();
                }
                hit
            }
        };
        demod.push_frame(frame, is_sync, |p| points.push(p))?;
    }
    Ok(DemodOutput {
        points,
        stats: demod.stats(),
    })
}
