use std::collections::VecDeque;

use super::descriptor::{EventDescriptor, SignalPort, SlotState};
use super::filter::{three_point_decision, MawFilter};
use super::{phase_to_code, TriggerConfig, TriggerError, CODE_TO_RAD};

/// Counters for one channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChannelStats {
    /// All trigger fires, pile-ups included.
    pub fires: u64,
    /// Fires that obtained a descriptor.
    pub events_captured: u64,
    pub events_lost_no_slot: u64,
    pub pileups_marked: u64,
    /// Captures that reached the filled queue.
    pub events_completed: u64,
    pub samples_in: u64,
    pub samples_retained: u64,
}

impl ChannelStats {
    fn add(&mut self, o: &ChannelStats) {
        self.fires += o.fires;
        self.events_captured += o.events_captured;
        self.events_lost_no_slot += o.events_lost_no_slot;
        self.pileups_marked += o.pileups_marked;
        self.events_completed += o.events_completed;
        self.samples_in += o.samples_in;
        self.samples_retained += o.samples_retained;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriggerStats {
    pub channels: Vec<ChannelStats>,
    /// Demodulator resyncs seen upstream.
    pub resyncs: u64,
    /// Phase frames dropped because a resync left them incomplete.
    pub frames_dropped: u64,
    /// Captures still open when the stream ended.
    pub truncated: u64,
}

impl TriggerStats {
    pub fn total(&self) -> ChannelStats {
        let mut t = ChannelStats::default();
        for c in &self.channels {
            t.add(c);
        }
        t
    }

    /// Share of input samples kept in event packets.
    pub fn retained_fraction(&self) -> f64 {
        let t = self.total();
        if t.samples_in == 0 {
            0.0
        } else {
            t.samples_retained as f64 / t.samples_in as f64
        }
    }

    /// `1 − retained_fraction`; 1.0 for a stream with no events.
    pub fn reduction(&self) -> f64 {
        1.0 - self.retained_fraction()
    }

    /// Lost events over slot requests (fires that were not pile-ups).
    pub fn loss_fraction(&self) -> f64 {
        let t = self.total();
        let requests = t.events_captured + t.events_lost_no_slot;
        if requests == 0 {
            0.0
        } else {
            t.events_lost_no_slot as f64 / requests as f64
        }
    }
}

#[derive(Debug)]
struct ChannelTrigger {
    filter: MawFilter,
    prev2: f64,
    prev1: f64,
    prev1_ramp: u64,
    armed: bool,
    /// Last `pre_trigger_length + 2` samples.
    history: VecDeque<f64>,
    capture: Option<EventDescriptor>,
    last_timestamp: Option<u64>,
}

/// Signal-domain half of the event detector.
///
/// Samples must arrive in TDM order: channel 0..C for one ramp, then the
/// next ramp. A channel re-arms once its filter magnitude drops below the
/// threshold, so one excursion fires at most once.
#[derive(Debug)]
pub struct TriggerEngine {
    config: TriggerConfig,
    threshold_code: f64,
    channels: Vec<ChannelTrigger>,
    port: SignalPort,
    next_channel: usize,
    frame_ramp: Option<u64>,
    wait_for_evacuation: bool,
    stats: TriggerStats,
}

impl TriggerEngine {
    pub fn new(config: TriggerConfig, port: SignalPort) -> Result<Self, TriggerError> {
        config.validate()?;
        let hist = config.pre_trigger_length + 2;
        let channels = (0..config.channel_count)
            .map(|_| ChannelTrigger {
                filter: MawFilter::new(config.maw_length, config.maw_gap),
                prev2: 0.0,
                prev1: 0.0,
                prev1_ramp: 0,
                armed: true,
                history: std::iter::repeat(0.0).take(hist).collect(),
                capture: None,
                last_timestamp: None,
            })
            .collect();
        Ok(Self {
            threshold_code: config.threshold / CODE_TO_RAD,
            stats: TriggerStats {
                channels: vec![ChannelStats::default(); config.channel_count],
                ..Default::default()
            },
            config,
            channels,
            port,
            next_channel: 0,
            frame_ramp: None,
            wait_for_evacuation: false,
        })
    }

    /// With a concurrent evacuator, treat evacuation as instantaneous: a fire
    /// that finds the free queue empty waits for descriptors already filled
    /// or being drained instead of counting a loss. Losses then depend only
    /// on the input, not on thread timing. Only slots held by active
    /// captures can cause a loss.
    ///
    /// Single-threaded callers must leave this off, since nothing would
    /// return the descriptor they wait for.
    pub fn set_wait_for_evacuation(&mut self, on: bool) {
        self.wait_for_evacuation = on;
    }

    pub fn config(&self) -> &TriggerConfig {
        &self.config
    }

    pub fn stats(&self) -> &TriggerStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut TriggerStats {
        &mut self.stats
    }

    /// Descriptors held by channels that are mid-capture.
    pub fn active(&self) -> usize {
        self.channels.iter().filter(|c| c.capture.is_some()).count()
    }

    pub fn free_len(&self) -> usize {
        self.port.free_len()
    }

    pub fn filled_len(&self) -> usize {
        self.port.filled_len()
    }

    /// Feeds one sample of `channel` belonging to ramp `ramp_index`.
    pub fn process_frame(
        &mut self,
        channel: usize,
        phase: f64,
        ramp_index: u64,
    ) -> Result<(), TriggerError> {
        if channel != self.next_channel {
            return Err(TriggerError::StreamFormat(format!(
                "expected channel {}, got {channel}",
                self.next_channel
            )));
        }
        match self.frame_ramp {
            Some(r) if channel > 0 && r != ramp_index => {
                return Err(TriggerError::StreamFormat(format!(
                    "channel {channel} carries ramp {ramp_index} inside frame of ramp {r}"
                )));
            }
            Some(r) if channel == 0 && ramp_index <= r => {
                return Err(TriggerError::StreamFormat(format!(
                    "ramp index {ramp_index} does not advance past {r}"
                )));
            }
            _ => {}
        }
        if channel == 0 {
            self.frame_ramp = Some(ramp_index);
        }
        self.next_channel = (channel + 1) % self.config.channel_count;
        if !self.config.enabled[channel] {
            return Ok(());
        }

        let cfg = &self.config;
        let ch = &mut self.channels[channel];
        let st = &mut self.stats.channels[channel];
        st.samples_in += 1;
        ch.history.pop_front();
        ch.history.push_back(phase);

        if let Some(d) = ch.capture.as_mut() {
            d.push(phase);
        }

        let diff = ch.filter.update(phase_to_code(phase));
        let out = ch.filter.output(diff);
        let fire = ch.armed && three_point_decision(ch.prev2, ch.prev1, out, self.threshold_code);
        let (fire_value, fire_ramp) = (ch.prev1, ch.prev1_ramp);
        ch.prev2 = ch.prev1;
        ch.prev1 = out;
        ch.prev1_ramp = ramp_index;
        if fire {
            ch.armed = false;
            st.fires += 1;
        } else if out.abs() < self.threshold_code {
            ch.armed = true;
        }

        // A fire refers to the previous sample, which lies inside any capture
        // still open here, including one that completes with this sample.
        let pileup = fire && ch.capture.is_some();
        if let Some(d) = ch.capture.as_mut() {
            if pileup {
                d.pileup = true;
                st.pileups_marked += 1;
            }
            if d.is_complete() {
                let d = ch.capture.take().expect("capture present");
                Self::complete(&self.port, d, st)?;
            }
        }
        if !fire || pileup {
            return Ok(());
        }

        let held_active = self.channels.iter().filter(|c| c.capture.is_some()).count();
        let ch = &mut self.channels[channel];
        let acquired = match self.port.free.try_recv() {
            Ok(d) => Some(d),
            Err(_) if self.wait_for_evacuation && held_active < cfg.slot_count => Some(
                self.port
                    .free
                    .recv()
                    .map_err(|_| TriggerError::Disconnected("free queue"))?,
            ),
            Err(_) => None,
        };
        let Some(mut d) = acquired else {
            st.events_lost_no_slot += 1;
            return Ok(());
        };
        d.transition(SlotState::Free, SlotState::Active);
        if let Some(last) = ch.last_timestamp {
            debug_assert!(fire_ramp > last, "timestamps must increase per channel");
        }
        ch.last_timestamp = Some(fire_ramp);
        st.events_captured += 1;
        d.channel = channel;
        d.timestamp = fire_ramp;
        d.trigger_value = fire_value * CODE_TO_RAD;
        // History ends with the sample after the trigger; the event starts
        // `pre_trigger_length` samples before the trigger.
        let take = (cfg.pre_trigger_length + 2).min(d.length());
        for &x in ch.history.iter().take(take) {
            d.push(x);
        }
        if d.is_complete() {
            Self::complete(&self.port, d, st)?;
        } else {
            ch.capture = Some(d);
        }
        Ok(())
    }

    fn complete(
        port: &SignalPort,
        mut d: EventDescriptor,
        st: &mut ChannelStats,
    ) -> Result<(), TriggerError> {
        d.transition(SlotState::Active, SlotState::Filled);
        st.events_completed += 1;
        st.samples_retained += d.length() as u64;
        port.filled
            .send(d)
            .map_err(|_| TriggerError::Disconnected("filled queue"))
    }

    /// Feeds a whole TDM frame of phases for one ramp.
    pub fn process_phases(&mut self, phases: &[f64], ramp_index: u64) -> Result<(), TriggerError> {
        if phases.len() != self.config.channel_count {
            return Err(TriggerError::StreamFormat(format!(
                "frame holds {} phases, expected {}",
                phases.len(),
                self.config.channel_count
            )));
        }
        for (c, &p) in phases.iter().enumerate() {
            self.process_frame(c, p, ramp_index)?;
        }
        Ok(())
    }

    /// Ends the stream. Open captures are counted as truncated and their
    /// descriptors dropped along with the pool.
    pub fn finish(mut self) -> TriggerStats {
        self.stats.truncated += self.channels.iter().filter(|c| c.capture.is_some()).count() as u64;
        self.stats
    }
}
