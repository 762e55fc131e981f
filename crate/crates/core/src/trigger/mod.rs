//! Event detection over the demodulated phase stream.
//!
//! The signal domain ([`TriggerEngine`]) filters each channel with a
//! difference of two moving-average windows, fires a 3-point peak trigger,
//! and copies pre-trigger history plus the following samples into a
//! descriptor taken from the free queue. Completed descriptors go to the
//! filled queue, where the evacuation domain ([`Evacuator`]) turns them into
//! [`EventPacket`]s and recycles them. Either side may run on its own thread;
//! the two queues are bounded single-producer/single-consumer channels and a
//! descriptor's buffer belongs to whichever side holds it.
//!
//! There is no backpressure: a trigger that finds the free queue empty is
//! counted as lost.

mod descriptor;
mod engine;
mod evacuate;
mod filter;

use std::f64::consts::PI;

use thiserror::Error;

pub use descriptor::{descriptor_pool, EvacuationPort, EventDescriptor, SignalPort, SlotState};
pub use engine::{ChannelStats, TriggerEngine, TriggerStats};
pub use evacuate::{Evacuator, EventPacket};
pub use filter::{three_point_decision, MawFilter};

#[derive(Debug, Error, PartialEq)]
pub enum TriggerError {
    #[error("trigger configuration: {0}")]
    Config(String),
    #[error("stream format: {0}")]
    StreamFormat(String),
    #[error("{0} disconnected")]
    Disconnected(&'static str),
}

/// Radians per phase code. The filter works on integer codes so that the
/// recursive window sums stay exact.
pub const CODE_TO_RAD: f64 = PI / (1u64 << 31) as f64;

pub fn phase_to_code(phase_rad: f64) -> i64 {
    (phase_rad / CODE_TO_RAD).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerConfig {
    pub channel_count: usize,
    pub maw_length: usize,
    /// Samples between the two windows.
    pub maw_gap: usize,
    /// Fire threshold on the filter output, in radians.
    pub threshold: f64,
    pub pre_trigger_length: usize,
    /// Samples per captured event, pre-trigger region included.
    pub event_length: usize,
    pub slot_count: usize,
    pub enabled: Vec<bool>,
}

impl TriggerConfig {
    /// Defaults: 4-sample windows with a 4-sample gap, 256 pre-trigger
    /// samples, 438-sample events (3.5 ms at 125 kHz) and 5 slots.
    pub fn new(channel_count: usize) -> Self {
        Self {
            channel_count,
            maw_length: 4,
            maw_gap: 4,
            threshold: 0.1,
            pre_trigger_length: 256,
            event_length: 438,
            slot_count: 5,
            enabled: vec![true; channel_count],
        }
    }

    pub fn validate(&self) -> Result<(), TriggerError> {
        let err = |m: &str| Err(TriggerError::Config(m.to_string()));
        if self.channel_count == 0 {
            return err("channel_count must be at least 1");
        }
        if self.maw_length == 0 {
            return err("maw_length must be at least 1");
        }
        if self.slot_count == 0 {
            return err("slot_count must be at least 1");
        }
        if self.pre_trigger_length >= self.event_length {
            return err("pre_trigger_length must be shorter than event_length");
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return err("threshold must be positive");
        }
        if self.enabled.len() != self.channel_count {
            return err("enable mask must have one entry per channel");
        }
        Ok(())
    }
}

/// Builds a connected engine/evacuator pair over a fresh descriptor pool.
pub fn trigger_pair(config: TriggerConfig) -> Result<(TriggerEngine, Evacuator), TriggerError> {
    config.validate()?;
    let (signal, evac) = descriptor_pool(config.slot_count, config.event_length);
    Ok((TriggerEngine::new(config, signal)?, Evacuator::new(evac)))
}

/// Descriptor conservation: free + active + filled + evacuating = slot count.
pub fn audit(engine: &TriggerEngine, evacuator: &Evacuator) -> Result<(), String> {
    let (free, active, filled, evac) = (
        engine.free_len(),
        engine.active(),
        engine.filled_len(),
        evacuator.evacuating(),
    );
    let total = free + active + filled + evac;
    if total == engine.config().slot_count {
        Ok(())
    } else {
        Err(format!(
            "descriptor leak: free {free} + active {active} + filled {filled} + evacuating {evac} != {}",
            engine.config().slot_count
        ))
    }
}
