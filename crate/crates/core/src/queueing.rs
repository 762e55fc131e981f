//! Descriptor-pool sizing.
//!
//! Events arrive as a Poisson stream and each holds one buffer slot for the
//! event duration; an arrival that finds every slot taken is dropped. The
//! blocking probability of such a loss system is the Erlang-B formula
//! `B(E, N) = (E^N / N!) / Σ_{i=0..N} E^i / i!` with offered load `E = λ·τ_c`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QueueError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

fn param(msg: impl Into<String>) -> QueueError {
    QueueError::Parameter(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    /// Total arrival rate over all active channels (events/s).
    pub event_rate_hz: f64,
    /// Slot holding time per event, τ_c (s).
    pub event_duration_s: f64,
    pub slot_count: usize,
    /// Time to drain one event to the back end (s); 0 for the ideal model.
    pub evacuation_time_s: f64,
    pub active_channels: usize,
}

impl TrafficModel {
    /// Model built from a per-channel rate.
    pub fn per_channel(
        rate_per_channel_hz: f64,
        active_channels: usize,
        event_duration_s: f64,
        slot_count: usize,
    ) -> Self {
        Self {
            event_rate_hz: rate_per_channel_hz * active_channels as f64,
            event_duration_s,
            slot_count,
            evacuation_time_s: 0.0,
            active_channels,
        }
    }

    /// Offered load `E = λ·τ_c` in Erlang.
    pub fn offered_load(&self) -> f64 {
        self.event_rate_hz * self.event_duration_s
    }

    pub fn validate(&self) -> Result<(), QueueError> {
        if !(self.event_rate_hz > 0.0 && self.event_rate_hz.is_finite()) {
            return Err(param("event_rate_hz must be positive"));
        }
        if !(self.event_duration_s > 0.0 && self.event_duration_s.is_finite()) {
            return Err(param("event_duration_s must be positive"));
        }
        if !(self.evacuation_time_s >= 0.0 && self.evacuation_time_s.is_finite()) {
            return Err(param("evacuation_time_s must be non-negative"));
        }
        if self.active_channels == 0 {
            return Err(param("active_channels must be at least 1"));
        }
        Ok(())
    }
}

fn check_load(offered_load: f64) -> Result<(), QueueError> {
    if offered_load > 0.0 && offered_load.is_finite() {
        Ok(())
    } else {
        Err(param(format!(
            "offered load must be positive, got {offered_load}"
        )))
    }
}

/// Erlang-B blocking probability via `B(E,k) = E·B(E,k−1) / (k + E·B(E,k−1))`.
pub fn erlang_b(offered_load: f64, slots: usize) -> Result<f64, QueueError> {
    check_load(offered_load)?;
    Ok(erlang_b_unchecked(offered_load, slots))
}

fn erlang_b_unchecked(e: f64, slots: usize) -> f64 {
    let mut b = 1.0;
    for k in 1..=slots {
        b = e * b / (k as f64 + e * b);
    }
    b
}

/// Smallest slot count whose blocking probability does not exceed `max_blocking`.
pub fn min_slots(offered_load: f64, max_blocking: f64) -> Result<usize, QueueError> {
    check_load(offered_load)?;
    if !(max_blocking > 0.0 && max_blocking < 1.0) {
        return Err(param("max_blocking must lie in (0, 1)"));
    }
    let mut b = 1.0;
    let mut n = 0usize;
    while b > max_blocking {
        n += 1;
        b = offered_load * b / (n as f64 + offered_load * b);
    }
    Ok(n)
}

/// How arrivals compete for slots in [`simulate_blocking`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrivalModel {
    /// Every arrival requests a slot regardless of channel (the Erlang-B
    /// assumption).
    Pooled,
    /// Trigger-engine semantics: an arrival on a channel that is still
    /// capturing is a pile-up and requests no slot.
    #[default]
    PerChannel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingEstimate {
    pub arrivals: u64,
    /// Arrivals that requested a slot (arrivals minus pile-ups).
    pub requests: u64,
    pub losses: u64,
    pub pileups: u64,
    pub loss_fraction: f64,
    /// Binomial standard error of `loss_fraction`.
    pub std_error: f64,
}

/// Monte-Carlo estimate of the loss fraction.
///
/// Accepted events hold a slot for `event_duration_s`, then queue for a single
/// serialized drain taking `evacuation_time_s` each; the slot frees when its
/// drain completes.
pub fn simulate_blocking(
    model: &TrafficModel,
    n_events: u64,
    seed: u64,
    arrivals: ArrivalModel,
) -> Result<BlockingEstimate, QueueError> {
    model.validate()?;
    if n_events == 0 {
        return Err(param("n_events must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(model.event_rate_hz).map_err(|e| param(e.to_string()))?;
    let tau = model.event_duration_s;
    let evac = model.evacuation_time_s;
    let mut capture_until = vec![f64::NEG_INFINITY; model.active_channels];
    // Release times are non-decreasing: captures end in acceptance order and
    // the drain is FIFO.
    let mut held: VecDeque<f64> = VecDeque::with_capacity(model.slot_count);
    let mut drain_free = f64::NEG_INFINITY;
    let (mut t, mut losses, mut pileups) = (0.0f64, 0u64, 0u64);
    for _ in 0..n_events {
        t += gap.sample(&mut rng);
        let channel = rng.random_range(0..model.active_channels);
        while held.front().is_some_and(|&r| r <= t) {
            held.pop_front();
        }
        if arrivals == ArrivalModel::PerChannel && capture_until[channel] > t {
            pileups += 1;
            continue;
        }
        if held.len() >= model.slot_count {
            losses += 1;
            continue;
        }
        let release = (t + tau).max(drain_free) + evac;
        drain_free = release;
        held.push_back(release);
        capture_until[channel] = t + tau;
    }
    let requests = n_events - pileups;
    let p = if requests > 0 {
        losses as f64 / requests as f64
    } else {
        0.0
    };
    Ok(BlockingEstimate {
        arrivals: n_events,
        requests,
        losses,
        pileups,
        loss_fraction: p,
        std_error: if requests > 0 {
            (p * (1.0 - p) / requests as f64).sqrt()
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavingsReport {
    pub offered_load: f64,
    pub capture_target: f64,
    /// Slots chosen: the Erlang-B minimum, capped at one per channel.
    pub slots_needed: usize,
    /// Unconstrained Erlang-B minimum.
    pub erlang_slots: usize,
    pub full_population: usize,
    pub blocking: f64,
    pub memory_saving: f64,
}

/// Compares the Erlang-B slot count for `capture_target` with one slot per channel.
pub fn savings_report(
    model: &TrafficModel,
    capture_target: f64,
) -> Result<SavingsReport, QueueError> {
    model.validate()?;
    if !(capture_target > 0.0 && capture_target < 1.0) {
        return Err(param("capture_target must lie in (0, 1)"));
    }
    let e = model.offered_load();
    let erlang_slots = min_slots(e, 1.0 - capture_target)?;
    // A slot per channel never loses an event, so it bounds the search.
    let slots_needed = erlang_slots.min(model.active_channels);
    Ok(SavingsReport {
        offered_load: e,
        capture_target,
        slots_needed,
        erlang_slots,
        full_population: model.active_channels,
        blocking: erlang_b_unchecked(e, slots_needed),
        memory_saving: 1.0 - slots_needed as f64 / model.active_channels as f64,
    })
}

/// One row of a blocking table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingRow {
    pub offered_load: f64,
    pub slots: usize,
    pub blocking: f64,
    pub capture: f64,
    pub memory_saving: f64,
}

/// Blocking for `0..=max_slots` slots against a full population of `channels`.
pub fn blocking_table(
    offered_load: f64,
    max_slots: usize,
    channels: usize,
) -> Result<Vec<BlockingRow>, QueueError> {
    check_load(offered_load)?;
    let mut b = 1.0;
    Ok((0..=max_slots)
        .map(|n| {
            if n > 0 {
                b = offered_load * b / (n as f64 + offered_load * b);
            }
            BlockingRow {
                offered_load,
                slots: n,
                blocking: b,
                capture: 1.0 - b,
                memory_saving: if channels > 0 {
                    1.0 - n as f64 / channels as f64
                } else {
                    0.0
                },
            }
        })
        .collect())
}
