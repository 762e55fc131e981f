//! Scene builders and independent reference computations shared by the
//! integration suites.
#![allow(dead_code)]

use fluxramp::demod::{
    demodulate_stream, ChannelDemod, DemodConfig, InputKind, SyncMarkers, WindowKind,
};
use fluxramp::sigmodel::{
    oracle_demod, two_tone_ramp, wrap_phase, ChannelScene, PulseSpec, RampSpec,
};
use fluxramp::stream::{SampleStream, Samples, StreamKind};

pub const FS: f64 = 15.625e6;

pub fn ramp_spec(n: usize, periods: f64, amplitude: f64) -> RampSpec {
    RampSpec {
        sample_rate_hz: FS,
        ramp_length_samples: n,
        modulation_freq_hz: periods * FS / n as f64,
        amplitude,
        dc_offset: 0.0,
    }
}

pub fn quiet_pulses() -> PulseSpec {
    PulseSpec {
        rise_time_s: 10e-6,
        decay_time_s: 1e-3,
        amplitude_rad: 0.5,
        event_rate_hz: 0.0,
    }
}

/// Noiseless, pulse-free scene with a constant phase.
pub fn static_scene(channels: usize, ramp: RampSpec, ramps: usize, phase: f64) -> ChannelScene {
    let duration = ramps as f64 * ramp.ramp_length_samples as f64 / ramp.sample_rate_hz;
    let mut s = ChannelScene::new(channels, ramp, quiet_pulses(), duration, 11);
    s.phase_offset_rad = phase;
    s
}

pub fn demod_for(
    ramp: &RampSpec,
    channels: usize,
    window: WindowKind,
    trims: (usize, usize),
) -> DemodConfig {
    DemodConfig::uniform(
        channels,
        ramp.sample_rate_hz,
        ramp.ramp_length_samples,
        ChannelDemod {
            modulation_freq_hz: ramp.modulation_freq_hz,
            trim_begin: trims.0,
            trim_end: trims.1,
            window,
        },
        InputKind::Real,
    )
}

/// Stream of identical real ramps on one channel.
pub fn repeated_ramp(samples: &[f64], ramps: usize) -> SampleStream {
    let mut v = Vec::with_capacity(samples.len() * ramps);
    for _ in 0..ramps {
        v.extend_from_slice(samples);
    }
    SampleStream::new(
        StreamKind::Real,
        1,
        FS,
        samples.len() as u32,
        Samples::F64(v),
    )
}

/// Largest error of the 40-period tone's recovered phase in the two-tone
/// scene, over 64 interferer phases: (fixed-point pipeline, float oracle).
pub fn two_tone_max_error(window: WindowKind) -> (f64, f64) {
    let n = 1000;
    let spec = ramp_spec(n, 40.0, 0.45);
    let cfg = demod_for(&spec, 1, window, (0, 0));
    let phi1 = 0.3;
    let (mut fixed, mut float) = (0.0f64, 0.0f64);
    for k in 0..64 {
        let phi2 = std::f64::consts::TAU * k as f64 / 64.0;
        let ramp = two_tone_ramp(n, (40.0, phi1), (44.4, phi2), 0.45);
        let out = demodulate_stream(&repeated_ramp(&ramp, 3), &cfg, SyncMarkers::Periodic).unwrap();
        // The first two ramps settle the dc estimate.
        let got = out.points[2].phase_rad;
        fixed = fixed.max(wrap_phase(got - phi1).abs());
        let o = oracle_demod(&ramp, &spec, window, 0, 0).unwrap();
        float = float.max(wrap_phase(o - phi1).abs());
    }
    (fixed, float)
}

/// `E^N/N! / Σ E^k/k!` by direct summation.
pub fn erlang_direct(e: f64, n: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        term *= e / k as f64;
        sum += term;
    }
    term / sum
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Engset call congestion: the loss seen by a request from one of `sources`
/// finite sources, each offering `a` Erlang while idle, on `slots` servers.
pub fn engset_call_congestion(sources: usize, a: f64, slots: usize) -> f64 {
    let others = sources - 1;
    if slots > others {
        return 0.0;
    }
    let num = binom(others, slots) * a.powi(slots as i32);
    let den: f64 = (0..=slots)
        .map(|k| binom(others, k) * a.powi(k as i32))
        .sum();
    num / den
}

/// Difference of two boxcars of length `l` separated by `g`, summed
/// directly over `x[..=t]` with zeros before the start.
pub fn direct_maw_diff(x: &[i64], t: usize, l: usize, g: usize) -> i64 {
    let at = |i: isize| if i < 0 { 0 } else { x[i as usize] };
    let t = t as isize;
    let recent: i64 = (0..l as isize).map(|k| at(t - k)).sum();
    let older: i64 = (0..l as isize)
        .map(|k| at(t - l as isize - g as isize - k))
        .sum();
    recent - older
}

/// Index of the first sample whose filter output is a local maximum of
/// magnitude at or above `threshold`, by direct window sums.
pub fn first_peak(x: &[f64], l: usize, g: usize, threshold: f64) -> Option<usize> {
    let codes: Vec<i64> = x
        .iter()
        .map(|&v| fluxramp::trigger::phase_to_code(v))
        .collect();
    let out: Vec<f64> = (0..x.len())
        .map(|t| {
            (direct_maw_diff(&codes, t, l, g) as f64 / l as f64 * fluxramp::trigger::CODE_TO_RAD)
                .abs()
        })
        .collect();
    (1..x.len() - 1).find(|&t| out[t] >= threshold && out[t - 1] < out[t] && out[t] >= out[t + 1])
}
