//! Synthetic flux-ramp waveforms and the floating-point reference demodulator.
//!
//! Within one ramp the modulated SQUID response is modelled as a single
//! harmonic, `dc + A·sin(2π·f_r/f_s·n + φ)`, with `n` restarting at every ramp
//! boundary. The sensor phase `φ` is held quasi-static per ramp and sampled
//! from a double-exponential pulse train at the ramp start.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use thiserror::Error;

use crate::demod::WindowKind;
use crate::stream::{SampleStream, Samples, StreamKind};

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sine and cosine correlations are both zero; phase undefined")]
    UndefinedPhase,
    #[error("expected {expected} samples for one ramp, got {got}")]
    RampLength { expected: usize, got: usize },
}

fn param(msg: impl Into<String>) -> SignalError {
    SignalError::Parameter(msg.into())
}

/// Number of samples at `k / rate` that fall inside `[0, duration)`.
pub fn sample_count(duration_s: f64, rate_hz: f64) -> usize {
    let n = (duration_s * rate_hz - 1e-9).ceil();
    if n > 0.0 {
        n as usize
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSpec {
    pub sample_rate_hz: f64,
    pub ramp_length_samples: usize,
    /// Frequency of the periodic SQUID response within a ramp (f_r).
    pub modulation_freq_hz: f64,
    pub amplitude: f64,
    pub dc_offset: f64,
}

impl RampSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(param("sample_rate_hz must be positive"));
        }
        if self.ramp_length_samples < 2 {
            return Err(param("ramp_length_samples must be at least 2"));
        }
        if !(self.modulation_freq_hz > 0.0 && self.modulation_freq_hz < self.sample_rate_hz / 2.0) {
            return Err(param(
                "modulation_freq_hz must lie in (0, sample_rate_hz/2)",
            ));
        }
        if !(self.amplitude.is_finite() && self.dc_offset.is_finite()) {
            return Err(param("amplitude and dc_offset must be finite"));
        }
        Ok(())
    }

    /// Cycles per sample, f_r / f_s.
    pub fn normalized_freq(&self) -> f64 {
        self.modulation_freq_hz / self.sample_rate_hz
    }

    pub fn ramp_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.ramp_length_samples as f64
    }

    /// One noiseless ramp with the given phase.
    pub fn ramp(&self, phase_rad: f64) -> Vec<f64> {
        let w = TAU * self.normalized_freq();
        (0..self.ramp_length_samples)
            .map(|n| self.dc_offset + self.amplitude * (w * n as f64 + phase_rad).sin())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub rise_time_s: f64,
    pub decay_time_s: f64,
    pub amplitude_rad: f64,
    /// Mean Poisson rate per channel.
    pub event_rate_hz: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.rise_time_s > 0.0 && self.decay_time_s > 0.0) {
            return Err(param("pulse time constants must be positive"));
        }
        if self.rise_time_s >= self.decay_time_s {
            return Err(param("rise_time_s must be shorter than decay_time_s"));
        }
        if !(self.amplitude_rad > 0.0 && self.amplitude_rad.is_finite()) {
            return Err(param("amplitude_rad must be positive"));
        }
        if !(self.event_rate_hz >= 0.0 && self.event_rate_hz.is_finite()) {
            return Err(param("event_rate_hz must be non-negative"));
        }
        Ok(())
    }

    /// Pulse value `dt` seconds after arrival; zero before arrival.
    pub fn shape(&self, dt: f64) -> f64 {
        if dt < 0.0 {
            return 0.0;
        }
        self.amplitude_rad * ((-dt / self.decay_time_s).exp() - (-dt / self.rise_time_s).exp())
    }

    /// Time after arrival at which the pulse peaks.
    pub fn peak_delay_s(&self) -> f64 {
        let (r, d) = (self.rise_time_s, self.decay_time_s);
        (d / r).ln() * r * d / (d - r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    /// Phase offset per output sample (radians).
    pub timeline: Vec<f64>,
    /// Exact arrival times in seconds, ascending.
    pub events: Vec<f64>,
}

// Contributions below e^-30 of the amplitude are dropped.
const PULSE_TAIL_DECAYS: f64 = 30.0;

/// Renders pulses at the given arrival times onto a timeline sampled at `rate_out_hz`.
pub fn render_pulses(pulses: &PulseSpec, events: &[f64], len: usize, rate_out_hz: f64) -> Vec<f64> {
    let mut timeline = vec![0.0; len];
    let tail = PULSE_TAIL_DECAYS * pulses.decay_time_s;
    for &t0 in events {
        let first = (t0 * rate_out_hz).ceil().max(0.0) as usize;
        for (k, slot) in timeline.iter_mut().enumerate().skip(first) {
            let dt = k as f64 / rate_out_hz - t0;
            if dt > tail {
                break;
            }
            *slot += pulses.shape(dt);
        }
    }
    timeline
}

fn poisson_arrivals<R: Rng>(rate_hz: f64, duration_s: f64, rng: &mut R) -> Vec<f64> {
    if rate_hz <= 0.0 {
        return Vec::new();
    }
    let exp = Exp::new(rate_hz).expect("rate checked positive");
    let mut t = 0.0;
    let mut out = Vec::new();
    loop {
        t += exp.sample(rng);
        if t >= duration_s {
            return out;
        }
        out.push(t);
    }
}

/// Draws Poisson arrivals and renders the resulting phase timeline.
pub fn gen_pulse_train(
    pulses: &PulseSpec,
    duration_s: f64,
    rate_out_hz: f64,
    seed: u64,
) -> Result<PulseTrain, SignalError> {
    pulses.validate()?;
    if !(rate_out_hz > 0.0 && rate_out_hz.is_finite()) {
        return Err(param("rate_out_hz must be positive"));
    }
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(param("duration_s must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = poisson_arrivals(pulses.event_rate_hz, duration_s, &mut rng);
    let timeline = render_pulses(
        pulses,
        &events,
        sample_count(duration_s, rate_out_hz),
        rate_out_hz,
    );
    Ok(PulseTrain { timeline, events })
}

/// Corruption of the first and last samples of every ramp, standing in for
/// the flux-ramp reset transient.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Glitch {
    pub amplitude: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScene {
    pub channel_count: usize,
    /// One entry shared by all channels, or one per channel. Sample rate and
    /// ramp length must agree across entries (one ramp generator).
    pub ramps: Vec<RampSpec>,
    pub pulses: PulseSpec,
    pub noise_sigma: f64,
    pub duration_s: f64,
    pub seed: u64,
    /// Static phase added to every ramp.
    pub phase_offset_rad: f64,
    /// Explicit arrival times applied to every channel instead of Poisson draws.
    pub forced_events: Option<Vec<f64>>,
    pub glitch: Glitch,
    /// Emit a complex envelope whose magnitude is the modulated signal.
    pub complex_envelope: bool,
}

impl ChannelScene {
    pub fn new(
        channel_count: usize,
        ramp: RampSpec,
        pulses: PulseSpec,
        duration_s: f64,
        seed: u64,
    ) -> Self {
        Self {
            channel_count,
            ramps: vec![ramp],
            pulses,
            noise_sigma: 0.0,
            duration_s,
            seed,
            phase_offset_rad: 0.0,
            forced_events: None,
            glitch: Glitch::default(),
            complex_envelope: false,
        }
    }

    pub fn ramp(&self, channel: usize) -> &RampSpec {
        if self.ramps.len() == 1 {
            &self.ramps[0]
        } else {
            &self.ramps[channel]
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        if self.channel_count == 0 || self.channel_count > u16::MAX as usize {
            return Err(param("channel_count must be in 1..=65535"));
        }
        if self.ramps.is_empty()
            || (self.ramps.len() != 1 && self.ramps.len() != self.channel_count)
        {
            return Err(param("ramps must have one entry or one per channel"));
        }
        let first = self.ramps[0];
        for r in &self.ramps {
            r.validate()?;
            if r.sample_rate_hz != first.sample_rate_hz
                || r.ramp_length_samples != first.ramp_length_samples
            {
                return Err(param(
                    "sample rate and ramp length must be shared by all channels",
                ));
            }
        }
        self.pulses.validate()?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(param("noise_sigma must be non-negative"));
        }
        // A zero-length scene is allowed and yields an empty stream.
        if !(self.duration_s >= 0.0 && self.duration_s.is_finite()) {
            return Err(param("duration_s must be non-negative"));
        }
        if !self.phase_offset_rad.is_finite() {
            return Err(param("phase_offset_rad must be finite"));
        }
        if 2 * self.glitch.samples > first.ramp_length_samples {
            return Err(param("glitch covers more than the whole ramp"));
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        sample_count(self.duration_s, self.ramps[0].sample_rate_hz)
    }

    pub fn ramp_count(&self) -> usize {
        self.frame_count()
            .div_ceil(self.ramps[0].ramp_length_samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueEvent {
    pub channel: usize,
    pub time_s: f64,
    pub amplitude_rad: f64,
}

/// Ground truth for a synthesised scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneTruth {
    /// `phases[channel][ramp]`, the quasi-static phase of each ramp.
    pub phases: Vec<Vec<f64>>,
    pub events: Vec<TrueEvent>,
}

/// Frame-at-a-time scene generator, for scenes too large to hold in memory.
///
/// Ramp starts coincide with frames whose index is a multiple of the ramp
/// length; [`SceneSource::is_ramp_start`] exposes this as the sync marker.
pub struct SceneSource {
    scene: ChannelScene,
    truth: SceneTruth,
    carrier: Vec<(f64, f64)>,
    omega: Vec<f64>,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    frame: usize,
    frames: usize,
}

fn carrier_angle(channel: usize) -> f64 {
    // Golden-angle spread so channels do not share an I/Q rotation.
    (channel as f64 * 2.399_963_229_728_653) % TAU
}

impl SceneSource {
    pub fn new(scene: &ChannelScene) -> Result<Self, SignalError> {
        scene.validate()?;
        let ramp = scene.ramps[0];
        let ramp_rate = ramp.ramp_rate_hz();
        let ramps = scene.ramp_count();
        let mut phases = Vec::with_capacity(scene.channel_count);
        let mut events = Vec::new();
        for ch in 0..scene.channel_count {
            let arrivals = match &scene.forced_events {
                Some(times) => times.clone(),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
                    rng.set_stream(ch as u64 + 1);
                    poisson_arrivals(scene.pulses.event_rate_hz, scene.duration_s, &mut rng)
                }
            };
            let mut timeline = render_pulses(&scene.pulses, &arrivals, ramps, ramp_rate);
            for p in &mut timeline {
                *p += scene.phase_offset_rad;
            }
            events.extend(arrivals.iter().map(|&t| TrueEvent {
                channel: ch,
                time_s: t,
                amplitude_rad: scene.pulses.amplitude_rad,
            }));
            phases.push(timeline);
        }
        events.sort_by(|a, b| {
            a.time_s
                .total_cmp(&b.time_s)
                .then(a.channel.cmp(&b.channel))
        });
        let noise = (scene.noise_sigma > 0.0)
            .then(|| Normal::new(0.0, scene.noise_sigma).expect("sigma checked non-negative"));
        let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
        rng.set_stream(0);
        Ok(Self {
            carrier: (0..scene.channel_count)
                .map(|c| {
                    let a = carrier_angle(c);
                    (a.cos(), a.sin())
                })
                .collect(),
            omega: (0..scene.channel_count)
                .map(|c| TAU * scene.ramp(c).normalized_freq())
                .collect(),
            truth: SceneTruth { phases, events },
            frames: scene.frame_count(),
            scene: scene.clone(),
            noise,
            rng,
            frame: 0,
        })
    }

    pub fn truth(&self) -> &SceneTruth {
        &self.truth
    }

    pub fn kind(&self) -> StreamKind {
        if self.scene.complex_envelope {
            StreamKind::Complex
        } else {
            StreamKind::Real
        }
    }

    pub fn frames_total(&self) -> usize {
        self.frames
    }

    pub fn frames_remaining(&self) -> usize {
        self.frames - self.frame
    }

    pub fn ramp_length(&self) -> usize {
        self.scene.ramps[0].ramp_length_samples
    }

    pub fn is_ramp_start(&self, frame: usize) -> bool {
        frame % self.ramp_length() == 0
    }

    /// Appends the next frame's values to `out`; returns false when exhausted.
    pub fn next_frame(&mut self, out: &mut Vec<f64>) -> bool {
        if self.frame >= self.frames {
            return false;
        }
        let len = self.ramp_length();
        let m = self.frame / len;
        let n = self.frame % len;
        let glitch = self.scene.glitch;
        let glitched = n < glitch.samples || n >= len - glitch.samples;
        for ch in 0..self.scene.channel_count {
            let ramp = self.scene.ramp(ch);
            let phi = self.truth.phases[ch][m];
            let mut s = ramp.dc_offset + ramp.amplitude * (self.omega[ch] * n as f64 + phi).sin();
            if glitched {
                s += glitch.amplitude;
            }
            if self.scene.complex_envelope {
                let (c, si) = self.carrier[ch];
                let (mut i, mut q) = (s * c, s * si);
                if let Some(d) = &self.noise {
                    i += d.sample(&mut self.rng);
                    q += d.sample(&mut self.rng);
                }
                out.push(i);
                out.push(q);
            } else {
                if let Some(d) = &self.noise {
                    s += d.sample(&mut self.rng);
                }
                out.push(s);
            }
        }
        self.frame += 1;
        true
    }
}

/// Synthesises the whole scene in memory.
pub fn gen_scene(scene: &ChannelScene) -> Result<(SampleStream, SceneTruth), SignalError> {
    let mut src = SceneSource::new(scene)?;
    let mut values = Vec::with_capacity(
        src.frames_total() * scene.channel_count * src.kind().values_per_channel(),
    );
    while src.next_frame(&mut values) {}
    let ramp = scene.ramps[0];
    let stream = SampleStream::new(
        src.kind(),
        scene.channel_count,
        ramp.sample_rate_hz,
        ramp.ramp_length_samples as u32,
        Samples::F64(values),
    );
    Ok((stream, src.truth))
}

/// One ramp holding two tones given in periods per ramp, each with unit amplitude.
pub fn two_tone_ramp(
    len: usize,
    tone_a: (f64, f64),
    tone_b: (f64, f64),
    amplitude: f64,
) -> Vec<f64> {
    let l = len as f64;
    (0..len)
        .map(|n| {
            let x = n as f64 / l;
            amplitude
                * ((TAU * tone_a.0 * x + tone_a.1).sin() + (TAU * tone_b.0 * x + tone_b.1).sin())
        })
        .collect()
}

fn oracle_weight(kind: WindowKind, n: usize, len: usize) -> f64 {
    if len < 2 {
        return 1.0;
    }
    let x = n as f64 / (len - 1) as f64;
    match kind {
        WindowKind::Rectangular => 1.0,
        WindowKind::Bartlett => 1.0 - (2.0 * x - 1.0).abs(),
        WindowKind::Hann => 0.5 * (1.0 - (TAU * x).cos()),
    }
}

/// Raw windowed correlations `(cos_sum, sin_sum)` over the trimmed span.
pub fn oracle_correlations(
    samples: &[f64],
    spec: &RampSpec,
    window: WindowKind,
    trim_begin: usize,
    trim_end: usize,
) -> Result<(f64, f64), SignalError> {
    let len = spec.ramp_length_samples;
    if samples.len() != len {
        return Err(SignalError::RampLength {
            expected: len,
            got: samples.len(),
        });
    }
    if trim_begin + trim_end + 1 >= len {
        return Err(param("trims leave fewer than two samples"));
    }
    let last = len - 1 - trim_end;
    let span = &samples[trim_begin..=last];
    let mean = span.iter().sum::<f64>() / span.len() as f64;
    let w = TAU * spec.normalized_freq();
    let (mut c, mut s) = (0.0, 0.0);
    for (k, &x) in span.iter().enumerate() {
        let n = (trim_begin + k) as f64;
        let v = (x - mean) * oracle_weight(window, k, span.len());
        c += v * (w * n).cos();
        s += v * (w * n).sin();
    }
    Ok((c, s))
}

/// Double-precision phase of one ramp: four-quadrant arctangent of the
/// cosine correlation over the sine correlation, in (−π, π].
pub fn oracle_demod(
    samples: &[f64],
    spec: &RampSpec,
    window: WindowKind,
    trim_begin: usize,
    trim_end: usize,
) -> Result<f64, SignalError> {
    let (c, s) = oracle_correlations(samples, spec, window, trim_begin, trim_end)?;
    if c == 0.0 && s == 0.0 {
        return Err(SignalError::UndefinedPhase);
    }
    let phi = c.atan2(s);
    Ok(if phi <= -PI { PI } else { phi })
}

/// Wraps an angle difference into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, periods: f64) -> RampSpec {
        RampSpec {
            sample_rate_hz: 1.0e6,
            ramp_length_samples: n,
            modulation_freq_hz: 1.0e6 * periods / n as f64,
            amplitude: 0.5,
            dc_offset: 0.0,
        }
    }

    fn pulses(rate: f64) -> PulseSpec {
        PulseSpec {
            rise_time_s: 1e-5,
            decay_time_s: 1e-3,
            amplitude_rad: 1.0,
            event_rate_hz: rate,
        }
    }

    #[test]
    fn zero_rate_gives_empty_train() {
        let t = gen_pulse_train(&pulses(0.0), 0.5, 1e4, 3).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.timeline.len(), 5000);
        assert!(t.timeline.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn forced_pulse_peak_matches_closed_form() {
        let p = pulses(0.0);
        let (r, d) = (p.rise_time_s, p.decay_time_s);
        let peak = p.amplitude_rad * ((d / r).powf(r / (r - d)) - (d / r).powf(d / (r - d)));
        let t_peak = (d / r).ln() * r * d / (d - r);
        let t0 = 2.5e-5;
        let rate = 1.0e8;
        let tl = render_pulses(&p, &[t0], 40_000, rate);
        let (k, &max) = tl
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((max - peak).abs() < 1e-9 * peak, "{max} vs {peak}");
        assert!((k as f64 / rate - (t0 + t_peak)).abs() <= 1.0 / rate);
        assert!((p.peak_delay_s() - t_peak).abs() < 1e-15);
    }

    #[test]
    fn poisson_count_at_twenty_hz() {
        let t = gen_pulse_train(&pulses(20.0), 10.0, 1e3, 11).unwrap();
        let n = t.events.len() as f64;
        assert!((n - 200.0).abs() < 5.0 * 200f64.sqrt(), "{n}");
    }

    #[test]
    fn invalid_pulse_specs_rejected() {
        let mut p = pulses(1.0);
        p.rise_time_s = 0.0;
        assert!(gen_pulse_train(&p, 1.0, 1e3, 0).is_err());
        let mut p = pulses(1.0);
        p.rise_time_s = 2e-3;
        assert!(gen_pulse_train(&p, 1.0, 1e3, 0).is_err());
        assert!(gen_pulse_train(&pulses(1.0), 0.0, 1e3, 0).is_err());
        assert!(gen_pulse_train(&pulses(1.0), 1.0, -1.0, 0).is_err());
    }

    #[test]
    fn oracle_basis_alignment() {
        let s = spec(100, 5.0);
        let ramp: Vec<f64> = (0..100)
            .map(|n| (TAU * 5.0 * n as f64 / 100.0).sin())
            .collect();
        let phi = oracle_demod(&ramp, &s, WindowKind::Rectangular, 0, 0).unwrap();
        assert!(phi.abs() < 1e-12);
    }

    #[test]
    fn oracle_quarter_pi_and_dc() {
        let s = spec(200, 8.0);
        let a = s.ramp(PI / 4.0);
        let phi = oracle_demod(&a, &s, WindowKind::Rectangular, 0, 0).unwrap();
        assert!((phi - PI / 4.0).abs() < 1e-9);
        let shifted: Vec<f64> = a.iter().map(|x| x + 0.3).collect();
        let phi2 = oracle_demod(&shifted, &s, WindowKind::Rectangular, 0, 0).unwrap();
        assert!((phi2 - phi).abs() < 1e-9);
    }

    #[test]
    fn oracle_errors() {
        let s = spec(64, 4.0);
        assert_eq!(
            oracle_demod(&[0.0; 64], &s, WindowKind::Rectangular, 0, 0),
            Err(SignalError::UndefinedPhase)
        );
        assert!(matches!(
            oracle_demod(&[0.0; 10], &s, WindowKind::Rectangular, 0, 0),
            Err(SignalError::RampLength { .. })
        ));
    }

    #[test]
    fn oracle_phase_sweep_with_trims() {
        // 125-sample ramp, period 25: trims 12 + 13 leave four whole periods.
        let s = spec(125, 5.0);
        for k in 0..64 {
            let phi = wrap_phase(TAU * k as f64 / 64.0);
            let got = oracle_demod(&s.ramp(phi), &s, WindowKind::Rectangular, 12, 13).unwrap();
            assert!(wrap_phase(got - phi).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn static_scene_ramps_repeat() {
        let sc = ChannelScene::new(2, spec(50, 5.0), pulses(0.0), 200e-6, 1);
        let (stream, truth) = gen_scene(&sc).unwrap();
        assert_eq!(stream.frame_count(), 200);
        let ch = stream.channel_values(1);
        for m in 1..4 {
            assert_eq!(&ch[..50], &ch[m * 50..(m + 1) * 50]);
        }
        assert!(truth.phases[0].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn glitch_touches_only_ramp_edges() {
        let mut sc = ChannelScene::new(1, spec(50, 5.0), pulses(0.0), 100e-6, 1);
        let (clean, _) = gen_scene(&sc).unwrap();
        sc.glitch = Glitch {
            amplitude: 0.25,
            samples: 2,
        };
        let (dirty, _) = gen_scene(&sc).unwrap();
        let (a, b) = (clean.channel_values(0), dirty.channel_values(0));
        for n in 0..100 {
            let edge = matches!(n % 50, 0 | 1 | 48 | 49);
            assert_eq!(a[n] != b[n], edge, "n={n}");
        }
    }

    #[test]
    fn complex_envelope_magnitude_is_signal() {
        let mut r = spec(50, 5.0);
        r.dc_offset = 0.6;
        r.amplitude = 0.3;
        let mut sc = ChannelScene::new(3, r, pulses(0.0), 50e-6, 2);
        sc.complex_envelope = true;
        sc.phase_offset_rad = 0.4;
        let (stream, _) = gen_scene(&sc).unwrap();
        assert_eq!(stream.kind, StreamKind::Complex);
        let want = r.ramp(0.4);
        for (n, f) in stream.frames().enumerate() {
            for ch in 0..3 {
                let m = f.value(2 * ch).hypot(f.value(2 * ch + 1));
                assert!((m - want[n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
