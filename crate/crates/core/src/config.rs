//! Declarative run configuration.
//!
//! A TOML file with a top-level `seed` and the sections `[scene]`,
//! `[demod]`, `[trigger]` and `[traffic]`. Every key has a default, unknown
//! keys are rejected, and per-channel keys take either a scalar (applied to
//! all channels) or an array with one entry per channel.
//!
//! ```
//! use fluxramp::config::RunConfig;
//!
//! let mut cfg = RunConfig::parse("seed = 7\n[scene]\nchannels = 4\n").unwrap();
//! cfg = cfg.with_overrides(&["trigger.slots=3".to_string()]).unwrap();
//! assert_eq!(cfg.trigger.slots, 3);
//! assert_eq!(cfg.scene().unwrap().channel_count, 4);
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demod::{ChannelDemod, DemodConfig, InputKind, WindowKind};
use crate::queueing::{ArrivalModel, TrafficModel};
use crate::sigmodel::{ChannelScene, Glitch, PulseSpec, RampSpec};
use crate::trigger::TriggerConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("bad override {0:?}: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(m: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(m.into())
}

/// A scalar shared by all channels or one value per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerChannel<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> PerChannel<T> {
    pub fn resolve(&self, channels: usize, key: &str) -> Result<Vec<T>, ConfigError> {
        match self {
            Self::All(v) => Ok(vec![v.clone(); channels]),
            Self::Each(v) if v.len() == channels => Ok(v.clone()),
            Self::Each(v) => Err(invalid(format!(
                "{key} lists {} values for {channels} channels",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub channels: usize,
    pub sample_rate_hz: f64,
    pub ramp_length: usize,
    pub modulation_freq_hz: PerChannel<f64>,
    pub amplitude: PerChannel<f64>,
    pub dc_offset: PerChannel<f64>,
    pub noise_sigma: f64,
    pub duration_s: f64,
    pub rise_time_s: f64,
    pub decay_time_s: f64,
    pub pulse_amplitude_rad: f64,
    /// Mean event rate per channel.
    pub event_rate_hz: f64,
    pub phase_offset_rad: f64,
    pub complex_envelope: bool,
    pub glitch_amplitude: f64,
    pub glitch_samples: usize,
    /// Arrival times applied to every channel in place of Poisson draws.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forced_events: Option<Vec<f64>>,
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            channels: 32,
            sample_rate_hz: 15.625e6,
            ramp_length: 125,
            modulation_freq_hz: PerChannel::All(625e3),
            amplitude: PerChannel::All(0.5),
            dc_offset: PerChannel::All(0.0),
            noise_sigma: 0.0,
            duration_s: 1.0,
            rise_time_s: 10e-6,
            decay_time_s: 1e-3,
            pulse_amplitude_rad: 0.5,
            event_rate_hz: 20.0,
            phase_offset_rad: 0.0,
            complex_envelope: false,
            glitch_amplitude: 0.0,
            glitch_samples: 0,
            forced_events: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemodSection {
    pub trim_begin: PerChannel<usize>,
    pub trim_end: PerChannel<usize>,
    pub window: PerChannel<WindowKind>,
    pub nco_width_bits: u32,
    pub nco_phase_bits: u32,
    pub accumulator_width_bits: u32,
}

impl Default for DemodSection {
    fn default() -> Self {
        Self {
            trim_begin: PerChannel::All(0),
            trim_end: PerChannel::All(0),
            window: PerChannel::All(WindowKind::Rectangular),
            nco_width_bits: 16,
            nco_phase_bits: 32,
            accumulator_width_bits: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TriggerSection {
    /// When false the pipeline passes the full phase stream through.
    pub enabled: bool,
    pub maw_length: usize,
    pub maw_gap: usize,
    pub threshold_rad: f64,
    pub pre_trigger_length: usize,
    pub event_length: usize,
    pub slots: usize,
    pub channel_enable: PerChannel<bool>,
}

impl Default for TriggerSection {
    fn default() -> Self {
        Self {
            enabled: true,
            maw_length: 4,
            maw_gap: 4,
            threshold_rad: 0.05,
            pre_trigger_length: 256,
            event_length: 438,
            slots: 5,
            channel_enable: PerChannel::All(true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arrivals {
    Pooled,
    PerChannel,
}

impl From<Arrivals> for ArrivalModel {
    fn from(a: Arrivals) -> Self {
        match a {
            Arrivals::Pooled => ArrivalModel::Pooled,
            Arrivals::PerChannel => ArrivalModel::PerChannel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    /// Per-channel event rate.
    pub event_rate_hz: f64,
    pub active_channels: usize,
    pub event_duration_s: f64,
    pub evacuation_time_s: f64,
    pub slots: usize,
    pub capture_target: f64,
    pub max_slots: usize,
    pub n_events: u64,
    pub arrivals: Arrivals,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self {
            event_rate_hz: 20.0,
            active_channels: 20,
            event_duration_s: 3.5e-3,
            evacuation_time_s: 0.0,
            slots: 5,
            capture_target: 0.988,
            max_slots: 10,
            n_events: 1_000_000,
            arrivals: Arrivals::Pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scene: SceneSection,
    pub demod: DemodSection,
    pub trigger: TriggerSection,
    pub traffic: TrafficSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            scene: SceneSection::default(),
            demod: DemodSection::default(),
            trigger: TriggerSection::default(),
            traffic: TrafficSection::default(),
        }
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back
/// to a bare string so `demod.window=hann` works unquoted.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Applies `section.key=value` overrides on top of this configuration.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = toml::Table::try_from(self)
            .map_err(|e| ConfigError::Parse(format!("cannot re-encode config: {e}")))?;
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::Override(o.clone()))?;
            let path: Vec<&str> = key.trim().split('.').collect();
            if path.iter().any(|p| p.is_empty()) {
                return Err(ConfigError::Override(o.clone()));
            }
            let (leaf, parents) = path.split_last().expect("non-empty path");
            let mut table = &mut root;
            for p in parents {
                table = table
                    .entry(p.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| invalid(format!("{key}: {p} is not a section")))?;
            }
            table.insert(leaf.to_string(), parse_value(raw.trim()));
        }
        root.try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    /// The resolved configuration as TOML, for echoing alongside results.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ramps(&self) -> Result<Vec<RampSpec>, ConfigError> {
        let s = &self.scene;
        let n = s.channels;
        let f = s
            .modulation_freq_hz
            .resolve(n, "scene.modulation_freq_hz")?;
        let a = s.amplitude.resolve(n, "scene.amplitude")?;
        let d = s.dc_offset.resolve(n, "scene.dc_offset")?;
        Ok((0..n)
            .map(|c| RampSpec {
                sample_rate_hz: s.sample_rate_hz,
                ramp_length_samples: s.ramp_length,
                modulation_freq_hz: f[c],
                amplitude: a[c],
                dc_offset: d[c],
            })
            .collect())
    }

    pub fn scene(&self) -> Result<ChannelScene, ConfigError> {
        let s = &self.scene;
        if s.channels == 0 {
            return Err(invalid("scene.channels must be at least 1"));
        }
        let pulses = PulseSpec {
            rise_time_s: s.rise_time_s,
            decay_time_s: s.decay_time_s,
            amplitude_rad: s.pulse_amplitude_rad,
            event_rate_hz: s.event_rate_hz,
        };
        let mut scene = ChannelScene::new(
            s.channels,
            self.ramps()?[0],
            pulses,
            s.duration_s,
            self.seed,
        );
        scene.ramps = self.ramps()?;
        scene.noise_sigma = s.noise_sigma;
        scene.phase_offset_rad = s.phase_offset_rad;
        scene.forced_events = s.forced_events.clone();
        scene.glitch = Glitch {
            amplitude: s.glitch_amplitude,
            samples: s.glitch_samples,
        };
        scene.complex_envelope = s.complex_envelope;
        scene.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(scene)
    }

    pub fn demod(&self) -> Result<DemodConfig, ConfigError> {
        let n = self.scene.channels;
        let d = &self.demod;
        let freqs = self
            .scene
            .modulation_freq_hz
            .resolve(n, "scene.modulation_freq_hz")?;
        let tb = d.trim_begin.resolve(n, "demod.trim_begin")?;
        let te = d.trim_end.resolve(n, "demod.trim_end")?;
        let win = d.window.resolve(n, "demod.window")?;
        let cfg = DemodConfig {
            sample_rate_hz: self.scene.sample_rate_hz,
            ramp_length: self.scene.ramp_length,
            channels: (0..n)
                .map(|c| ChannelDemod {
                    modulation_freq_hz: freqs[c],
                    trim_begin: tb[c],
                    trim_end: te[c],
                    window: win[c],
                })
                .collect(),
            input_kind: if self.scene.complex_envelope {
                InputKind::ComplexEnvelope
            } else {
                InputKind::Real
            },
            nco_width_bits: d.nco_width_bits,
            nco_phase_bits: d.nco_phase_bits,
            accumulator_width_bits: d.accumulator_width_bits,
        };
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn trigger(&self) -> Result<TriggerConfig, ConfigError> {
        let t = &self.trigger;
        let n = self.scene.channels;
        let cfg = TriggerConfig {
            channel_count: n,
            maw_length: t.maw_length,
            maw_gap: t.maw_gap,
            threshold: t.threshold_rad,
            pre_trigger_length: t.pre_trigger_length,
            event_length: t.event_length,
            slot_count: t.slots,
            enabled: t.channel_enable.resolve(n, "trigger.channel_enable")?,
        };
        cfg.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn traffic(&self) -> Result<TrafficModel, ConfigError> {
        let t = &self.traffic;
        let mut m = TrafficModel::per_channel(
            t.event_rate_hz,
            t.active_channels,
            t.event_duration_s,
            t.slots,
        );
        m.evacuation_time_s = t.evacuation_time_s;
        m.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(m)
    }
}
