//! Stage glue: phase-frame assembly, file-to-file stage runners and the
//! fused threaded chain scene → demodulator → trigger → evacuation.

use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::bounded;
use thiserror::Error;

use crate::demod::{DemodConfig, DemodError, DemodStats, Demodulator, PhasePoint};
use crate::sigmodel::{ChannelScene, SceneSource, SceneTruth, SignalError};
use crate::stream::{Frame, SampleStream, Samples, StreamKind};
use crate::trigger::{audit, trigger_pair, EventPacket, TriggerConfig, TriggerError, TriggerStats};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Demod(#[from] DemodError),
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error("{0}")]
    Mismatch(String),
}

/// Groups demodulated points into one frame per ramp.
///
/// Points for ramp `m` all arrive before any point of ramp `m + 1`. A ramp
/// that lost channels to a resync is dropped whole.
#[derive(Debug)]
pub struct PhaseFrameAssembler {
    ramp: Option<u64>,
    values: Vec<f64>,
    present: Vec<bool>,
    count: usize,
    frames_out: u64,
    frames_dropped: u64,
}

impl PhaseFrameAssembler {
    pub fn new(channels: usize) -> Self {
        Self {
            ramp: None,
            values: vec![0.0; channels],
            present: vec![false; channels],
            count: 0,
            frames_out: 0,
            frames_dropped: 0,
        }
    }

    pub fn frames_out(&self) -> u64 {
        self.frames_out
    }

    pub fn frames_dropped(&self) -> u64 {
        self.frames_dropped
    }

    fn flush<F: FnMut(u64, &[f64])>(&mut self, emit: &mut F) {
        if let Some(r) = self.ramp.take() {
            if self.count == self.values.len() {
                self.frames_out += 1;
                emit(r, &self.values);
            } else {
                self.frames_dropped += 1;
            }
        }
        self.present.iter_mut().for_each(|p| *p = false);
        self.count = 0;
    }

    pub fn push<F: FnMut(u64, &[f64])>(
        &mut self,
        p: &PhasePoint,
        mut emit: F,
    ) -> Result<(), PipelineError> {
        if p.channel >= self.values.len() {
            return Err(PipelineError::Mismatch(format!(
                "point for channel {} out of range",
                p.channel
            )));
        }
        match self.ramp {
            Some(r) if r == p.ramp_index => {}
            Some(r) if p.ramp_index < r => {
                return Err(PipelineError::Mismatch(format!(
                    "ramp {} arrived after ramp {r}",
                    p.ramp_index
                )))
            }
            _ => {
                self.flush(&mut emit);
                self.ramp = Some(p.ramp_index);
            }
        }
        if self.present[p.channel] {
            return Err(PipelineError::Mismatch(format!(
                "channel {} repeated in ramp {}",
                p.channel, p.ramp_index
            )));
        }
        self.present[p.channel] = true;
        self.values[p.channel] = p.phase_rad;
        self.count += 1;
        if self.count == self.values.len() {
            self.flush(&mut emit);
        }
        Ok(())
    }

    pub fn finish<F: FnMut(u64, &[f64])>(&mut self, mut emit: F) {
        self.flush(&mut emit);
    }
}

/// Phase stream with one frame per complete ramp, plus the ramp indices
/// and the number of incomplete ramps dropped.
pub fn assemble_phase_stream(
    points: &[PhasePoint],
    channels: usize,
    ramp_rate_hz: f64,
    ramp_length: u32,
) -> Result<(SampleStream, Vec<u64>, u64), PipelineError> {
    let mut asm = PhaseFrameAssembler::new(channels);
    let mut values = Vec::with_capacity(points.len());
    let mut ramps = Vec::with_capacity(points.len() / channels.max(1));
    let mut emit = |r: u64, v: &[f64]| {
        ramps.push(r);
        values.extend_from_slice(v);
    };
    for p in points {
        asm.push(p, &mut emit)?;
    }
    asm.finish(&mut emit);
    let stream = SampleStream::new(
        StreamKind::Phase,
        channels,
        ramp_rate_hz,
        ramp_length,
        Samples::F64(values),
    );
    Ok((stream, ramps, asm.frames_dropped()))
}

/// The ground-truth phase timeline as a phase stream, ramp-major.
pub fn truth_phase_stream(truth: &SceneTruth, ramp_rate_hz: f64, ramp_length: u32) -> SampleStream {
    let channels = truth.phases.len();
    let ramps = truth.phases.iter().map(Vec::len).min().unwrap_or(0);
    let mut values = Vec::with_capacity(channels * ramps);
    for r in 0..ramps {
        values.extend(truth.phases.iter().map(|p| p[r]));
    }
    SampleStream::new(
        StreamKind::Phase,
        channels.max(1),
        ramp_rate_hz,
        ramp_length,
        Samples::F64(values),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerRun {
    pub events: Vec<EventPacket>,
    pub stats: TriggerStats,
}

/// Runs the trigger over a phase stream on one thread, evacuating after
/// every frame. Frame `k` carries ramp index `k`.
pub fn trigger_phase_stream(
    stream: &SampleStream,
    config: TriggerConfig,
) -> Result<TriggerRun, PipelineError> {
    if stream.kind != StreamKind::Phase {
        return Err(PipelineError::Mismatch(format!(
            "expected a phase stream, got {:?}",
            stream.kind
        )));
    }
    if stream.channel_count != config.channel_count {
        return Err(PipelineError::Mismatch(format!(
            "stream has {} channels, trigger expects {}",
            stream.channel_count, config.channel_count
        )));
    }
    let (mut engine, mut evac) = trigger_pair(config)?;
    let mut events = Vec::new();
    let mut frame = Vec::with_capacity(stream.channel_count);
    for k in 0..stream.frame_count() {
        let f = stream.frame(k);
        frame.clear();
        frame.extend((0..stream.channel_count).map(|c| f.value(c)));
        engine.process_phases(&frame, k as u64)?;
        evac.evacuate(|p| events.push(p));
        debug_assert!(audit(&engine, &evac).is_ok());
    }
    Ok(TriggerRun {
        events,
        stats: engine.finish(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    /// Phase frames per message between the demodulator and trigger threads.
    pub batch_frames: usize,
    /// Messages the inter-stage queue holds before the producer blocks.
    pub queue_depth: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            batch_frames: 256,
            queue_depth: 16,
        }
    }
}

/// Busy time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTiming {
    pub synth_demod: Duration,
    pub trigger: Duration,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub channels: usize,
    pub input_frames: u64,
    pub demod: DemodStats,
    pub phase_frames: u64,
    pub frames_dropped: u64,
    /// Present when the trigger stage ran.
    pub trigger: Option<TriggerStats>,
    pub events: Vec<EventPacket>,
    /// Full phase stream, kept only when the trigger stage is disabled.
    pub phases: Option<SampleStream>,
    pub timing: StageTiming,
}

impl PipelineReport {
    /// Raw samples per channel and frame (I/Q pairs count once).
    pub fn input_samples(&self) -> u64 {
        self.input_frames * self.channels as u64
    }

    pub fn retained_samples(&self) -> u64 {
        match &self.trigger {
            Some(_) => self.events.iter().map(|e| e.samples.len() as u64).sum(),
            None => self.phase_frames * self.channels as u64,
        }
    }

    /// Input samples per retained sample.
    pub fn end_to_end_reduction(&self) -> f64 {
        match self.retained_samples() {
            0 => f64::INFINITY,
            r => self.input_samples() as f64 / r as f64,
        }
    }

    fn rate(samples: u64, d: Duration) -> f64 {
        if d.is_zero() {
            0.0
        } else {
            samples as f64 / d.as_secs_f64()
        }
    }

    /// Raw samples per second through synthesis and demodulation.
    pub fn demod_throughput(&self) -> f64 {
        Self::rate(self.input_samples(), self.timing.synth_demod)
    }

    /// Phase samples per second through the trigger thread.
    pub fn trigger_throughput(&self) -> f64 {
        Self::rate(
            self.phase_frames * self.channels as u64,
            self.timing.trigger,
        )
    }
}

struct Batch {
    ramps: Vec<u64>,
    values: Vec<f64>,
}

/// Runs the fused chain. Synthesis and demodulation run on the calling
/// thread, the trigger engine and the evacuator on one thread each.
///
/// Evacuation is treated as instantaneous (see
/// [`crate::trigger::TriggerEngine::set_wait_for_evacuation`]), so results
/// are identical from run to run.
pub fn run_pipeline(
    scene: &ChannelScene,
    demod: &DemodConfig,
    trigger: Option<TriggerConfig>,
    options: PipelineOptions,
) -> Result<PipelineReport, PipelineError> {
    let channels = scene.channel_count;
    if demod.channel_count() != channels {
        return Err(PipelineError::Mismatch(format!(
            "scene has {channels} channels, demodulator expects {}",
            demod.channel_count()
        )));
    }
    let mut source = SceneSource::new(scene)?;
    if source.kind() != demod.input_kind.stream_kind() {
        return Err(PipelineError::Mismatch(
            "scene output kind does not match demodulator input".into(),
        ));
    }
    if source.ramp_length() != demod.ramp_length {
        return Err(PipelineError::Mismatch(format!(
            "scene ramp length {} does not match demodulator {}",
            source.ramp_length(),
            demod.ramp_length
        )));
    }
    if let Some(t) = &trigger {
        if t.channel_count != channels {
            return Err(PipelineError::Mismatch(format!(
                "scene has {channels} channels, trigger expects {}",
                t.channel_count
            )));
        }
    }
    let mut demodulator = Demodulator::new(demod.clone())?;
    let ramp_rate = demod.sample_rate_hz / demod.ramp_length as f64;
    let batch_frames = options.batch_frames.max(1);
    let wall = Instant::now();

    let (tx, rx) = bounded::<Batch>(options.queue_depth.max(1));
    let pair = trigger.map(trigger_pair).transpose()?;

    thread::scope(|s| {
        let consumer = s.spawn(move || -> Result<(Option<TriggerStats>, Vec<EventPacket>, Vec<f64>, Duration), PipelineError> {
            let mut busy = Duration::ZERO;
            let Some((mut engine, evac)) = pair else {
                let mut all = Vec::new();
                for b in rx {
                    all.extend_from_slice(&b.values);
                }
                return Ok((None, Vec::new(), all, busy));
            };
            engine.set_wait_for_evacuation(true);
            let evac_thread = thread::Builder::new()
                .name("evacuate".into())
                .spawn(move || {
                    let mut events = Vec::new();
                    evac.run(|p| events.push(p));
                    events
                })
                .expect("spawn evacuation thread");
            let mut result = Ok(());
            for b in rx {
                let t0 = Instant::now();
                for (k, &r) in b.ramps.iter().enumerate() {
                    if let Err(e) = engine.process_phases(&b.values[k * channels..(k + 1) * channels], r) {
                        result = Err(e);
                        break;
                    }
                }
                busy += t0.elapsed();
                if result.is_err() {
                    break;
                }
            }
            let stats = engine.finish();
            let events = evac_thread.join().expect("evacuation thread panicked");
            result?;
            Ok((Some(stats), events, Vec::new(), busy))
        });

        let t0 = Instant::now();
        let mut asm = PhaseFrameAssembler::new(channels);
        let mut frame = Vec::with_capacity(channels * 2);
        let mut batch = Batch {
            ramps: Vec::with_capacity(batch_frames),
            values: Vec::with_capacity(batch_frames * channels),
        };
        let mut index = 0usize;
        let mut producer = || -> Result<(), PipelineError> {
            let disconnected = std::cell::Cell::new(false);
            let mut on_frame = |r: u64, v: &[f64]| {
                batch.ramps.push(r);
                batch.values.extend_from_slice(v);
                if batch.ramps.len() == batch_frames {
                    let full = std::mem::replace(
                        &mut batch,
                        Batch {
                            ramps: Vec::with_capacity(batch_frames),
                            values: Vec::with_capacity(batch_frames * channels),
                        },
                    );
                    if tx.send(full).is_err() {
                        disconnected.set(true);
                    }
                }
            };
            loop {
                frame.clear();
                if !source.next_frame(&mut frame) {
                    break;
                }
                let sync = source.is_ramp_start(index);
                index += 1;
                let mut pending: Option<PipelineError> = None;
                demodulator.push_frame(Frame::F64(&frame), sync, |p| {
                    if pending.is_none() {
                        if let Err(e) = asm.push(&p, &mut on_frame) {
                            pending = Some(e);
                        }
                    }
                })?;
                if let Some(e) = pending {
                    return Err(e);
                }
                if disconnected.get() {
                    // The consumer stopped early; its error is reported on join.
                    return Ok(());
                }
            }
            asm.finish(&mut on_frame);
            Ok(())
        };
        let produced = producer();
        if !batch.ramps.is_empty() {
            let _ = tx.send(batch);
        }
        drop(tx);
        let synth_demod = t0.elapsed();
        let consumed = consumer.join().expect("trigger thread panicked");
        produced?;
        let (mut stats, events, all, trigger_busy) = consumed?;
        let dstats = demodulator.stats();
        if let Some(st) = stats.as_mut() {
            st.resyncs = dstats.resyncs;
            st.frames_dropped = asm.frames_dropped();
        }
        let phases = stats.is_none().then(|| {
            SampleStream::new(
                StreamKind::Phase,
                channels,
                ramp_rate,
                demod.ramp_length as u32,
                Samples::F64(all),
            )
        });
        Ok(PipelineReport {
            channels,
            input_frames: dstats.frames,
            demod: dstats,
            phase_frames: asm.frames_out(),
            frames_dropped: asm.frames_dropped(),
            trigger: stats,
            events,
            phases,
            timing: StageTiming {
                synth_demod,
                trigger: trigger_busy,
                wall: wall.elapsed(),
            },
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demod::{ChannelDemod, InputKind, WindowKind};
    use crate::sigmodel::{PulseSpec, RampSpec};

    fn point(channel: usize, ramp_index: u64, phase_rad: f64) -> PhasePoint {
        PhasePoint {
            channel,
            ramp_index,
            phase_rad,
            phase_raw: 0,
            magnitude_class: 0,
        }
    }

    #[test]
    fn assembler_groups_and_drops_partial_ramps() {
        let pts = [
            point(0, 0, 0.1),
            point(1, 0, 0.2),
            point(1, 1, 9.0),
            point(0, 2, 0.3),
            point(1, 2, 0.4),
        ];
        let (s, ramps, dropped) = assemble_phase_stream(&pts, 2, 125e3, 125).unwrap();
        assert_eq!(ramps, vec![0, 2]);
        assert_eq!(dropped, 1);
        assert_eq!(s.samples, Samples::F64(vec![0.1, 0.2, 0.3, 0.4]));
    }

    #[test]
    fn assembler_rejects_disorder() {
        let mut a = PhaseFrameAssembler::new(2);
        a.push(&point(0, 5, 0.0), |_, _| {}).unwrap();
        assert!(a.push(&point(0, 4, 0.0), |_, _| {}).is_err());
        assert!(a.push(&point(0, 5, 0.0), |_, _| {}).is_err());
        assert!(a.push(&point(7, 5, 0.0), |_, _| {}).is_err());
    }

    fn small_scene(channels: usize, duration_s: f64) -> (ChannelScene, DemodConfig) {
        let ramp = RampSpec {
            sample_rate_hz: 1.25e6,
            ramp_length_samples: 125,
            modulation_freq_hz: 50e3,
            amplitude: 0.5,
            dc_offset: 0.0,
        };
        let pulses = PulseSpec {
            rise_time_s: 20e-6,
            decay_time_s: 2e-3,
            amplitude_rad: 0.5,
            event_rate_hz: 20.0,
        };
        let mut scene = ChannelScene::new(channels, ramp, pulses, duration_s, 5);
        scene.forced_events = Some(vec![0.1]);
        let demod = DemodConfig::uniform(
            channels,
            ramp.sample_rate_hz,
            125,
            ChannelDemod {
                modulation_freq_hz: 50e3,
                trim_begin: 0,
                trim_end: 0,
                window: WindowKind::Rectangular,
            },
            InputKind::Real,
        );
        (scene, demod)
    }

    #[test]
    fn disabled_trigger_passes_phase_stream() {
        let (scene, demod) = small_scene(3, 0.01);
        let r = run_pipeline(&scene, &demod, None, PipelineOptions::default()).unwrap();
        let phases = r.phases.as_ref().unwrap();
        assert_eq!(phases.frame_count(), 100);
        assert_eq!(r.phase_frames, 100);
        assert_eq!(r.retained_samples(), 300);
        assert!((r.end_to_end_reduction() - 125.0).abs() < 1e-12);
    }

    #[test]
    fn fused_chain_matches_staged_run() {
        let (scene, demod) = small_scene(2, 0.4);
        let mut tcfg = TriggerConfig::new(2);
        tcfg.pre_trigger_length = 20;
        tcfg.event_length = 60;
        let fused = run_pipeline(
            &scene,
            &demod,
            Some(tcfg.clone()),
            PipelineOptions::default(),
        )
        .unwrap();

        let (stream, _) = crate::sigmodel::gen_scene(&scene).unwrap();
        let out =
            crate::demod::demodulate_stream(&stream, &demod, crate::demod::SyncMarkers::Periodic)
                .unwrap();
        let (phases, ramps, _) = assemble_phase_stream(&out.points, 2, 1e4, 125).unwrap();
        assert_eq!(ramps.len(), phases.frame_count());
        let staged = trigger_phase_stream(&phases, tcfg).unwrap();

        assert_eq!(fused.events, staged.events);
        assert_eq!(fused.events.len(), 2);
        let st = fused.trigger.unwrap();
        assert_eq!(st.total().events_captured, 2);
        assert_eq!(st.resyncs, 0);
    }
}
