//! Acceptance run: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use common::*;
use fluxramp::config::RunConfig;
use fluxramp::demod::{
    angle_to_rad, block_scaled_phase, demodulate_stream, ChannelDemod, DemodConfig, InputKind,
    SyncMarkers, WindowKind,
};
use fluxramp::formats::csv::write_events_csv;
use fluxramp::pipeline::{run_pipeline, trigger_phase_stream, truth_phase_stream, PipelineOptions};
use fluxramp::queueing::{erlang_b, savings_report, simulate_blocking, ArrivalModel, TrafficModel};
use fluxramp::sigmodel::{gen_scene, oracle_demod, wrap_phase, SceneSource};
use fluxramp::stream::{SampleStream, Samples, StreamKind};
use fluxramp::trigger::{audit, phase_to_code, trigger_pair, MawFilter, TriggerConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_traffic(slots: usize) -> TrafficModel {
    TrafficModel::per_channel(20.0, 20, 3.5e-3, slots)
}

fn erlang_reproduction() -> Outcome {
    let m = reference_traffic(5);
    let e = m.offered_load();
    let b = erlang_b(e, 5).map_err(|x| x.to_string())?;
    let s = savings_report(&reference_traffic(0), 0.988).map_err(|x| x.to_string())?;
    let ok = (e - 1.4).abs() < 1e-12
        && (b - 0.01109).abs() <= 1e-5
        && s.slots_needed == 5
        && s.full_population == 20
        && (s.memory_saving - 0.75).abs() < 1e-12;
    check(
        ok,
        format!(
            "E={e:.3}, P_b={b:.6}, capture {:.2}%, {} of {} slots, saving {:.0}%",
            100.0 * (1.0 - b),
            s.slots_needed,
            s.full_population,
            100.0 * s.memory_saving
        ),
    )
}

fn monte_carlo() -> Outcome {
    let m = reference_traffic(5);
    let want = erlang_b(m.offered_load(), 5).map_err(|x| x.to_string())?;
    let ideal = simulate_blocking(&m, 1_000_000, 20240601, ArrivalModel::Pooled)
        .map_err(|x| x.to_string())?;
    let z = (ideal.loss_fraction - want) / ideal.std_error;
    let mut slow = m;
    slow.evacuation_time_s = 0.1 * m.event_duration_s;
    let evac = simulate_blocking(&slow, 1_000_000, 20240601, ArrivalModel::Pooled)
        .map_err(|x| x.to_string())?;
    let rel = (evac.loss_fraction - want).abs() / want;
    check(
        z.abs() < 3.0 && rel < 0.2,
        format!(
            "evacuation 0: loss {:.5} ({z:+.2} SE); evacuation 0.1 tau: loss {:.5}, {:.0}% from {want:.5} (limit 20%)",
            ideal.loss_fraction,
            evac.loss_fraction,
            100.0 * rel
        ),
    )
}

fn windowing() -> Outcome {
    let (rect, _) = two_tone_max_error(WindowKind::Rectangular);
    let (bart, _) = two_tone_max_error(WindowKind::Bartlett);
    check(
        bart <= 0.1 * rect,
        format!(
            "max error rectangular {rect:.3e} rad, bartlett {bart:.3e} rad, ratio {:.3}",
            bart / rect
        ),
    )
}

fn decimation() -> Outcome {
    let channels = 32;
    let ramp = 125usize;
    let cfg = DemodConfig::uniform(
        channels,
        FS,
        ramp,
        ChannelDemod {
            modulation_freq_hz: 5.0 * FS / ramp as f64,
            trim_begin: 0,
            trim_end: 0,
            window: WindowKind::Rectangular,
        },
        InputKind::Real,
    );
    let mut runner = TestRunner::new(PropConfig {
        cases: 32,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let largest = std::cell::Cell::new(0);
    let result = runner.run(
        &(0usize..60, 0usize..125, any::<u64>()),
        |(ramps, tail, seed)| {
            let frames = ramps * ramp + tail;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<i16> = (0..frames * channels).map(|_| rng.random()).collect();
            let stream = SampleStream::new(
                StreamKind::Real,
                channels,
                FS,
                ramp as u32,
                Samples::I16(values),
            );
            let out = demodulate_stream(&stream, &cfg, SyncMarkers::Periodic).unwrap();
            prop_assert_eq!(out.points.len(), ramps * channels);
            for c in 0..channels {
                let idx: Vec<u64> = out
                    .points
                    .iter()
                    .filter(|p| p.channel == c)
                    .map(|p| p.ramp_index)
                    .collect();
                prop_assert_eq!(idx, (0..ramps as u64).collect::<Vec<_>>());
            }
            largest.set(largest.get().max(frames));
            Ok(())
        },
    );
    check(
        result.is_ok() && cfg.decimation() == 125,
        match result {
            Ok(()) => format!(
                "decimation {}, one point per channel per ramp over 32 random streams (up to {} frames)",
                cfg.decimation(),
                largest.get()
            ),
            Err(e) => e.to_string(),
        },
    )
}

fn reduction() -> Outcome {
    // Triggering alone: 20 channels at the 125 kHz ramp rate for 10 s.
    let mut cfg = RunConfig::default()
        .with_overrides(&["scene.channels=20".into(), "scene.duration_s=10.0".into()])
        .map_err(|e| e.to_string())?;
    cfg.seed = 5;
    let scene = cfg.scene().map_err(|e| e.to_string())?;
    let ramp = scene.ramps[0];
    let source = SceneSource::new(&scene).map_err(|e| e.to_string())?;
    let phases = truth_phase_stream(
        source.truth(),
        ramp.ramp_rate_hz(),
        ramp.ramp_length_samples as u32,
    );
    let trig = cfg.trigger().map_err(|e| e.to_string())?;
    let window_s = trig.event_length as f64 / ramp.ramp_rate_hz();
    let run = trigger_phase_stream(&phases, trig).map_err(|e| e.to_string())?;
    let kept = run.stats.retained_fraction();

    // Full chain from raw samples on a smaller scene.
    let small = cfg
        .with_overrides(&["scene.channels=8".into(), "scene.duration_s=2.0".into()])
        .map_err(|e| e.to_string())?;
    let report = run_pipeline(
        &small.scene().map_err(|e| e.to_string())?,
        &small.demod().map_err(|e| e.to_string())?,
        Some(small.trigger().map_err(|e| e.to_string())?),
        PipelineOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let overall = report.end_to_end_reduction();
    check(
        (kept - 0.07).abs() <= 0.01 && (500.0..=5000.0).contains(&overall),
        format!(
            "{:.2} ms windows, retained {:.2}% (reduction {:.1}%) over {} events; end-to-end reduction {overall:.0} over {} raw samples",
            1e3 * window_s,
            100.0 * kept,
            100.0 * run.stats.reduction(),
            run.events.len(),
            report.input_samples()
        ),
    )
}

fn fidelity() -> Outcome {
    let spec = ramp_spec(125, 5.0, 0.9);
    let cfg = demod_for(&spec, 1, WindowKind::Rectangular, (0, 0));
    let mut worst = 0.0f64;
    for k in 0..64 {
        let phi = TAU * k as f64 / 64.0;
        let (stream, _) = gen_scene(&static_scene(1, spec, 4, phi)).map_err(|e| e.to_string())?;
        let out =
            demodulate_stream(&stream, &cfg, SyncMarkers::Periodic).map_err(|e| e.to_string())?;
        let oracle = oracle_demod(&spec.ramp(phi), &spec, WindowKind::Rectangular, 0, 0)
            .map_err(|e| e.to_string())?;
        for p in &out.points[2..] {
            worst = worst.max(wrap_phase(p.phase_rad - oracle).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut shifts_ok = true;
    let mut atan_err = 0.0f64;
    for _ in 0..20_000 {
        let bits = rng.random_range(1..=38);
        let s = rng.random_range(-(1i64 << bits)..(1i64 << bits));
        let c = rng.random_range(-(1i64 << bits)..(1i64 << bits));
        if s == 0 && c == 0 {
            continue;
        }
        let base = block_scaled_phase(s, c);
        for k in 0..=8 {
            let scaled = block_scaled_phase(s << k, c << k);
            shifts_ok &=
                scaled.angle == base.angle && scaled.magnitude_class == base.magnitude_class + k;
        }
        if s.unsigned_abs().max(c.unsigned_abs()) >= 1 << 20 {
            atan_err = atan_err
                .max(wrap_phase(angle_to_rad(base.angle) - (c as f64).atan2(s as f64)).abs());
        }
    }
    check(
        worst < 2e-3 && shifts_ok,
        format!(
            "sweep max |error| {worst:.2e} rad; block scaling bit-exact over k=0..8: {shifts_ok} (arctan error {atan_err:.1e} rad)"
        ),
    )
}

fn engine_properties() -> Outcome {
    let mut notes = Vec::new();

    // Conservation over 10^6 randomized frames.
    let channels = 4;
    let frames = 1_000_000u64;
    let mut cfg = TriggerConfig::new(channels);
    cfg.threshold = 0.3;
    cfg.maw_length = 2;
    cfg.maw_gap = 1;
    cfg.pre_trigger_length = 8;
    cfg.event_length = 40;
    cfg.slot_count = 3;
    let (mut engine, mut evac) = trigger_pair(cfg).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut level = [0.0f64; 4];
    for r in 0..frames {
        for (c, lvl) in level.iter_mut().enumerate() {
            if rng.random::<f64>() < 0.01 {
                *lvl += 1.0;
            }
            *lvl *= 0.9;
            engine
                .process_frame(c, *lvl, r)
                .map_err(|e| e.to_string())?;
            audit(&engine, &evac)?;
            if rng.random::<f64>() < 0.3 {
                evac.evacuate_one(|_| {});
                audit(&engine, &evac)?;
            }
        }
    }
    let t = engine.stats().total();
    if t.events_captured + t.events_lost_no_slot != t.fires - t.pileups_marked {
        return Err(format!("fires do not balance: {t:?}"));
    }
    notes.push(format!(
        "{} frames audited ({} captured, {} lost, {} pile-ups)",
        frames * channels as u64,
        t.events_captured,
        t.events_lost_no_slot,
        t.pileups_marked
    ));

    // Pulse examples.
    let pulse = |len: usize, at: usize| -> Vec<f64> {
        (0..len)
            .map(|n| {
                if n < at {
                    0.0
                } else {
                    let t = (n - at) as f64;
                    0.5 * ((-t / 120.0).exp() - (-t / 0.8).exp())
                }
            })
            .collect()
    };
    let run = |cfg: TriggerConfig, input: &[Vec<f64>]| {
        let (mut engine, mut evac) = trigger_pair(cfg).unwrap();
        let mut out = Vec::new();
        for r in 0..input[0].len() {
            for (c, ch) in input.iter().enumerate() {
                engine.process_frame(c, ch[r], r as u64).unwrap();
                evac.evacuate(|p| out.push(p));
            }
        }
        (out, engine.finish())
    };
    let mut base = TriggerConfig::new(8);
    base.threshold = 0.05;
    let mut single = vec![vec![0.0; 3000]; 8];
    single[3] = pulse(3000, 1000);
    let (ev, _) = run(base.clone(), &single);
    let t0 = first_peak(&single[3], 4, 4, 0.05);
    let single_ok = ev.len() == 1
        && ev[0].channel == 3
        && !ev[0].pileup
        && Some(ev[0].timestamp as usize) == t0;

    let mut tight = base.clone();
    tight.channel_count = 3;
    tight.enabled = vec![true; 3];
    tight.slot_count = 2;
    let (ev, st) = run(tight, &vec![pulse(1200, 400); 3]);
    let exhaust_ok = ev.len() == 2 && st.channels[2].events_lost_no_slot == 1;

    let mut pile = base;
    pile.channel_count = 1;
    pile.enabled = vec![true];
    pile.pre_trigger_length = 100;
    let second = 1000 + pile.event_length / 2;
    let doubled: Vec<f64> = pulse(3000, 1000)
        .iter()
        .zip(pulse(3000, second))
        .map(|(a, b)| a + b)
        .collect();
    let (ev, st) = run(pile, &[doubled]);
    let pile_ok = ev.len() == 1 && ev[0].pileup && st.total().pileups_marked == 1;
    notes.push(format!(
        "single {single_ok}, exhaustion {exhaust_ok}, pile-up {pile_ok}"
    ));

    // Recursive filter against direct sums.
    let mut maw_ok = true;
    for (l, g) in [(4, 4), (1, 0), (7, 2), (3, 11)] {
        let codes: Vec<i64> = (0..20_000)
            .map(|_| rng.random_range(-(1i64 << 31)..(1i64 << 31)))
            .collect();
        let mut f = MawFilter::new(l, g);
        for t in 0..codes.len() {
            maw_ok &= f.update(codes[t]) == direct_maw_diff(&codes, t, l, g);
        }
    }
    maw_ok &= phase_to_code(0.0) == 0;
    notes.push(format!("MAW exact {maw_ok}"));
    check(
        single_ok && exhaust_ok && pile_ok && maw_ok,
        notes.join("; "),
    )
}

fn not_reproducible() -> Outcome {
    let cfg = RunConfig::default()
        .with_overrides(&[
            "scene.channels=2".into(),
            "scene.duration_s=2.0".into(),
            "seed=55".into(),
        ])
        .map_err(|e| e.to_string())?;
    let scene = cfg.scene().map_err(|e| e.to_string())?;
    let ramp = scene.ramps[0];
    let source = SceneSource::new(&scene).map_err(|e| e.to_string())?;
    let phases = truth_phase_stream(
        source.truth(),
        ramp.ramp_rate_hz(),
        ramp.ramp_length_samples as u32,
    );
    let run = trigger_phase_stream(&phases, cfg.trigger().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("captured_pulses.csv");
    let file = File::create(&path).map_err(|e| e.to_string())?;
    write_events_csv(BufWriter::new(file), &run.events, None).map_err(|e| e.to_string())?;
    let rows = std::fs::read_to_string(&path)
        .map_err(|e| e.to_string())?
        .lines()
        .count()
        - 1;
    // Each clean capture peaks within one filter span of the trigger sample
    // and decays towards the end of the window.
    let (pre, span) = (
        cfg.trigger.pre_trigger_length,
        cfg.trigger.maw_length + cfg.trigger.maw_gap,
    );
    let shaped = run.events.iter().filter(|e| !e.pileup).all(|e| {
        let peak = (0..e.samples.len())
            .max_by(|&a, &b| e.samples[a].total_cmp(&e.samples[b]))
            .unwrap_or(0);
        peak.abs_diff(pre) <= span && e.samples[e.samples.len() - 1] < 0.5 * e.samples[peak]
    });
    check(
        !run.events.is_empty() && shaped,
        format!(
            "not reproduced: FPGA resource counts (DSP/LUT/BRAM), the 500 MHz clock, the 55Fe measurement; \
             substitute: {} synthetic pulse captures, {rows} rows in {}",
            run.events.len(),
            path.display()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("Erlang-B reproduction", erlang_reproduction),
        ("Monte-Carlo vs formula", monte_carlo),
        ("windowing", windowing),
        ("decimation", decimation),
        ("trigger data reduction", reduction),
        ("fixed-point fidelity", fidelity),
        ("engine correctness", engine_properties),
        ("desk-scale substitutes", not_reproducible),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {}: PASS  {name} ({secs:.1} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1} s): {d}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
