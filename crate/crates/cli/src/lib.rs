//! Subcommands of the `fluxramp` binary. Each stage reads and writes the
//! binary formats from [`fluxramp::formats`], so stages can be run and
//! diffed one at a time; `pipeline` runs them fused in one process.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 malformed input
//! file, 4 I/O or runtime failure.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use fluxramp::config::{ConfigError, RunConfig};
use fluxramp::demod::{DemodError, Demodulator, InputKind, PhasePoint};
use fluxramp::formats::csv::{
    write_blocking_csv, write_events_csv, write_stream_csv, write_trigger_stats_csv,
    write_truth_events_csv, write_truth_phases_csv,
};
use fluxramp::formats::{
    read_events, write_events, FormatError, StreamHeader, StreamReader, StreamWriter, STREAM_MAGIC,
};
use fluxramp::pipeline::{
    assemble_phase_stream, run_pipeline, trigger_phase_stream, PipelineError, PipelineOptions,
};
use fluxramp::queueing::{
    blocking_table, erlang_b, savings_report, simulate_blocking, QueueError, TrafficModel,
};
use fluxramp::sigmodel::{oracle_demod, wrap_phase, SceneSource, SignalError};
use fluxramp::stream::{Frame, SampleStream, Samples, StreamKind};
use fluxramp::trigger::{TriggerError, TriggerStats};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FORMAT: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) => EXIT_CONFIG,
            Self::Format {
                source: FormatError::Io(_),
                ..
            }
            | Self::Io { .. }
            | Self::Runtime(_) => EXIT_RUNTIME,
            Self::Format { .. } => EXIT_FORMAT,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Trigger(TriggerError::Disconnected(_)) => Self::Runtime(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<DemodError> for CliError {
    fn from(e: DemodError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<TriggerError> for CliError {
    fn from(e: TriggerError) -> Self {
        PipelineError::from(e).into()
    }
}

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<QueueError> for CliError {
    fn from(e: QueueError) -> Self {
        Self::Usage(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn fmt_err(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
    move |source| CliError::Format {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fluxramp",
    version,
    about = "Flux-ramp demodulation, event trigger and buffer sizing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every configurable subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Global seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override any configuration key, e.g. `--set demod.window=bartlett`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a raw multichannel stream plus ground-truth CSVs.
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Scene duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        channels: Option<usize>,
    },
    /// Demodulate a raw stream into one phase value per channel per ramp.
    Demod {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also run the double-precision reference and report the largest
        /// phase difference.
        #[arg(long)]
        oracle: bool,
    },
    /// Run the event trigger over a phase stream.
    Trigger {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Descriptor slots.
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Synthesis, demodulation and trigger fused in one process.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        channels: Option<usize>,
        #[arg(long)]
        slots: Option<usize>,
        /// Skip the trigger and write the full phase stream.
        #[arg(long)]
        no_trigger: bool,
        /// Report samples per second for each stage.
        #[arg(long)]
        throughput: bool,
    },
    /// Erlang-B blocking table and slot sizing.
    Erlang {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Offered load E in Erlang; otherwise derived from rate, duration and channels.
        #[arg(long)]
        load: Option<f64>,
        /// Event rate per channel in Hz.
        #[arg(long)]
        rate: Option<f64>,
        /// Event duration in seconds.
        #[arg(long)]
        event_duration: Option<f64>,
        #[arg(long)]
        channels: Option<usize>,
        /// Report the blocking for exactly this many slots.
        #[arg(long)]
        slots: Option<usize>,
        /// Required capture fraction, e.g. 0.988.
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        max_slots: Option<usize>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo loss simulation.
    Mc {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Number of arrivals.
        #[arg(long)]
        events: Option<u64>,
        #[arg(long)]
        slots: Option<usize>,
        /// Serialized drain time per event in seconds.
        #[arg(long)]
        evacuation: Option<f64>,
        /// `pooled` or `per-channel`.
        #[arg(long)]
        arrivals: Option<String>,
    },
    /// Convert a stream or event file to CSV.
    ExportCsv {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated column selection.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
    },
}

/// Loads the configuration and applies `--set`, then the dedicated flags.
fn resolve(args: &ConfigArgs, flags: &[(&str, Option<String>)]) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let mut overrides = args.set.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    for (key, value) in flags {
        if let Some(v) = value {
            overrides.push(format!("{key}={v}"));
        }
    }
    Ok(base.with_overrides(&overrides)?)
}

fn echo(out: &mut dyn Write, cfg: &RunConfig) -> io::Result<()> {
    writeln!(out, "# resolved configuration")?;
    for line in cfg.echo().lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

fn prepare_dir(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("run.toml");
    fs::write(&path, cfg.echo()).map_err(io_err(&path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn num<T: ToString>(v: Option<T>) -> Option<String> {
    v.map(|x| x.to_string())
}

/// Runs one subcommand, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |e: io::Error| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match cli.command {
        Command::Synth {
            cfg,
            out: dir,
            duration,
            channels,
        } => {
            let cfg = resolve(
                &cfg,
                &[
                    ("scene.duration_s", num(duration)),
                    ("scene.channels", num(channels)),
                ],
            )?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_synth(&cfg, &dir, out)
        }
        Command::Demod {
            cfg,
            input,
            out: dir,
            oracle,
        } => {
            let cfg = resolve(&cfg, &[])?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_demod(&cfg, &input, &dir, oracle, out)
        }
        Command::Trigger {
            cfg,
            input,
            out: dir,
            slots,
        } => {
            let cfg = resolve(&cfg, &[("trigger.slots", num(slots))])?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_trigger(&cfg, &input, &dir, out)
        }
        Command::Pipeline {
            cfg,
            out: dir,
            duration,
            channels,
            slots,
            no_trigger,
            throughput,
        } => {
            let cfg = resolve(
                &cfg,
                &[
                    ("scene.duration_s", num(duration)),
                    ("scene.channels", num(channels)),
                    ("trigger.slots", num(slots)),
                    ("trigger.enabled", no_trigger.then(|| "false".to_string())),
                ],
            )?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_pipeline(&cfg, &dir, throughput, out)
        }
        Command::Erlang {
            cfg,
            load,
            rate,
            event_duration,
            channels,
            slots,
            target,
            max_slots,
            out: path,
        } => {
            let cfg = resolve(
                &cfg,
                &[
                    ("traffic.event_rate_hz", num(rate)),
                    ("traffic.event_duration_s", num(event_duration)),
                    ("traffic.active_channels", num(channels)),
                    ("traffic.capture_target", num(target)),
                    ("traffic.max_slots", num(max_slots)),
                ],
            )?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_erlang(&cfg, load, slots, path.as_deref(), out)
        }
        Command::Mc {
            cfg,
            events,
            slots,
            evacuation,
            arrivals,
        } => {
            let cfg = resolve(
                &cfg,
                &[
                    ("traffic.n_events", num(events)),
                    ("traffic.slots", num(slots)),
                    ("traffic.evacuation_time_s", num(evacuation)),
                    ("traffic.arrivals", arrivals),
                ],
            )?;
            echo(out, &cfg).map_err(stdout_err)?;
            cmd_mc(&cfg, out)
        }
        Command::ExportCsv {
            input,
            out: path,
            columns,
        } => cmd_export_csv(&input, &path, columns.as_deref(), out),
    }
}

/// Writes `raw.flxd`, `truth_phases.csv` and `truth_events.csv`.
pub fn cmd_synth(cfg: &RunConfig, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let scene = cfg.scene()?;
    prepare_dir(dir, cfg)?;
    let mut source = SceneSource::new(&scene)?;
    let kind = source.kind();
    let header = StreamHeader::for_stream(&SampleStream::new(
        kind,
        scene.channel_count,
        scene.ramps[0].sample_rate_hz,
        scene.ramps[0].ramp_length_samples as u32,
        Samples::I16(Vec::new()),
    ))
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let path = dir.join("raw.flxd");
    let mut w = StreamWriter::new(create(&path)?, header).map_err(fmt_err(&path))?;
    let mut frame = Vec::new();
    let mut frames = 0u64;
    loop {
        frame.clear();
        if !source.next_frame(&mut frame) {
            break;
        }
        w.write_frame_f64(&frame).map_err(fmt_err(&path))?;
        frames += 1;
    }
    w.finish().map_err(fmt_err(&path))?;

    let truth = source.truth();
    let p = dir.join("truth_phases.csv");
    write_truth_phases_csv(create(&p)?, truth).map_err(fmt_err(&p))?;
    let p = dir.join("truth_events.csv");
    write_truth_events_csv(create(&p)?, &truth.events).map_err(fmt_err(&p))?;

    let mut report = || -> io::Result<()> {
        writeln!(out, "channels: {}", scene.channel_count)?;
        writeln!(out, "frames: {frames}")?;
        writeln!(out, "ramps: {}", scene.ramp_count())?;
        writeln!(out, "events: {}", truth.events.len())?;
        writeln!(out, "wrote: {}", path.display())
    };
    report().map_err(io_err(Path::new("<stdout>")))
}

fn frame_of(s: &Samples) -> Frame<'_> {
    match s {
        Samples::I16(v) => Frame::I16(v),
        Samples::F64(v) => Frame::F64(v),
    }
}

/// Demodulates `input` into `phases.flxd` (one frame per complete ramp).
pub fn cmd_demod(
    cfg: &RunConfig,
    input: &Path,
    dir: &Path,
    oracle: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let demod_cfg = cfg.demod()?;
    let ramps = cfg.ramps()?;
    let mut reader = StreamReader::new(open(input)?).map_err(fmt_err(input))?;
    let h = *reader.header();
    let channels = demod_cfg.channel_count();
    if h.channel_count as usize != channels {
        return Err(CliError::Usage(format!(
            "{} has {} channels, configuration has {channels}",
            input.display(),
            h.channel_count
        )));
    }
    if InputKind::from_stream(h.kind)? != demod_cfg.input_kind {
        return Err(CliError::Usage(format!(
            "{} holds {:?} samples, configuration expects {:?}",
            input.display(),
            h.kind,
            demod_cfg.input_kind
        )));
    }
    if (h.sample_rate_hz - demod_cfg.sample_rate_hz).abs() > 1e-9 * demod_cfg.sample_rate_hz {
        return Err(CliError::Usage(format!(
            "{} is sampled at {} Hz, configuration says {} Hz",
            input.display(),
            h.sample_rate_hz,
            demod_cfg.sample_rate_hz
        )));
    }
    prepare_dir(dir, cfg)?;
    let ramp_len = demod_cfg.ramp_length;
    let mut demod = Demodulator::new(demod_cfg.clone())?;
    let mut samples = match h.sample_format {
        fluxramp::formats::SampleFormat::I16 => Samples::I16(Vec::new()),
        fluxramp::formats::SampleFormat::F64 => Samples::F64(Vec::new()),
    };
    let mut points: Vec<PhasePoint> = Vec::new();
    // Per-channel samples of the current ramp, for the reference path.
    let mut ramp_buf: Vec<Vec<f64>> =
        vec![Vec::with_capacity(ramp_len); if oracle { channels } else { 0 }];
    let mut worst: Option<f64> = None;
    let mut frame_index = 0u64;
    loop {
        match &mut samples {
            Samples::I16(v) => v.clear(),
            Samples::F64(v) => v.clear(),
        }
        if !reader
            .next_frame_into(&mut samples)
            .map_err(fmt_err(input))?
        {
            break;
        }
        let sync = frame_index % ramp_len as u64 == 0;
        let frame = frame_of(&samples);
        let first_new = points.len();
        demod.push_frame(frame, sync, |p| points.push(p))?;
        if oracle {
            if sync {
                ramp_buf.iter_mut().for_each(Vec::clear);
            }
            for (c, buf) in ramp_buf.iter_mut().enumerate() {
                buf.push(match h.kind {
                    StreamKind::Complex => frame.value(2 * c).hypot(frame.value(2 * c + 1)),
                    _ => frame.value(c),
                });
            }
            for p in &points[first_new..] {
                // The first two ramps settle the dc estimate.
                if p.ramp_index < 2 || ramp_buf[p.channel].len() != ramp_len {
                    continue;
                }
                let spec = &ramps[p.channel];
                let ch = &demod_cfg.channels[p.channel];
                if let Ok(reference) = oracle_demod(
                    &ramp_buf[p.channel],
                    spec,
                    ch.window,
                    ch.trim_begin,
                    ch.trim_end,
                ) {
                    let d = wrap_phase(p.phase_rad - reference).abs();
                    worst = Some(worst.map_or(d, |w: f64| w.max(d)));
                }
            }
        }
        frame_index += 1;
    }
    let stats = demod.stats();
    let ramp_rate = demod_cfg.sample_rate_hz / ramp_len as f64;
    let (phases, _, dropped) =
        assemble_phase_stream(&points, channels, ramp_rate, ramp_len as u32)?;
    let path = dir.join("phases.flxd");
    fluxramp::formats::write_stream(create(&path)?, &phases).map_err(fmt_err(&path))?;

    let mut report = || -> io::Result<()> {
        writeln!(out, "input frames: {}", stats.frames)?;
        writeln!(out, "decimation: {}", demod_cfg.decimation())?;
        writeln!(out, "phase rate: {ramp_rate} Hz")?;
        writeln!(out, "phase points: {}", stats.points)?;
        writeln!(out, "phase frames: {}", phases.frame_count())?;
        writeln!(out, "resyncs: {}", stats.resyncs)?;
        writeln!(out, "incomplete ramps dropped: {dropped}")?;
        if oracle {
            match worst {
                Some(w) => writeln!(out, "oracle max |dphase|: {w:e} rad")?,
                None => writeln!(out, "oracle max |dphase|: n/a (fewer than three ramps)")?,
            }
        }
        writeln!(out, "wrote: {}", path.display())
    };
    report().map_err(io_err(Path::new("<stdout>")))
}

fn write_stats(out: &mut dyn Write, stats: &TriggerStats) -> io::Result<()> {
    let t = stats.total();
    writeln!(out, "phase samples in: {}", t.samples_in)?;
    writeln!(out, "samples retained: {}", t.samples_retained)?;
    writeln!(
        out,
        "retained fraction: {:.4}%",
        100.0 * stats.retained_fraction()
    )?;
    writeln!(out, "reduction: {:.4}%", 100.0 * stats.reduction())?;
    writeln!(out, "fires: {}", t.fires)?;
    writeln!(out, "events captured: {}", t.events_captured)?;
    writeln!(out, "events lost (no slot): {}", t.events_lost_no_slot)?;
    writeln!(out, "pile-ups marked: {}", t.pileups_marked)?;
    writeln!(out, "loss fraction: {:.4}%", 100.0 * stats.loss_fraction())
}

/// Triggers on a phase stream; writes `events.bin` and `trigger_stats.csv`.
pub fn cmd_trigger(
    cfg: &RunConfig,
    input: &Path,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let trig = cfg.trigger()?;
    let phases = fluxramp::formats::read_stream(open(input)?).map_err(fmt_err(input))?;
    prepare_dir(dir, cfg)?;
    let run = trigger_phase_stream(&phases, trig)?;
    let path = dir.join("events.bin");
    write_events(create(&path)?, &run.events).map_err(fmt_err(&path))?;
    let stats_path = dir.join("trigger_stats.csv");
    write_trigger_stats_csv(create(&stats_path)?, &run.stats).map_err(fmt_err(&stats_path))?;
    let mut report = || -> io::Result<()> {
        writeln!(out, "channels: {}", phases.channel_count)?;
        writeln!(out, "slots: {}", cfg.trigger.slots)?;
        write_stats(out, &run.stats)?;
        writeln!(out, "events written: {}", run.events.len())?;
        writeln!(out, "wrote: {}", path.display())
    };
    report().map_err(io_err(Path::new("<stdout>")))
}

/// Fused synth → demod → trigger run.
pub fn cmd_pipeline(
    cfg: &RunConfig,
    dir: &Path,
    throughput: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let scene = cfg.scene()?;
    let demod = cfg.demod()?;
    let trig = if cfg.trigger.enabled {
        Some(cfg.trigger()?)
    } else {
        None
    };
    prepare_dir(dir, cfg)?;
    let report = run_pipeline(&scene, &demod, trig, PipelineOptions::default())?;
    let written = match &report.phases {
        Some(phases) => {
            let path = dir.join("phases.flxd");
            fluxramp::formats::write_stream(create(&path)?, phases).map_err(fmt_err(&path))?;
            path
        }
        None => {
            let path = dir.join("events.bin");
            write_events(create(&path)?, &report.events).map_err(fmt_err(&path))?;
            if let Some(stats) = &report.trigger {
                let p = dir.join("trigger_stats.csv");
                write_trigger_stats_csv(create(&p)?, stats).map_err(fmt_err(&p))?;
            }
            path
        }
    };
    let mut text = || -> io::Result<()> {
        writeln!(out, "channels: {}", report.channels)?;
        writeln!(out, "input samples: {}", report.input_samples())?;
        writeln!(out, "decimation: {}", demod.decimation())?;
        writeln!(out, "phase frames: {}", report.phase_frames)?;
        writeln!(out, "resyncs: {}", report.demod.resyncs)?;
        match &report.trigger {
            Some(stats) => {
                write_stats(out, stats)?;
                writeln!(out, "events written: {}", report.events.len())?;
            }
            None => writeln!(out, "trigger: disabled")?,
        }
        writeln!(out, "retained samples: {}", report.retained_samples())?;
        writeln!(
            out,
            "end-to-end reduction: {:.1}",
            report.end_to_end_reduction()
        )?;
        if throughput {
            writeln!(
                out,
                "synth+demod throughput: {:.4e} samples/s",
                report.demod_throughput()
            )?;
            if report.trigger.is_some() {
                writeln!(
                    out,
                    "trigger throughput: {:.4e} samples/s",
                    report.trigger_throughput()
                )?;
            }
            writeln!(out, "wall time: {:.3} s", report.timing.wall.as_secs_f64())?;
            let realtime = report.input_frames as f64 / demod.sample_rate_hz;
            writeln!(
                out,
                "real-time factor: {:.3}",
                realtime / report.timing.wall.as_secs_f64().max(f64::MIN_POSITIVE)
            )?;
        }
        writeln!(out, "wrote: {}", written.display())
    };
    text().map_err(io_err(Path::new("<stdout>")))
}

/// Blocking for a given slot count or the slot count for a capture target,
/// followed by the blocking table.
pub fn cmd_erlang(
    cfg: &RunConfig,
    load: Option<f64>,
    slots: Option<usize>,
    table_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let t = &cfg.traffic;
    let mut model = cfg.traffic()?;
    if let Some(e) = load {
        if !(e > 0.0 && e.is_finite()) {
            return Err(CliError::Usage(format!("--load must be positive, got {e}")));
        }
        model.event_rate_hz = e / model.event_duration_s;
    }
    let e = model.offered_load();
    let text = |out: &mut dyn Write| -> Result<(), CliError> {
        let w = |r: io::Result<()>| r.map_err(io_err(Path::new("<stdout>")));
        w(writeln!(out, "offered load E: {e}"))?;
        w(writeln!(out, "channels: {}", model.active_channels))?;
        if let Some(n) = slots {
            let b = erlang_b(e, n)?;
            w(writeln!(out, "slots: {n}"))?;
            w(writeln!(out, "P_b: {b}"))?;
            w(writeln!(out, "capture: {:.4}%", 100.0 * (1.0 - b)))?;
        } else {
            let r = savings_report(&model, t.capture_target)?;
            w(writeln!(
                out,
                "capture target: {:.4}%",
                100.0 * r.capture_target
            ))?;
            w(writeln!(out, "slots needed: {}", r.slots_needed))?;
            if r.erlang_slots > r.slots_needed {
                w(writeln!(
                    out,
                    "erlang slots: {} (capped at full population)",
                    r.erlang_slots
                ))?;
            }
            w(writeln!(out, "P_b: {}", r.blocking))?;
            w(writeln!(out, "capture: {:.4}%", 100.0 * (1.0 - r.blocking)))?;
            w(writeln!(
                out,
                "memory saving: {:.2}%",
                100.0 * r.memory_saving
            ))?;
        }
        Ok(())
    };
    text(out)?;
    let max = t.max_slots.max(slots.unwrap_or(0));
    let rows = blocking_table(e, max, model.active_channels)?;
    match table_path {
        Some(p) => {
            write_blocking_csv(create(p)?, &rows).map_err(fmt_err(p))?;
            writeln!(out, "wrote: {}", p.display()).map_err(io_err(Path::new("<stdout>")))
        }
        None => {
            let csv =
                write_blocking_csv(Vec::new(), &rows).map_err(fmt_err(Path::new("<table>")))?;
            out.write_all(&csv).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

/// Monte-Carlo loss estimate next to the Erlang-B value.
pub fn cmd_mc(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let t = &cfg.traffic;
    let model: TrafficModel = cfg.traffic()?;
    let est = simulate_blocking(&model, t.n_events, cfg.seed, t.arrivals.into())?;
    let b = erlang_b(model.offered_load(), model.slot_count)?;
    let z = if est.std_error > 0.0 {
        (est.loss_fraction - b) / est.std_error
    } else {
        0.0
    };
    let mut text = || -> io::Result<()> {
        writeln!(out, "offered load E: {}", model.offered_load())?;
        writeln!(out, "slots: {}", model.slot_count)?;
        writeln!(out, "arrivals: {}", est.arrivals)?;
        writeln!(out, "slot requests: {}", est.requests)?;
        writeln!(out, "pile-ups: {}", est.pileups)?;
        writeln!(out, "losses: {}", est.losses)?;
        writeln!(
            out,
            "loss fraction: {} +- {}",
            est.loss_fraction, est.std_error
        )?;
        writeln!(out, "erlang-b: {b}")?;
        writeln!(out, "deviation: {z:.3} SE")
    };
    text().map_err(io_err(Path::new("<stdout>")))
}

/// Stream files are recognised by their magic; anything else is read as
/// an event file.
pub fn cmd_export_csv(
    input: &Path,
    path: &Path,
    columns: Option<&[String]>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    open(input)?
        .read_to_end(&mut bytes)
        .map_err(io_err(input))?;
    let w = create(path)?;
    let rows = if bytes.starts_with(&STREAM_MAGIC) {
        let s = fluxramp::formats::read_stream(&bytes[..]).map_err(fmt_err(input))?;
        write_stream_csv(w, &s, columns).map_err(|e| match e {
            FormatError::Invalid(m) => CliError::Usage(m),
            other => fmt_err(path)(other),
        })?;
        s.frame_count() * s.channel_count
    } else {
        let rep = read_events(&bytes[..]).map_err(fmt_err(input))?;
        if rep.records.is_empty() && !bytes.is_empty() {
            return Err(fmt_err(input)(FormatError::Invalid(
                "no stream header and no event records".into(),
            )));
        }
        if rep.skipped > 0 {
            writeln!(
                out,
                "skipped damaged regions: {} ({} bytes)",
                rep.skipped, rep.skipped_bytes
            )
            .map_err(io_err(Path::new("<stdout>")))?;
        }
        write_events_csv(w, &rep.records, columns).map_err(|e| match e {
            FormatError::Invalid(m) => CliError::Usage(m),
            other => fmt_err(path)(other),
        })?;
        rep.records.iter().map(|r| r.samples.len()).sum()
    };
    writeln!(out, "rows: {rows}").map_err(io_err(Path::new("<stdout>")))?;
    writeln!(out, "wrote: {}", path.display()).map_err(io_err(Path::new("<stdout>")))
}
