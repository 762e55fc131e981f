//! CSV export. Columns come out in a fixed order; floats use the shortest
//! decimal that parses back to the same value.

use std::io::Write;

use super::FormatError;
use crate::demod::PhasePoint;
use crate::queueing::BlockingRow;
use crate::sigmodel::{SceneTruth, TrueEvent};
use crate::stream::{SampleStream, Samples, StreamKind};
use crate::trigger::{ChannelStats, EventPacket, TriggerStats};

pub const PHASE_COLUMNS: [&str; 3] = ["channel", "ramp_index", "phase_rad"];
pub const EVENT_COLUMNS: [&str; 7] = [
    "event_id",
    "channel",
    "timestamp",
    "trigger_value",
    "pileup",
    "sample_index",
    "phase_rad",
];
pub const TRUE_EVENT_COLUMNS: [&str; 3] = ["channel", "time_s", "amplitude_rad"];
pub const STATS_COLUMNS: [&str; 8] = [
    "channel",
    "fires",
    "events_captured",
    "events_lost_no_slot",
    "pileups_marked",
    "events_completed",
    "samples_in",
    "samples_retained",
];
pub const BLOCKING_COLUMNS: [&str; 5] = ["E", "N", "P_b", "capture", "memory_saving"];

pub fn stream_columns(kind: StreamKind) -> &'static [&'static str] {
    match kind {
        StreamKind::Real => &["frame", "channel", "value"],
        StreamKind::Complex => &["frame", "channel", "i", "q"],
        StreamKind::Phase => &PHASE_COLUMNS,
    }
}

/// Row sink that applies a column selection.
struct Table<W: Write> {
    out: W,
    picks: Vec<usize>,
    row: Vec<String>,
}

impl<W: Write> Table<W> {
    fn new(mut out: W, all: &[&str], select: Option<&[String]>) -> Result<Self, FormatError> {
        let picks = match select {
            None => (0..all.len()).collect(),
            Some(names) => names
                .iter()
                .map(|n| {
                    all.iter().position(|c| c == n).ok_or_else(|| {
                        FormatError::Invalid(format!(
                            "unknown column {n:?}; available: {}",
                            all.join(",")
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let head: Vec<&str> = picks.iter().map(|&i| all[i]).collect();
        writeln!(out, "{}", head.join(","))?;
        Ok(Self {
            out,
            picks,
            row: Vec::with_capacity(all.len()),
        })
    }

    fn cell(&mut self, v: impl ToString) -> &mut Self {
        self.row.push(v.to_string());
        self
    }

    fn end(&mut self) -> Result<(), FormatError> {
        let mut first = true;
        for &i in &self.picks {
            if !first {
                self.out.write_all(b",")?;
            }
            first = false;
            self.out.write_all(self.row[i].as_bytes())?;
        }
        self.out.write_all(b"\n")?;
        self.row.clear();
        Ok(())
    }

    fn finish(mut self) -> Result<W, FormatError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// One row per channel per frame. Phase streams are written as
/// (channel, ramp_index, phase_rad) with the frame number as ramp index.
pub fn write_stream_csv<W: Write>(
    w: W,
    s: &SampleStream,
    select: Option<&[String]>,
) -> Result<W, FormatError> {
    let mut t = Table::new(w, stream_columns(s.kind), select)?;
    let per = s.kind.values_per_channel();
    for f in 0..s.frame_count() {
        let frame = s.frame(f);
        for c in 0..s.channel_count {
            if s.kind == StreamKind::Phase {
                t.cell(c).cell(f);
            } else {
                t.cell(f).cell(c);
            }
            for k in 0..per {
                let idx = c * per + k;
                match &s.samples {
                    Samples::I16(_) => t.cell(frame.code(idx)),
                    Samples::F64(_) => t.cell(frame.value(idx)),
                };
            }
            t.end()?;
        }
    }
    t.finish()
}

pub fn write_phase_points_csv<W: Write>(
    w: W,
    points: &[PhasePoint],
    select: Option<&[String]>,
) -> Result<W, FormatError> {
    let mut t = Table::new(w, &PHASE_COLUMNS, select)?;
    for p in points {
        t.cell(p.channel)
            .cell(p.ramp_index)
            .cell(p.phase_rad)
            .end()?;
    }
    t.finish()
}

/// One row per captured sample; `sample_index` counts from the first
/// pre-trigger sample.
pub fn write_events_csv<W: Write>(
    w: W,
    events: &[EventPacket],
    select: Option<&[String]>,
) -> Result<W, FormatError> {
    let mut t = Table::new(w, &EVENT_COLUMNS, select)?;
    for (id, e) in events.iter().enumerate() {
        for (k, &x) in e.samples.iter().enumerate() {
            t.cell(id)
                .cell(e.channel)
                .cell(e.timestamp)
                .cell(e.trigger_value)
                .cell(u8::from(e.pileup))
                .cell(k)
                .cell(x)
                .end()?;
        }
    }
    t.finish()
}

pub fn write_truth_phases_csv<W: Write>(w: W, truth: &SceneTruth) -> Result<W, FormatError> {
    let mut t = Table::new(w, &PHASE_COLUMNS, None)?;
    let ramps = truth.phases.iter().map(Vec::len).max().unwrap_or(0);
    for r in 0..ramps {
        for (c, ph) in truth.phases.iter().enumerate() {
            if let Some(&p) = ph.get(r) {
                t.cell(c).cell(r).cell(p).end()?;
            }
        }
    }
    t.finish()
}

pub fn write_truth_events_csv<W: Write>(w: W, events: &[TrueEvent]) -> Result<W, FormatError> {
    let mut t = Table::new(w, &TRUE_EVENT_COLUMNS, None)?;
    for e in events {
        t.cell(e.channel)
            .cell(e.time_s)
            .cell(e.amplitude_rad)
            .end()?;
    }
    t.finish()
}

/// Per-channel counters followed by a `total` row.
pub fn write_trigger_stats_csv<W: Write>(w: W, stats: &TriggerStats) -> Result<W, FormatError> {
    let mut t = Table::new(w, &STATS_COLUMNS, None)?;
    let row = |t: &mut Table<W>, name: String, s: &ChannelStats| {
        t.cell(name)
            .cell(s.fires)
            .cell(s.events_captured)
            .cell(s.events_lost_no_slot)
            .cell(s.pileups_marked)
            .cell(s.events_completed)
            .cell(s.samples_in)
            .cell(s.samples_retained)
            .end()
    };
    for (c, s) in stats.channels.iter().enumerate() {
        row(&mut t, c.to_string(), s)?;
    }
    row(&mut t, "total".into(), &stats.total())?;
    t.finish()
}

pub fn write_blocking_csv<W: Write>(w: W, rows: &[BlockingRow]) -> Result<W, FormatError> {
    let mut t = Table::new(w, &BLOCKING_COLUMNS, None)?;
    for r in rows {
        t.cell(r.offered_load)
            .cell(r.slots)
            .cell(r.blocking)
            .cell(r.capture)
            .cell(r.memory_saving)
            .end()?;
    }
    t.finish()
}
