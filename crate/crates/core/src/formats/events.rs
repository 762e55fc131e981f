use std::io::{Read, Write};

use super::FormatError;
use crate::trigger::EventPacket;

pub const EVENT_MAGIC: [u8; 2] = *b"EV";
/// magic 2 + channel 2 + timestamp 8 + trigger value 8 + flags 1 + length 4.
pub const EVENT_HEADER_LEN: usize = 25;
const FLAG_PILEUP: u8 = 1;

fn encode(p: &EventPacket, out: &mut Vec<u8>) -> Result<(), FormatError> {
    let channel = u16::try_from(p.channel)
        .map_err(|_| FormatError::Invalid(format!("channel {} does not fit in u16", p.channel)))?;
    let length = u32::try_from(p.samples.len()).map_err(|_| {
        FormatError::Invalid(format!("event of {} samples is too long", p.samples.len()))
    })?;
    out.extend_from_slice(&EVENT_MAGIC);
    out.extend_from_slice(&channel.to_le_bytes());
    out.extend_from_slice(&p.timestamp.to_le_bytes());
    out.extend_from_slice(&p.trigger_value.to_le_bytes());
    out.push(if p.pileup { FLAG_PILEUP } else { 0 });
    out.extend_from_slice(&length.to_le_bytes());
    for s in &p.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(())
}

/// Parses one record at the start of `b`, returning it and its byte length.
fn decode(b: &[u8]) -> Option<(EventPacket, usize)> {
    if b.len() < EVENT_HEADER_LEN || b[0..2] != EVENT_MAGIC {
        return None;
    }
    let flags = b[20];
    if flags & !FLAG_PILEUP != 0 {
        return None;
    }
    let length = u32::from_le_bytes(b[21..25].try_into().ok()?) as usize;
    let total = length.checked_mul(8)?.checked_add(EVENT_HEADER_LEN)?;
    if b.len() < total {
        return None;
    }
    let samples = b[EVENT_HEADER_LEN..total]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Some((
        EventPacket {
            channel: u16::from_le_bytes([b[2], b[3]]) as usize,
            timestamp: u64::from_le_bytes(b[4..12].try_into().ok()?),
            trigger_value: f64::from_le_bytes(b[12..20].try_into().ok()?),
            pileup: flags & FLAG_PILEUP != 0,
            samples,
        },
        total,
    ))
}

/// Appends event records to a byte sink.
pub struct EventWriter<W: Write> {
    inner: W,
    buf: Vec<u8>,
    written: u64,
}

impl<W: Write> EventWriter<W> {
    pub fn new(inner: W) -> Self {
        Self {
            inner,
            buf: Vec::new(),
            written: 0,
        }
    }

    pub fn write(&mut self, p: &EventPacket) -> Result<(), FormatError> {
        self.buf.clear();
        encode(p, &mut self.buf)?;
        self.inner.write_all(&self.buf)?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> Result<W, FormatError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn write_events<W: Write>(w: W, events: &[EventPacket]) -> Result<W, FormatError> {
    let mut wr = EventWriter::new(w);
    for e in events {
        wr.write(e)?;
    }
    wr.finish()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventReadReport {
    pub records: Vec<EventPacket>,
    /// Damaged regions skipped while resynchronizing on the record magic.
    pub skipped: u64,
    pub skipped_bytes: u64,
}

/// Reads every intact record. A damaged record is skipped by scanning for
/// the next `EV` marker; each contiguous damaged region counts once.
pub fn read_events<R: Read>(mut r: R) -> Result<EventReadReport, FormatError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut rep = EventReadReport::default();
    let mut pos = 0;
    let mut in_skip = false;
    while pos < buf.len() {
        // While resynchronizing, a record only counts if the next one (or
        // EOF) follows it directly; this rejects `EV` byte pairs that happen
        // to sit inside sample data.
        let candidate = decode(&buf[pos..]).filter(|(_, used)| {
            let end = pos + used;
            !in_skip || end == buf.len() || buf[end..].starts_with(&EVENT_MAGIC)
        });
        if let Some((rec, used)) = candidate {
            rep.records.push(rec);
            pos += used;
            in_skip = false;
            continue;
        }
        if !in_skip {
            rep.skipped += 1;
            in_skip = true;
        }
        let next = buf[pos + 1..]
            .windows(2)
            .position(|w| w == EVENT_MAGIC)
            .map_or(buf.len(), |i| pos + 1 + i);
        rep.skipped_bytes += (next - pos) as u64;
        pos = next;
    }
    Ok(rep)
}
