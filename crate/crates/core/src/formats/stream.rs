use std::io::{self, Read, Write};

use super::FormatError;
use crate::stream::{SampleStream, Samples, StreamKind};

pub const STREAM_MAGIC: [u8; 4] = *b"FLXD";
pub const STREAM_VERSION: u16 = 1;
/// magic 4 + version 2 + kind 1 + channels 2 + rate 8 + ramp 4 + format 1.
pub const HEADER_LEN: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum SampleFormat {
    I16 = 0,
    F64 = 1,
}

impl SampleFormat {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::I16),
            1 => Some(Self::F64),
            _ => None,
        }
    }

    pub fn width(self) -> usize {
        match self {
            Self::I16 => 2,
            Self::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamHeader {
    pub version: u16,
    pub kind: StreamKind,
    pub channel_count: u16,
    pub sample_rate_hz: f64,
    pub ramp_length: u32,
    pub sample_format: SampleFormat,
}

impl StreamHeader {
    pub fn for_stream(s: &SampleStream) -> Result<Self, FormatError> {
        let channel_count = u16::try_from(s.channel_count).map_err(|_| {
            FormatError::Header(format!("{} channels do not fit in u16", s.channel_count))
        })?;
        let h = Self {
            version: STREAM_VERSION,
            kind: s.kind,
            channel_count,
            sample_rate_hz: s.sample_rate_hz,
            ramp_length: s.ramp_length,
            sample_format: match s.samples {
                Samples::I16(_) => SampleFormat::I16,
                Samples::F64(_) => SampleFormat::F64,
            },
        };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<(), FormatError> {
        if self.channel_count == 0 {
            return Err(FormatError::Header("channel count is zero".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(FormatError::Header(format!(
                "sample rate {} is not positive",
                self.sample_rate_hz
            )));
        }
        Ok(())
    }

    pub fn values_per_frame(&self) -> usize {
        self.channel_count as usize * self.kind.values_per_channel()
    }

    pub fn frame_bytes(&self) -> usize {
        self.values_per_frame() * self.sample_format.width()
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&STREAM_MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.kind as u8;
        b[7..9].copy_from_slice(&self.channel_count.to_le_bytes());
        b[9..17].copy_from_slice(&self.sample_rate_hz.to_le_bytes());
        b[17..21].copy_from_slice(&self.ramp_length.to_le_bytes());
        b[21] = self.sample_format as u8;
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        if b[0..4] != STREAM_MAGIC {
            return Err(FormatError::Magic {
                found: b[0..4].to_vec(),
            });
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != STREAM_VERSION {
            return Err(FormatError::Version(version));
        }
        let kind = StreamKind::from_code(b[6])
            .ok_or_else(|| FormatError::Header(format!("unknown kind {}", b[6])))?;
        let sample_format = SampleFormat::from_code(b[21])
            .ok_or_else(|| FormatError::Header(format!("unknown sample format {}", b[21])))?;
        let h = Self {
            version,
            kind,
            channel_count: u16::from_le_bytes([b[7], b[8]]),
            sample_rate_hz: f64::from_le_bytes(b[9..17].try_into().expect("8 bytes")),
            ramp_length: u32::from_le_bytes(b[17..21].try_into().expect("4 bytes")),
            sample_format,
        };
        h.validate()?;
        Ok(h)
    }
}

/// Frame-at-a-time writer.
pub struct StreamWriter<W: Write> {
    inner: W,
    header: StreamHeader,
    buf: Vec<u8>,
}

impl<W: Write> StreamWriter<W> {
    pub fn new(mut inner: W, header: StreamHeader) -> Result<Self, FormatError> {
        header.validate()?;
        inner.write_all(&header.to_bytes())?;
        Ok(Self {
            inner,
            header,
            buf: Vec::with_capacity(header.frame_bytes()),
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    fn check_len(&self, n: usize) -> Result<(), FormatError> {
        if n == self.header.values_per_frame() {
            Ok(())
        } else {
            Err(FormatError::Invalid(format!(
                "frame holds {n} values, header expects {}",
                self.header.values_per_frame()
            )))
        }
    }

    pub fn write_frame_f64(&mut self, values: &[f64]) -> Result<(), FormatError> {
        self.check_len(values.len())?;
        self.buf.clear();
        match self.header.sample_format {
            SampleFormat::F64 => values
                .iter()
                .for_each(|v| self.buf.extend_from_slice(&v.to_le_bytes())),
            SampleFormat::I16 => values.iter().for_each(|&v| {
                self.buf
                    .extend_from_slice(&crate::quantize(v).to_le_bytes())
            }),
        }
        self.inner.write_all(&self.buf)?;
        Ok(())
    }

    pub fn write_frame_i16(&mut self, values: &[i16]) -> Result<(), FormatError> {
        self.check_len(values.len())?;
        if self.header.sample_format != SampleFormat::I16 {
            return Err(FormatError::Invalid(
                "integer frame written to a float stream".into(),
            ));
        }
        self.buf.clear();
        values
            .iter()
            .for_each(|v| self.buf.extend_from_slice(&v.to_le_bytes()));
        self.inner.write_all(&self.buf)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, FormatError> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// One decoded frame.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameBuf {
    I16(Vec<i16>),
    F64(Vec<f64>),
}

/// Frame-at-a-time reader. Truncation inside a frame is reported with the
/// byte offset at which that frame starts.
pub struct StreamReader<R: Read> {
    inner: R,
    header: StreamHeader,
    frame: u64,
    buf: Vec<u8>,
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(got)
}

impl<R: Read> StreamReader<R> {
    pub fn new(mut inner: R) -> Result<Self, FormatError> {
        let mut hb = [0u8; HEADER_LEN];
        let got = read_full(&mut inner, &mut hb)?;
        if got < HEADER_LEN {
            if got >= 4 && hb[0..4] != STREAM_MAGIC {
                return Err(FormatError::Magic {
                    found: hb[0..4].to_vec(),
                });
            }
            return Err(FormatError::Header(format!(
                "header is {got} of {HEADER_LEN} bytes"
            )));
        }
        let header = StreamHeader::from_bytes(&hb)?;
        Ok(Self {
            inner,
            buf: vec![0; header.frame_bytes()],
            header,
            frame: 0,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn frames_read(&self) -> u64 {
        self.frame
    }

    fn next_raw(&mut self) -> Result<bool, FormatError> {
        let got = read_full(&mut self.inner, &mut self.buf)?;
        if got == 0 {
            return Ok(false);
        }
        if got < self.buf.len() {
            return Err(FormatError::Truncated {
                frame: self.frame,
                offset: HEADER_LEN as u64 + self.frame * self.buf.len() as u64,
                available: got,
                needed: self.buf.len(),
            });
        }
        self.frame += 1;
        Ok(true)
    }

    pub fn next_frame(&mut self) -> Result<Option<FrameBuf>, FormatError> {
        if !self.next_raw()? {
            return Ok(None);
        }
        Ok(Some(match self.header.sample_format {
            SampleFormat::I16 => FrameBuf::I16(
                self.buf
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]))
                    .collect(),
            ),
            SampleFormat::F64 => FrameBuf::F64(
                self.buf
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            ),
        }))
    }

    /// Appends the next frame's values to `out`, keeping allocation flat.
    pub fn next_frame_into(&mut self, out: &mut Samples) -> Result<bool, FormatError> {
        if !self.next_raw()? {
            return Ok(false);
        }
        match (self.header.sample_format, out) {
            (SampleFormat::I16, Samples::I16(v)) => v.extend(
                self.buf
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]])),
            ),
            (SampleFormat::F64, Samples::F64(v)) => v.extend(
                self.buf
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))),
            ),
            _ => {
                return Err(FormatError::Invalid(
                    "sample buffer does not match stream format".into(),
                ))
            }
        }
        Ok(true)
    }
}

pub fn write_stream<W: Write>(w: W, stream: &SampleStream) -> Result<W, FormatError> {
    let header = StreamHeader::for_stream(stream)?;
    if stream.samples.len() % header.values_per_frame() != 0 {
        return Err(FormatError::Invalid(
            "sample count is not a whole number of frames".into(),
        ));
    }
    let mut wr = StreamWriter::new(w, header)?;
    match &stream.samples {
        Samples::I16(v) => {
            for f in v.chunks_exact(header.values_per_frame()) {
                wr.write_frame_i16(f)?;
            }
        }
        Samples::F64(v) => {
            for f in v.chunks_exact(header.values_per_frame()) {
                wr.write_frame_f64(f)?;
            }
        }
    }
    wr.finish()
}

pub fn read_stream<R: Read>(r: R) -> Result<SampleStream, FormatError> {
    let mut rd = StreamReader::new(r)?;
    let h = *rd.header();
    let mut samples = match h.sample_format {
        SampleFormat::I16 => Samples::I16(Vec::new()),
        SampleFormat::F64 => Samples::F64(Vec::new()),
    };
    while rd.next_frame_into(&mut samples)? {}
    Ok(SampleStream::new(
        h.kind,
        h.channel_count as usize,
        h.sample_rate_hz,
        h.ramp_length,
        samples,
    ))
}
