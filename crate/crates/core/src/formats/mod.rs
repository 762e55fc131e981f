//! File formats: TDM sample/phase streams, event records and CSV export.
//!
//! All binary fields are little-endian. See `docs/formats.md` for the byte
//! layout.

pub mod csv;
mod events;
mod stream;

use std::io;

use thiserror::Error;

pub use events::{
    read_events, write_events, EventReadReport, EventWriter, EVENT_HEADER_LEN, EVENT_MAGIC,
};
pub use stream::{
    read_stream, write_stream, FrameBuf, SampleFormat, StreamHeader, StreamReader, StreamWriter,
    HEADER_LEN, STREAM_MAGIC, STREAM_VERSION,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {found:02x?}")]
    Magic { found: Vec<u8> },
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("invalid header: {0}")]
    Header(String),
    #[error(
        "truncated frame {frame} at byte offset {offset}: {available} of {needed} bytes present"
    )]
    Truncated {
        frame: u64,
        offset: u64,
        available: usize,
        needed: usize,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
