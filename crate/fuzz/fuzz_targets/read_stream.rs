//! Whole-file and frame-at-a-time stream decoding must agree, and anything
//! that decodes must re-encode to the same bytes.

#![no_main]

use fluxramp::formats::{read_stream, write_stream, StreamReader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let whole = read_stream(data);
    let mut frames = 0usize;
    let streamed = StreamReader::new(data).and_then(|mut r| {
        while r.next_frame()?.is_some() {
            frames += 1;
        }
        Ok(())
    });
    assert_eq!(whole.is_ok(), streamed.is_ok());
    if let Ok(s) = whole {
        assert_eq!(s.frame_count(), frames);
        let bytes = write_stream(Vec::new(), &s).expect("decoded stream re-encodes");
        assert_eq!(bytes, data);
    }
});
