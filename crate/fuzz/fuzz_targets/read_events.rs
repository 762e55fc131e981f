//! The event reader recovers from arbitrary damage; every record it returns
//! must survive a write/read round trip.

#![no_main]

use fluxramp::formats::{read_events, write_events};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rep) = read_events(data) else {
        return;
    };
    assert!(rep.skipped_bytes as usize <= data.len());
    let bytes = write_events(Vec::new(), &rep.records).expect("in-memory write");
    let again = read_events(&bytes[..]).expect("in-memory read");
    assert_eq!(again.skipped, 0);
    assert_eq!(again.records.len(), rep.records.len());
    if rep.skipped == 0 {
        assert_eq!(bytes, data);
    }
});
