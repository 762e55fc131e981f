#![no_main]

use fluxramp::formats::{StreamHeader, HEADER_LEN};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(bytes) = <[u8; HEADER_LEN]>::try_from(data) else {
        return;
    };
    if let Ok(h) = StreamHeader::from_bytes(&bytes) {
        assert!(h.values_per_frame() > 0);
        assert_eq!(h.to_bytes(), bytes);
    }
});
