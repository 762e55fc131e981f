#![no_main]

use fluxramp::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    // Resolution may reject values but must not panic.
    let _ = cfg.scene();
    let _ = cfg.demod();
    let _ = cfg.trigger();
    let _ = cfg.traffic();
    // NaN fields make direct equality useless; compare the echoed text.
    let echoed = cfg.echo();
    let back = RunConfig::parse(&echoed).expect("echo parses");
    assert_eq!(back.echo(), echoed);
});
