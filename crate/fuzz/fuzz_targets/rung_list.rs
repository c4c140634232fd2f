#![no_main]

use jcdyn_cli::args::{parse_rungs, MAX_RUNG};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_rungs(text) {
        assert!(!r.0.is_empty());
        assert!(r.0.windows(2).all(|w| w[0] < w[1]));
        assert!(r.0.iter().all(|&n| (1..=MAX_RUNG).contains(&n)));
    }
});
