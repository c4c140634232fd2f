#![no_main]

use jcdyn_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        // an accepted config survives its own resolved form unchanged
        let again = RunConfig::from_json(&cfg.resolved_json()).expect("resolved config is valid");
        assert_eq!(cfg.hash(), again.hash());
        let t = cfg.sweep.temperatures();
        assert_eq!(t.len(), cfg.sweep.steps);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }
});
