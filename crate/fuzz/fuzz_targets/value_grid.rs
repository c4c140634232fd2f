#![no_main]

use jcdyn_cli::args::{parse_grid, MAX_GRID};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_grid(text) {
        assert!(g.count >= 1 && g.count <= MAX_GRID);
        let v = g.values();
        assert_eq!(v.len(), g.count);
        assert_eq!(v[0], g.start);
        assert_eq!(*v.last().unwrap(), g.stop);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
});
