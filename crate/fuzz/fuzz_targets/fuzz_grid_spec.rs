//! Fuzzes the compact grid-specification parser and checks its contract on
//! every accepted input: bounded size, exact endpoints, nondecreasing,
//! all points finite and inside the requested range.

#![no_main]

use libfuzzer_sys::fuzz_target;
use trotterlab::config::{parse_grid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else { return };
    if let Ok(points) = parse_grid(spec) {
        assert!(points.len() >= 2);
        assert!(points.len() <= MAX_GRID_POINTS);
        let lo = points[0];
        let hi = *points.last().expect("nonempty");
        assert!(lo.is_finite() && hi.is_finite() && lo < hi, "{spec}: [{lo}, {hi}]");
        assert!(
            points.windows(2).all(|w| w[0] <= w[1]),
            "{spec}: grid not nondecreasing"
        );
        assert!(points.iter().all(|p| (lo..=hi).contains(p)));
    }
});
