//! Fuzzes the full experiment-document decoder: arbitrary bytes in, either
//! a validated configuration or a typed error out — never a panic.

#![no_main]

use libfuzzer_sys::fuzz_target;
use trotterlab::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_config(text) {
        // A document that validated must answer the cheap derived queries
        // without panicking. (Model building is exercised elsewhere; it
        // allocates dense matrices and would drown the fuzzer.)
        let name = config.artifact_name();
        assert!(!name.is_empty());
        let _ = config.format();
        let _ = config.sweep_times();
    }
});
