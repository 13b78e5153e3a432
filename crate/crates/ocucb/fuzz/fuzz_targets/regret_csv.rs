//! Fuzzes the regret CSV decoder through the same in-memory entry point
//! the file reader delegates to.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ocucb::report;

fuzz_target!(|data: &[u8]| {
    let _ = report::parse_regret_csv(data, "fuzz-input");
});
