//! Fuzzes the `--envelopes` specification grammar, and when a spec parses,
//! evaluates the envelope curves it describes on a small checkpoint grid
//! (the numeric path behind the plot overlay).

#![no_main]

use libfuzzer_sys::fuzz_target;
use ocucb::plot::{envelope_series, EnvelopeSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = EnvelopeSpec::parse(text) {
        let _ = envelope_series(&spec, &[2, 10, 1000]);
    }
});
