//! Fuzzes the experiment config decoder: TOML parse plus the full
//! validation, normalization, and hashing pipeline behind it. Nothing here
//! executes a run; the target hunts for panics and non-termination in the
//! pure config path.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ocucb::config::FileConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = FileConfig::parse(text) else {
        return;
    };
    let _ = config.resolved_checks();
    let _ = config.experiment();
    if config.validate().is_ok() {
        // Valid configs must normalize, serialize, re-parse, and keep a
        // stable hash through the cycle.
        let normalized = config.normalized().expect("valid config normalizes");
        let text = normalized.to_toml_string().expect("normalized config serializes");
        let reparsed = FileConfig::parse(&text).expect("normalized config re-parses");
        assert_eq!(
            reparsed.hash().expect("hash"),
            config.hash().expect("hash"),
            "hash must be invariant under normalize + serialize + parse"
        );
    }
});
