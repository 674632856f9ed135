#![no_main]

use dmtrack::scenario::{format_features, parse_features};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_features(text) {
        let n_f = parsed.first().map_or(1, |f| f.feature.len());
        assert_eq!(parse_features(&format_features(n_f, &parsed)).unwrap(), parsed);
    }
});
