#![no_main]

use dmtrack::scenario::{format_tracks, parse_tracks};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_tracks(text) {
        assert_eq!(parse_tracks(&format_tracks(&parsed)).unwrap(), parsed);
    }
});
