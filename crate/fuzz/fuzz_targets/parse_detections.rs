#![no_main]

use dmtrack::scenario::{format_detections, parse_detections};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_detections(text) {
        assert_eq!(parse_detections(&format_detections(&parsed)).unwrap(), parsed);
    }
});
