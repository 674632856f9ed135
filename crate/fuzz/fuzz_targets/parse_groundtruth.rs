#![no_main]

use dmtrack::scenario::{format_groundtruth, parse_groundtruth};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_groundtruth(text) {
        assert_eq!(parse_groundtruth(&format_groundtruth(&parsed)).unwrap(), parsed);
    }
});
