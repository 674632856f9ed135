#![no_main]

use dmtrack::scenario::{ReidSpec, WorldSpec};
use dmtrack::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = RunConfig::from_toml(text);
    let _ = ReidSpec::from_toml(text);
    if let Ok(spec) = WorldSpec::from_toml(text) {
        assert_eq!(WorldSpec::from_toml(&spec.to_toml()).unwrap(), spec);
    }
});
