//! Replays the checked-in fuzz corpus through the same checks the fuzz
//! targets make, so the seeds stay valid as the formats evolve.

use std::path::PathBuf;

use dmtrack::netsim::{decode_message, encode_message};
use dmtrack::scenario::{
    format_detections, format_features, format_groundtruth, format_tracks, parse_detections,
    parse_features, parse_groundtruth, parse_tracks, ReidSpec, WorldSpec,
};
use dmtrack::RunConfig;

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).expect("seeds are utf-8")
}

#[test]
fn message_seeds_decode_canonically() {
    for (name, data) in corpus("decode_message") {
        let [b, n, msg @ ..] = data.as_slice() else { panic!("{name}: too short") };
        let m = decode_message(msg, 1 + *b as usize % 8, 1 + *n as usize % 16)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(encode_message(&m).unwrap(), msg, "{name}");
    }
}

#[test]
fn text_seeds_parse_and_round_trip() {
    for (name, data) in corpus("parse_detections") {
        let d = parse_detections(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_detections(&format_detections(&d)).unwrap(), d, "{name}");
    }
    for (name, data) in corpus("parse_groundtruth") {
        let g = parse_groundtruth(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_groundtruth(&format_groundtruth(&g)).unwrap(), g, "{name}");
    }
    for (name, data) in corpus("parse_tracks") {
        let t = parse_tracks(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_tracks(&format_tracks(&t)).unwrap(), t, "{name}");
    }
    for (name, data) in corpus("parse_features") {
        let f = parse_features(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let n_f = f.first().map_or(1, |x| x.feature.len());
        assert_eq!(parse_features(&format_features(n_f, &f)).unwrap(), f, "{name}");
    }
}

#[test]
fn config_seeds_parse_as_exactly_one_kind() {
    for (name, data) in corpus("config_files") {
        let t = text(&data);
        let kinds = [
            RunConfig::from_toml(t).is_ok(),
            ReidSpec::from_toml(t).is_ok(),
            WorldSpec::from_toml(t).is_ok(),
        ];
        let expected = usize::from(!name.starts_with("invalid"));
        assert_eq!(kinds.iter().filter(|k| **k).count(), expected, "{name}: {kinds:?}");
    }
}
