use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dmtrack::metrics::{clear_mot, gallery_vectors, rank1, split_features, GalleryMode};
use dmtrack::netsim::System;
use dmtrack::scenario::{
    eval_frames, generate, load_detections, load_features, load_groundtruth, load_tracks,
    reid_features, write_detections, write_features, write_groundtruth, write_tracks, HypLabel,
    ReidSpec, WorldSpec,
};
use dmtrack::{Error, Result, RunConfig};
use serde_json::{json, Value};

use crate::Mode;

pub const DETECTIONS_FILE: &str = "detections.csv";
pub const GROUNDTRUTH_FILE: &str = "groundtruth.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const TRACKS_FILE: &str = "tracks.csv";
pub const REPORTS_FILE: &str = "reports.jsonl";
pub const MESSAGES_DIR: &str = "messages";

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// `path` itself, or `path/name` when `path` is a directory.
fn resolve(path: &Path, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path.to_path_buf()
    }
}

fn to_json(v: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::InvalidConfig(format!("unserializable record: {e}")))
}

pub fn simulate(spec: &Path, frames: u32, seed: u64, out: &Path, reid: bool) -> Result<String> {
    let text = read(spec)?;
    create_dir(out)?;
    if reid {
        let spec = ReidSpec::from_toml(&text)?;
        let (gallery, queries) = reid_features(&spec, seed)?;
        let all: Vec<_> = gallery.into_iter().chain(queries).collect();
        let path = out.join(FEATURES_FILE);
        write_features(&path, spec.n_f, &all)?;
        return Ok(format!("wrote {} features to {}\n", all.len(), path.display()));
    }
    let spec = WorldSpec::from_toml(&text)?;
    let (dets, gt) = generate(&spec, frames, seed)?;
    write_detections(out.join(DETECTIONS_FILE), &dets)?;
    write_groundtruth(out.join(GROUNDTRUTH_FILE), &gt)?;
    Ok(format!(
        "wrote {} detections and {} ground-truth boxes over {} frames to {}\n",
        dets.detections.len(),
        gt.rows.len(),
        frames,
        out.display()
    ))
}

pub fn track(
    detections: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    timing: bool,
) -> Result<String> {
    let input = load_detections(resolve(detections, DETECTIONS_FILE))?;
    let mut cfg = match config {
        Some(p) => RunConfig::from_toml(&read(p)?)?,
        None => RunConfig {
            n_f: input.n_f,
            ..Default::default()
        },
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    log::info!(
        "tracking {} detections from {} sensors, batch length {}",
        input.detections.len(),
        input.sensors.len(),
        cfg.batch_len
    );
    let output = System::new(cfg).with_timing(timing).run(&input)?;

    create_dir(out)?;
    write_tracks(out.join(TRACKS_FILE), &output.tracks)?;
    let mut jsonl = String::new();
    for r in &output.reports {
        jsonl.push_str(&to_json(r)?);
        jsonl.push('\n');
    }
    write(&out.join(REPORTS_FILE), jsonl.as_bytes())?;
    let messages = out.join(MESSAGES_DIR);
    create_dir(&messages)?;
    for m in &output.messages {
        let name = format!("batch{:05}_sensor{}.bin", m.batch_index, m.sensor_id);
        write(&messages.join(name), &m.bytes)?;
    }
    let bytes: usize = output.reports.iter().map(|r| r.total_bytes).sum();
    let mut ids: Vec<u64> = output.tracks.iter().map(|t| t.global_id.0).collect();
    ids.sort_unstable();
    ids.dedup();
    Ok(format!(
        "{} track rows, {} global identities, {} batches, {} bytes exchanged; wrote {}\n",
        output.tracks.len(),
        ids.len(),
        output.reports.len(),
        bytes,
        out.display()
    ))
}

pub fn reid_eval(features: &Path, bins: usize, mode: Mode, seed: u64, query_fraction: f64) -> Result<String> {
    if bins == 0 {
        return Err(Error::InvalidConfig("bins must be ≥ 1".into()));
    }
    let feats = load_features(features)?;
    let (gallery, queries) = split_features(&feats, query_fraction, seed)?;
    let (mode, name) = match mode {
        Mode::Full => (GalleryMode::Full, "full"),
        Mode::Average => (GalleryMode::Average, "average"),
        Mode::Random => (GalleryMode::RandomBins { bins, seed }, "random"),
        Mode::OrientationBins => (GalleryMode::OrientationBins(bins), "orientation_bins"),
    };
    let accuracy = rank1(&gallery, &queries, mode)?;
    let stored = gallery_vectors(&gallery, mode)?;
    let record = json!({
        "mode": name,
        "bins": bins,
        "seed": seed,
        "rank1": accuracy,
        "gallery_features": stored,
        "gallery_records": gallery.len(),
        "queries": queries.len(),
    });
    Ok(format!("{record}\n"))
}

pub fn evaluate(tracks: &Path, gt: &Path, iou: f64) -> Result<String> {
    if !(iou > 0.0 && iou <= 1.0) {
        return Err(Error::InvalidConfig(format!("iou must be in (0, 1], got {iou}")));
    }
    let rows = load_tracks(resolve(tracks, TRACKS_FILE))?;
    let truth = load_groundtruth(resolve(gt, GROUNDTRUTH_FILE))?;
    let score = clear_mot(&eval_frames(&truth, &rows, HypLabel::Global), iou);
    Ok(format!("{}\n", to_json(&score)?))
}

fn field(v: &Value, key: &str) -> Result<u64> {
    v.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::InvalidConfig(format!("report lacks numeric field {key}")))
}

pub fn report(run: &Path) -> Result<String> {
    let path = resolve(run, REPORTS_FILE);
    let text = read(&path)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>7} {:>7} {:>7} {:>8} {:>10} {:>12}",
        "batch", "start", "end", "tracks", "matches", "bytes", "full-feats"
    );
    let (mut batches, mut total) = (0u64, 0u64);
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let sensors = v.get("sensors").and_then(Value::as_array).cloned().unwrap_or_default();
        let sum = |key: &str| -> Result<u64> { sensors.iter().map(|s| field(s, key)).sum() };
        let matches = v.get("matches").and_then(Value::as_array).map_or(0, Vec::len);
        let bytes = field(&v, "total_bytes")?;
        let _ = writeln!(
            out,
            "{:>6} {:>7} {:>7} {:>7} {:>8} {:>10} {:>12}",
            field(&v, "batch_index")?,
            field(&v, "frame_start")?,
            field(&v, "frame_end")?,
            sum("active_tracks")?,
            matches,
            bytes,
            sum("full_gallery_features")?
        );
        batches += 1;
        total += bytes;
    }
    let mean = if batches == 0 { 0.0 } else { total as f64 / batches as f64 };
    let _ = writeln!(out, "{batches} batches, {total} bytes total, {mean:.1} bytes per batch");
    Ok(out)
}
