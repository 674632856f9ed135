//! Text formats for detections, ground truth, tracker output and re-id features.
//!
//! Each file starts with a `#dmtrack-<kind>` header line of `key=value` tokens;
//! records are comma-separated base-10 numbers, one per line. Blank lines and
//! later `#` lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use super::{GroundTruth, GroundTruthRow};
use crate::error::{Error, Result};
use crate::metrics::{EvalFrame, LabeledFeature};
use crate::netsim::TrackRow;
use crate::types::{BBox, Detection, DetectionSet, GlobalId, Keypoint, TorsoKeypoints};

const DETECTIONS: &str = "#dmtrack-detections";
const GROUNDTRUTH: &str = "#dmtrack-groundtruth";
const TRACKS: &str = "#dmtrack-tracks";
const FEATURES: &str = "#dmtrack-features";
const MAX_N_F: usize = 1 << 20;

fn join_u32(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn format_detections(set: &DetectionSet) -> String {
    let mut out = format!(
        "{DETECTIONS} n_f={} frames={} sensors={}\n",
        set.n_f,
        set.frames,
        join_u32(&set.sensors)
    );
    for d in &set.detections {
        let b = &d.bbox;
        let _ = write!(out, "{},{},{},{},{},{}", d.sensor_id, d.frame, b.x, b.y, b.w, b.h);
        for v in &d.embedding {
            let _ = write!(out, ",{v}");
        }
        for k in d.keypoints.as_array() {
            let _ = write!(out, ",{},{},{}", k.x, k.y, k.c);
        }
        if let Some(g) = d.gt_id {
            let _ = write!(out, ",{g}");
        }
        out.push('\n');
    }
    out
}

pub fn format_groundtruth(gt: &GroundTruth) -> String {
    let mut out = format!(
        "{GROUNDTRUTH} frames={} sensors={}\n",
        gt.frames,
        join_u32(&gt.sensors)
    );
    for r in &gt.rows {
        let b = &r.bbox;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sensor_id, r.frame, r.gt_id, b.x, b.y, b.w, b.h, r.heading
        );
    }
    out
}

pub fn format_tracks(rows: &[TrackRow]) -> String {
    let mut out = format!("{TRACKS}\n");
    for r in rows {
        let b = &r.bbox;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sensor_id, r.frame, r.local_track_id, r.global_id.0, b.x, b.y, b.w, b.h
        );
    }
    out
}

/// One record per line: `id,ratio,f_1,...,f_n`.
pub fn format_features(n_f: usize, features: &[LabeledFeature]) -> String {
    let mut out = format!("{FEATURES} n_f={n_f}\n");
    for f in features {
        let _ = write!(out, "{},{}", f.id, f.ratio);
        for v in &f.feature {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

struct Header {
    fields: BTreeMap<String, String>,
}

impl Header {
    fn parse(first: Option<&str>, magic: &str) -> Result<Self> {
        let line = first.ok_or_else(|| Error::parse(1, "missing header"))?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some(magic) {
            return Err(Error::parse(1, format!("expected header starting with {magic}")));
        }
        let mut fields = BTreeMap::new();
        for t in tokens {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("header token {t:?} is not key=value")))?;
            if fields.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::parse(1, format!("duplicate header key {k}")));
            }
        }
        Ok(Self { fields })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self
            .fields
            .get(key)
            .ok_or_else(|| Error::parse(1, format!("header lacks {key}")))?;
        v.parse()
            .map_err(|_| Error::parse(1, format!("bad header value {key}={v}")))
    }

    fn sensors(&self) -> Result<Vec<u32>> {
        let v = self
            .fields
            .get("sensors")
            .ok_or_else(|| Error::parse(1, "header lacks sensors"))?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        let ids: Vec<u32> = v
            .split(',')
            .map(|s| s.parse().map_err(|_| Error::parse(1, format!("bad sensor id {s:?}"))))
            .collect::<Result<_>>()?;
        let unique: BTreeSet<u32> = ids.iter().copied().collect();
        if unique.len() != ids.len() {
            return Err(Error::parse(1, "duplicate sensor id"));
        }
        Ok(ids)
    }
}

/// Data lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split(',').map(str::trim).collect()))
}

fn num<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {field:?}")))
}

fn finite(line: usize, field: &str, what: &str) -> Result<f64> {
    let v: f64 = num(line, field, what)?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite {what}")));
    }
    Ok(v)
}

fn check_membership(line: usize, sensor: u32, frame: u32, sensors: &[u32], frames: u32) -> Result<()> {
    if !sensors.contains(&sensor) {
        return Err(Error::parse(line, format!("sensor {sensor} not declared in header")));
    }
    if frame >= frames {
        return Err(Error::parse(line, format!("frame {frame} outside 0..{frames}")));
    }
    Ok(())
}

pub fn parse_detections(text: &str) -> Result<DetectionSet> {
    let header = Header::parse(text.lines().next(), DETECTIONS)?;
    let n_f: usize = header.get("n_f")?;
    if n_f == 0 || n_f > MAX_N_F {
        return Err(Error::parse(1, format!("n_f must be in 1..={MAX_N_F}")));
    }
    let frames: u32 = header.get("frames")?;
    let sensors = header.sensors()?;
    let base = 6 + n_f + 12;
    let mut detections = Vec::new();
    for (line, f) in records(text) {
        if f.len() != base && f.len() != base + 1 {
            return Err(Error::parse(
                line,
                format!(
                    "expected {base} or {} fields for n_f={n_f}, got {}",
                    base + 1,
                    f.len()
                ),
            ));
        }
        let sensor_id: u32 = num(line, f[0], "sensor id")?;
        let frame: u32 = num(line, f[1], "frame")?;
        check_membership(line, sensor_id, frame, &sensors, frames)?;
        let v = |i: usize, what: &str| finite(line, f[i], what);
        let bbox = BBox::new(v(2, "x")?, v(3, "y")?, v(4, "w")?, v(5, "h")?);
        let embedding = (6..6 + n_f)
            .map(|i| v(i, "embedding value"))
            .collect::<Result<Vec<_>>>()?;
        let mut kp = [Keypoint::default(); 4];
        for (k, p) in kp.iter_mut().enumerate() {
            let at = 6 + n_f + 3 * k;
            *p = Keypoint::new(v(at, "keypoint x")?, v(at + 1, "keypoint y")?, v(at + 2, "keypoint confidence")?);
        }
        let gt_id = if f.len() == base + 1 {
            Some(num(line, f[base], "gt id")?)
        } else {
            None
        };
        let det = Detection {
            sensor_id,
            frame,
            bbox,
            embedding,
            keypoints: TorsoKeypoints::from_array(kp),
            gt_id,
        };
        det.validate(n_f)
            .map_err(|e| Error::parse(line, e.to_string()))?;
        detections.push(det);
    }
    Ok(DetectionSet {
        n_f,
        frames,
        sensors,
        detections,
    })
}

pub fn parse_groundtruth(text: &str) -> Result<GroundTruth> {
    let header = Header::parse(text.lines().next(), GROUNDTRUTH)?;
    let frames: u32 = header.get("frames")?;
    let sensors = header.sensors()?;
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, f) in records(text) {
        if f.len() != 8 {
            return Err(Error::parse(line, format!("expected 8 fields, got {}", f.len())));
        }
        let sensor_id: u32 = num(line, f[0], "sensor id")?;
        let frame: u32 = num(line, f[1], "frame")?;
        let gt_id: u32 = num(line, f[2], "gt id")?;
        check_membership(line, sensor_id, frame, &sensors, frames)?;
        if !seen.insert((sensor_id, frame, gt_id)) {
            return Err(Error::parse(line, "duplicate gt id in frame"));
        }
        let v = |i: usize, what: &str| finite(line, f[i], what);
        let bbox = BBox::new(v(3, "x")?, v(4, "y")?, v(5, "w")?, v(6, "h")?);
        if !(bbox.w > 0.0 && bbox.h > 0.0) {
            return Err(Error::parse(line, "box size must be positive"));
        }
        rows.push(GroundTruthRow {
            sensor_id,
            frame,
            gt_id,
            bbox,
            heading: v(7, "heading")?,
        });
    }
    Ok(GroundTruth {
        frames,
        sensors,
        rows,
    })
}

pub fn parse_tracks(text: &str) -> Result<Vec<TrackRow>> {
    Header::parse(text.lines().next(), TRACKS)?;
    let mut rows = Vec::new();
    for (line, f) in records(text) {
        if f.len() != 8 {
            return Err(Error::parse(line, format!("expected 8 fields, got {}", f.len())));
        }
        let v = |i: usize, what: &str| finite(line, f[i], what);
        let bbox = BBox::new(v(4, "x")?, v(5, "y")?, v(6, "w")?, v(7, "h")?);
        if !(bbox.w > 0.0 && bbox.h > 0.0) {
            return Err(Error::parse(line, "box size must be positive"));
        }
        rows.push(TrackRow {
            sensor_id: num(line, f[0], "sensor id")?,
            frame: num(line, f[1], "frame")?,
            local_track_id: num(line, f[2], "local track id")?,
            global_id: GlobalId(num(line, f[3], "global id")?),
            bbox,
            gt_id: None,
        });
    }
    Ok(rows)
}

pub fn parse_features(text: &str) -> Result<Vec<LabeledFeature>> {
    let header = Header::parse(text.lines().next(), FEATURES)?;
    let n_f: usize = header.get("n_f")?;
    if n_f == 0 || n_f > MAX_N_F {
        return Err(Error::parse(1, format!("n_f must be in 1..={MAX_N_F}")));
    }
    let mut out = Vec::new();
    for (line, f) in records(text) {
        if f.len() != 2 + n_f {
            return Err(Error::parse(line, format!("expected {} fields, got {}", 2 + n_f, f.len())));
        }
        out.push(LabeledFeature {
            id: num(line, f[0], "identity")?,
            ratio: finite(line, f[1], "ratio")?,
            feature: f[2..]
                .iter()
                .map(|v| finite(line, v, "feature value"))
                .collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<DetectionSet> {
    parse_detections(&read(path.as_ref())?)
}

pub fn load_groundtruth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    parse_groundtruth(&read(path.as_ref())?)
}

pub fn load_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackRow>> {
    parse_tracks(&read(path.as_ref())?)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<LabeledFeature>> {
    parse_features(&read(path.as_ref())?)
}

pub fn write_features(path: impl AsRef<Path>, n_f: usize, features: &[LabeledFeature]) -> Result<()> {
    write(path.as_ref(), &format_features(n_f, features))
}

pub fn write_detections(path: impl AsRef<Path>, set: &DetectionSet) -> Result<()> {
    write(path.as_ref(), &format_detections(set))
}

pub fn write_groundtruth(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    write(path.as_ref(), &format_groundtruth(gt))
}

pub fn write_tracks(path: impl AsRef<Path>, rows: &[TrackRow]) -> Result<()> {
    write(path.as_ref(), &format_tracks(rows))
}

/// Which track label is scored as the hypothesis identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypLabel {
    /// Network-wide identity.
    Global,
    /// Per-sensor track id; only meaningful when scoring one sensor.
    Local,
}

/// Pairs ground truth and tracker output per `(frame, sensor)`, ordered by
/// frame then sensor. A label repeated within one frame (two tracks of one
/// sensor merged into one identity) keeps its first box; the others get
/// fresh labels so every label is unique per frame.
pub fn eval_frames(gt: &GroundTruth, tracks: &[TrackRow], label: HypLabel) -> Vec<EvalFrame> {
    let mut frames: BTreeMap<(u32, u32), EvalFrame> = BTreeMap::new();
    let empty = |sensor_id: u32, frame: u32| EvalFrame {
        sensor_id,
        frame,
        ..Default::default()
    };
    for r in &gt.rows {
        frames
            .entry((r.frame, r.sensor_id))
            .or_insert_with(|| empty(r.sensor_id, r.frame))
            .gt
            .push((r.gt_id, r.bbox));
    }
    let mut fresh = u64::MAX;
    for t in tracks {
        let f = frames
            .entry((t.frame, t.sensor_id))
            .or_insert_with(|| empty(t.sensor_id, t.frame));
        let mut id = match label {
            HypLabel::Global => t.global_id.0,
            HypLabel::Local => t.local_track_id as u64,
        };
        if f.hyp.iter().any(|(h, _)| *h == id) {
            id = fresh;
            fresh -= 1;
        }
        f.hyp.push((id, t.bbox));
    }
    frames.into_values().collect()
}
