//! Batch cycle of the sensor network: local tracking for a batch of frames,
//! gallery exchange, cross-sensor association, gallery merge, repeat.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cross_sensor::{associate_masked, ring_schedule, IdentityResolver, MatchSet, TrackSummary};
use crate::error::{Error, Result};
use crate::gallery::BinnedGallery;
use crate::orientation::{fit_bins, s2t_ratio, BinBoundaries};
use crate::types::{BBox, BinMode, Detection, DetectionSet, GlobalId, Identity, RunConfig, TrackKey};
use crate::wire::{put_u16, put_u32, WireReader};
use crate::within_sensor::{BatchOutcome, FrameInput, SensorFilter};

pub const WIRE_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 12;
const ENTRY_HEADER_BYTES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct MessageEntry {
    pub local_track_id: u32,
    pub first_frame: u32,
    pub last_frame: u32,
    pub gallery: BinnedGallery,
}

/// Galleries a sensor shares at the end of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct GalleryMessage {
    pub version: u16,
    pub sensor_id: u32,
    pub batch_index: u32,
    pub entries: Vec<MessageEntry>,
}

impl GalleryMessage {
    /// Message carrying `summaries`, with galleries rounded to wire precision.
    pub fn from_summaries(sensor_id: u32, batch_index: u32, summaries: &[TrackSummary]) -> Self {
        Self {
            version: WIRE_VERSION,
            sensor_id,
            batch_index,
            entries: summaries
                .iter()
                .map(|s| MessageEntry {
                    local_track_id: s.identity.local_track_id,
                    first_frame: s.first_frame,
                    last_frame: s.last_frame,
                    gallery: s.gallery.quantized(),
                })
                .collect(),
        }
    }

    /// Exact length of the encoding.
    pub fn payload_bytes(&self) -> usize {
        HEADER_BYTES
            + self
                .entries
                .iter()
                .map(|e| ENTRY_HEADER_BYTES + e.gallery.wire_len())
                .sum::<usize>()
    }

    pub fn summaries(&self) -> Vec<TrackSummary> {
        self.entries
            .iter()
            .map(|e| TrackSummary {
                identity: Identity::local(self.sensor_id, e.local_track_id),
                gallery: e.gallery.clone(),
                first_frame: e.first_frame,
                last_frame: e.last_frame,
            })
            .collect()
    }
}

pub fn encode_message(msg: &GalleryMessage) -> Result<Vec<u8>> {
    let sensor = u16::try_from(msg.sensor_id).map_err(|_| {
        Error::InvalidConfig(format!("sensor id {} does not fit the wire format", msg.sensor_id))
    })?;
    let count = u32::try_from(msg.entries.len())
        .map_err(|_| Error::InvalidConfig("too many entries for one message".into()))?;
    let mut out = Vec::with_capacity(msg.payload_bytes());
    put_u16(&mut out, msg.version);
    put_u16(&mut out, sensor);
    put_u32(&mut out, msg.batch_index);
    put_u32(&mut out, count);
    for e in &msg.entries {
        put_u32(&mut out, e.local_track_id);
        put_u32(&mut out, e.first_frame);
        put_u32(&mut out, e.last_frame);
        e.gallery.encode_wire(&mut out);
    }
    Ok(out)
}

/// Decodes a message whose galleries have `bins` slots of dimension `n_f`.
pub fn decode_message(bytes: &[u8], bins: usize, n_f: usize) -> Result<GalleryMessage> {
    let mut r = WireReader::new(bytes);
    let version = r.u16("version")?;
    if version != WIRE_VERSION {
        return Err(Error::malformed(0, format!("unsupported version {version}")));
    }
    let sensor_id = r.u16("sensor id")? as u32;
    let batch_index = r.u32("batch index")?;
    let count_at = r.offset();
    let count = r.u32("entry count")? as usize;
    let min_entry = ENTRY_HEADER_BYTES + 4 * bins;
    if min_entry > 0 && count > r.remaining() / min_entry {
        return Err(Error::malformed(
            count_at,
            format!("entry count {count} exceeds remaining {} bytes", r.remaining()),
        ));
    }
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let local_track_id = r.u32("track id")?;
        let first_at = r.offset();
        let first_frame = r.u32("first frame")?;
        let last_frame = r.u32("last frame")?;
        if first_frame > last_frame {
            return Err(Error::malformed(first_at, "first frame after last frame"));
        }
        let gallery_at = r.offset();
        let gallery = BinnedGallery::decode_wire(&mut r, bins, n_f)?;
        if gallery.is_empty() {
            return Err(Error::malformed(gallery_at, "empty gallery"));
        }
        entries.push(MessageEntry {
            local_track_id,
            first_frame,
            last_frame,
            gallery,
        });
    }
    if r.remaining() != 0 {
        return Err(Error::malformed(r.offset(), "trailing bytes"));
    }
    Ok(GalleryMessage {
        version,
        sensor_id,
        batch_index,
        entries,
    })
}

/// A sensor: its particle filter plus the bookkeeping around it.
#[derive(Debug, Clone)]
pub struct SensorNode {
    filter: SensorFilter,
    boundaries: Option<BinBoundaries>,
    next_frame: u32,
    retained_features: u64,
}

impl SensorNode {
    pub fn new(sensor_id: u32, cfg: RunConfig) -> Self {
        Self {
            filter: SensorFilter::new(sensor_id, cfg),
            boundaries: None,
            next_frame: 0,
            retained_features: 0,
        }
    }

    pub fn sensor_id(&self) -> u32 {
        self.filter.sensor_id
    }

    pub fn filter(&self) -> &SensorFilter {
        &self.filter
    }

    pub fn boundaries(&self) -> Option<&BinBoundaries> {
        self.boundaries.as_ref()
    }

    /// Embeddings a full (unbinned) gallery would hold by now.
    pub fn retained_features(&self) -> u64 {
        self.retained_features
    }

    fn ensure_boundaries(&mut self, frames: &[Vec<Detection>]) -> Result<()> {
        if self.boundaries.is_some() {
            return Ok(());
        }
        let cfg = self.filter.config();
        let b = match cfg.bin_mode {
            BinMode::Uniform => BinBoundaries::uniform(cfg.bins),
            BinMode::Kmeans => {
                let ratios: Vec<_> = frames
                    .iter()
                    .flatten()
                    .filter_map(|d| s2t_ratio(&d.keypoints).ok())
                    .collect();
                fit_bins(&ratios, cfg.bins, BinMode::Kmeans)
                    .unwrap_or_else(|_| BinBoundaries::uniform(cfg.bins))
            }
        };
        self.boundaries = Some(b);
        Ok(())
    }

    /// Tracks `frames` (consecutive, starting at the node's next frame) and
    /// commits the batch.
    pub fn run_batch(&mut self, frames: &[Vec<Detection>]) -> Result<BatchOutcome> {
        self.ensure_boundaries(frames)?;
        let boundaries = self.boundaries.clone().expect("set above");
        let batch_start = self.next_frame;
        let n_f = self.filter.config().n_f;
        for dets in frames {
            let frame = self.next_frame;
            for d in dets {
                d.validate(n_f)?;
                if d.frame != frame || d.sensor_id != self.sensor_id() {
                    return Err(Error::InvalidDetection(format!(
                        "detection for sensor {} frame {} fed to sensor {} at frame {frame}",
                        d.sensor_id,
                        d.frame,
                        self.sensor_id()
                    )));
                }
            }
            self.filter.step(&FrameInput::new(frame, dets, &boundaries))?;
            self.next_frame += 1;
        }
        let outcome = self.filter.end_batch(batch_start)?;
        self.retained_features += outcome.absorbed;
        Ok(outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorBatchStats {
    pub sensor_id: u32,
    pub active_tracks: usize,
    pub payload_bytes: usize,
    pub gallery_bytes: usize,
    /// Embeddings an unbinned gallery would hold at this point.
    pub full_gallery_features: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchRecord {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub batch_index: u32,
    pub frame_start: u32,
    pub frame_end: u32,
    pub sensors: Vec<SensorBatchStats>,
    pub matches: Vec<MatchRecord>,
    pub total_bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// One output row: a detection and the track it was assigned to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub sensor_id: u32,
    pub frame: u32,
    pub local_track_id: u32,
    pub global_id: GlobalId,
    pub bbox: BBox,
    pub gt_id: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMessage {
    pub batch_index: u32,
    pub sensor_id: u32,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOutput {
    pub tracks: Vec<TrackRow>,
    pub reports: Vec<BatchReport>,
    pub messages: Vec<EncodedMessage>,
}

/// Runs the whole network over `input` without recording wall time, so the
/// reports are reproducible byte for byte.
pub fn run_system(input: &DetectionSet, cfg: &RunConfig) -> Result<SystemOutput> {
    System::new(cfg.clone()).run(input)
}

#[derive(Debug, Clone)]
pub struct System {
    cfg: RunConfig,
    timing: bool,
}

impl System {
    pub fn new(cfg: RunConfig) -> Self {
        Self { cfg, timing: false }
    }

    /// Records per-batch wall time in the reports.
    pub fn with_timing(mut self, timing: bool) -> Self {
        self.timing = timing;
        self
    }

    pub fn run(&self, input: &DetectionSet) -> Result<SystemOutput> {
        let cfg = &self.cfg;
        if input.n_f != cfg.n_f {
            return Err(Error::DimensionMismatch {
                expected: cfg.n_f,
                got: input.n_f,
            });
        }
        input.validate()?;
        let sensors: Vec<u32> = input.sensors.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut streams: Vec<Vec<Vec<Detection>>> =
            sensors.iter().map(|&s| input.sensor_frames(s)).collect();
        let mut nodes: Vec<SensorNode> = sensors.iter().map(|&s| SensorNode::new(s, cfg.clone())).collect();
        let schedule = ring_schedule(&sensors);
        let sends = !schedule.is_empty();

        let mut resolver = IdentityResolver::new();
        let mut registry: BTreeMap<TrackKey, TrackSummary> = BTreeMap::new();
        let mut rows: Vec<(u32, u32, u32, BBox, Option<u32>)> = Vec::new();
        let mut reports = Vec::new();
        let mut messages = Vec::new();

        let batch_len = cfg.batch_len.max(1) as u32;
        let mut start = 0u32;
        let mut batch_index = 0u32;
        while start < input.frames {
            let end = input.frames.min(start.saturating_add(batch_len));
            let clock = Instant::now();
            let batches: Vec<Vec<Vec<Detection>>> = streams
                .iter_mut()
                .map(|s| s.drain(..(end - start) as usize).collect())
                .collect();
            let outcomes: Vec<BatchOutcome> = nodes
                .par_iter_mut()
                .zip(batches.par_iter())
                .map(|(node, frames)| node.run_batch(frames))
                .collect::<Result<_>>()?;

            let mut stats = Vec::new();
            let mut fresh: BTreeSet<TrackKey> = BTreeSet::new();
            for (node, outcome) in nodes.iter().zip(&outcomes) {
                let sid = node.sensor_id();
                for f in &outcome.history {
                    let dets = &batches[sensors.iter().position(|&s| s == sid).unwrap()][(f.frame - start) as usize];
                    for e in &f.entries {
                        rows.push((sid, f.frame, e.track_id, e.bbox, dets[e.det_index].gt_id));
                    }
                }
                for s in &outcome.summaries {
                    resolver.insert(s.identity.key());
                }
                let mut payload = 0;
                if sends {
                    let msg = GalleryMessage::from_summaries(sid, batch_index, &outcome.summaries);
                    let bytes = encode_message(&msg)?;
                    payload = bytes.len();
                    let received = decode_message(&bytes, cfg.bins, cfg.n_f)?;
                    for s in received.summaries() {
                        fresh.insert(s.identity.key());
                        registry.insert(s.identity.key(), s);
                    }
                    messages.push(EncodedMessage {
                        batch_index,
                        sensor_id: sid,
                        bytes,
                    });
                }
                stats.push(SensorBatchStats {
                    sensor_id: sid,
                    active_tracks: outcome.summaries.len(),
                    payload_bytes: payload,
                    gallery_bytes: node.filter().gallery_bytes(),
                    full_gallery_features: node.retained_features(),
                });
            }

            let mut applied = Vec::new();
            for &(sa, sb) in &schedule {
                let m = associate_round(&registry, &fresh, &mut resolver, sa, sb, cfg.cs_threshold)?;
                for p in &m.pairs {
                    applied.push(MatchRecord {
                        a: p.track_a.key().to_string(),
                        b: p.track_b.key().to_string(),
                        distance: p.distance,
                    });
                }
                resolver.apply(&m);
            }
            if !applied.is_empty() {
                let components = resolver.components();
                for root in crate::cross_sensor::same_sensor_conflicts(&components) {
                    log::warn!("component {root} holds several tracks of one sensor; kept as one identity");
                }
                for node in nodes.iter_mut() {
                    let remote = remote_galleries(node.sensor_id(), &components, &registry)?;
                    node.filter.apply_remote(&remote)?;
                }
            }

            let total_bytes = stats.iter().map(|s| s.payload_bytes).sum();
            reports.push(BatchReport {
                batch_index,
                frame_start: start,
                frame_end: end,
                sensors: stats,
                matches: applied,
                total_bytes,
                wall_time_ms: self.timing.then(|| clock.elapsed().as_secs_f64() * 1e3),
            });
            start = end;
            batch_index += 1;
        }

        let tracks = rows
            .into_iter()
            .map(|(sensor_id, frame, local_track_id, bbox, gt_id)| TrackRow {
                sensor_id,
                frame,
                local_track_id,
                global_id: resolver.global_id(TrackKey::new(sensor_id, local_track_id)),
                bbox,
                gt_id,
            })
            .collect();
        Ok(SystemOutput {
            tracks,
            reports,
            messages,
        })
    }
}

/// Matches sensor `sa`'s known tracks against `sb`'s. At least one side of a
/// pair must have been reported this batch, and a pair may not join a
/// component that already holds a track of the other side's sensor.
fn associate_round(
    registry: &BTreeMap<TrackKey, TrackSummary>,
    fresh: &BTreeSet<TrackKey>,
    resolver: &mut IdentityResolver,
    sa: u32,
    sb: u32,
    threshold: f64,
) -> Result<MatchSet> {
    let side = |s: u32| -> Vec<TrackSummary> {
        registry
            .range(TrackKey::new(s, 0)..=TrackKey::new(s, u32::MAX))
            .map(|(_, v)| v.clone())
            .collect()
    };
    let (a, b) = (side(sa), side(sb));
    if a.is_empty() || b.is_empty() {
        return Ok(MatchSet::default());
    }
    let components = resolver.components();
    let sensors_of = |k: TrackKey, r: &mut IdentityResolver| -> BTreeSet<u32> {
        components[&r.find(k)].iter().map(|m| m.sensor_id).collect()
    };
    let mut allowed = vec![vec![false; b.len()]; a.len()];
    for (i, ta) in a.iter().enumerate() {
        let ka = ta.identity.key();
        let (root_a, sens_a) = (resolver.find(ka), sensors_of(ka, resolver));
        for (j, tb) in b.iter().enumerate() {
            let kb = tb.identity.key();
            if !fresh.contains(&ka) && !fresh.contains(&kb) {
                continue;
            }
            let root_b = resolver.find(kb);
            allowed[i][j] = root_a == root_b
                || (!sens_a.contains(&sb) && !sensors_of(kb, resolver).contains(&sa));
        }
    }
    let mut m = associate_masked(&a, &b, threshold, |i, j| allowed[i][j])?;
    m.pairs.retain(|p| resolver.find(p.track_a.key()) != resolver.find(p.track_b.key()));
    Ok(m)
}

/// For each track of `sensor` in a multi-sensor component: the merge of the
/// other sensors' member galleries.
fn remote_galleries(
    sensor: u32,
    components: &BTreeMap<TrackKey, Vec<TrackKey>>,
    registry: &BTreeMap<TrackKey, TrackSummary>,
) -> Result<BTreeMap<u32, BinnedGallery>> {
    let mut out = BTreeMap::new();
    for members in components.values().filter(|m| m.len() > 1) {
        let mut remote: Option<BinnedGallery> = None;
        for k in members.iter().filter(|k| k.sensor_id != sensor) {
            if let Some(s) = registry.get(k) {
                remote = Some(match remote {
                    Some(g) => g.merge(&s.gallery)?,
                    None => s.gallery.clone(),
                });
            }
        }
        let Some(remote) = remote else { continue };
        for k in members.iter().filter(|k| k.sensor_id == sensor) {
            out.insert(k.local_track_id, remote.clone());
        }
    }
    Ok(out)
}
