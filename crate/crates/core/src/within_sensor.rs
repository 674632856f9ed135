//! Rao-Blackwellized particle filter over within-sensor data associations.
//!
//! Each particle samples one assignment history; conditioned on it, every track's
//! continuous state is solved in closed form by its own Kalman filter and its
//! appearance is summarized by a binned gallery.
//!
//! Per frame, a particle visits the detections in random order and samples a
//! target for each from the joint (spatial x appearance) assignment likelihood,
//! restricted to tracks not yet taken in this frame and inside the Mahalanobis
//! gate. The restricted likelihood is the proposal, so the importance correction
//! for each draw is the mass that survived the restriction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::cross_sensor::TrackSummary;
use crate::error::{Error, Result};
use crate::gallery::BinnedGallery;
use crate::motion::{Innovation, KalmanState, MotionModel};
use crate::orientation::{bin_index, s2t_ratio, BinBoundaries, S2TRatio};
use crate::rng::substream;
use crate::types::{BBox, Cues, Detection, Identity, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackState {
    pub id: u32,
    pub kalman: KalmanState,
    /// Appearance evidence from this sensor's own detections.
    pub gallery: BinnedGallery,
    /// Galleries of cross-sensor matches, merged; not re-sent on the wire.
    pub remote: Option<BinnedGallery>,
    /// `gallery` merged with `remote`; what the appearance likelihood compares to.
    pub effective: BinnedGallery,
    pub first_frame: u32,
    pub last_seen: u32,
    pub misses: u32,
    pub alive: bool,
}

impl TrackState {
    fn start(id: u32, det: &Detection, bin: usize, bins: usize) -> Result<Self> {
        let mut gallery = BinnedGallery::new(bins, det.embedding.len());
        gallery.absorb(&det.embedding, bin)?;
        Ok(Self {
            id,
            kalman: KalmanState::from_bbox(&det.bbox),
            effective: gallery.clone(),
            gallery,
            remote: None,
            first_frame: det.frame,
            last_seen: det.frame,
            misses: 0,
            alive: true,
        })
    }

    pub fn set_remote(&mut self, remote: Option<BinnedGallery>) -> Result<()> {
        self.effective = match &remote {
            Some(r) => self.gallery.merge(r)?,
            None => self.gallery.clone(),
        };
        self.remote = remote;
        Ok(())
    }
}

/// Where one detection goes in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Track(u32),
    NewTrack,
}

/// Per-frame assignment, indexed by detection. Injective over `Track` targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAssignment {
    pub entries: Vec<Target>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignedDetection {
    pub det_index: usize,
    pub track_id: u32,
    /// Posterior box of the track after absorbing this detection.
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u32,
    pub entries: Vec<AssignedDetection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Log of the (normalized, after [`normalize_weights`]) importance weight.
    pub log_weight: f64,
    pub tracks: BTreeMap<u32, TrackState>,
    pub history: Vec<FrameRecord>,
    next_id: u32,
}

impl Particle {
    pub fn new(weight: f64) -> Self {
        Self {
            log_weight: weight.ln(),
            tracks: BTreeMap::new(),
            history: Vec::new(),
            next_id: 0,
        }
    }

    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }

    pub fn alive_tracks(&self) -> impl Iterator<Item = &TrackState> {
        self.tracks.values().filter(|t| t.alive)
    }

    pub fn next_track_id(&self) -> u32 {
        self.next_id
    }
}

/// Read-only inputs shared by every particle in a frame.
pub struct FrameInput<'a> {
    pub frame: u32,
    pub detections: &'a [Detection],
    /// Orientation bin of each detection.
    pub bins: Vec<usize>,
}

impl<'a> FrameInput<'a> {
    pub fn new(frame: u32, detections: &'a [Detection], boundaries: &BinBoundaries) -> Self {
        let bins = detections
            .iter()
            .map(|d| detection_bin(d, boundaries))
            .collect();
        Self {
            frame,
            detections,
            bins,
        }
    }
}

/// Orientation bin of a detection. Detections whose torso gives no usable ratio
/// go to the bin holding a zero ratio (side view).
pub fn detection_bin(det: &Detection, boundaries: &BinBoundaries) -> usize {
    let r = s2t_ratio(&det.keypoints).unwrap_or(S2TRatio::new(0.0).unwrap());
    bin_index(r, boundaries)
}

/// `exp(-temp * d_i) / sum_j exp(-temp * d_j)`, computed shift-stable.
pub fn softmin(distances: &[f64], temp: f64) -> Vec<f64> {
    let Some(min) = distances.iter().copied().min_by(|a, b| a.total_cmp(b)) else {
        return Vec::new();
    };
    let e: Vec<f64> = distances.iter().map(|d| (-temp * (d - min)).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

pub fn spatial_likelihood(
    z: &[f64; 4],
    tracks: &[&KalmanState],
    model: &MotionModel,
    beta: f64,
) -> Result<Vec<f64>> {
    let d = tracks
        .iter()
        .map(|s| Ok(s.innovation(model)?.mahalanobis(z)))
        .collect::<Result<Vec<_>>>()?;
    Ok(softmin(&d, beta))
}

pub fn appearance_likelihood(
    embedding: &[f64],
    galleries: &[&BinnedGallery],
    gamma: f64,
) -> Result<Vec<f64>> {
    let d = galleries
        .iter()
        .map(|g| g.nearest_bin_distance(embedding))
        .collect::<Result<Vec<_>>>()?;
    Ok(softmin(&d, gamma))
}

/// Combines per-track spatial and appearance likelihoods with the birth
/// pseudo-likelihood; the last entry is `NewTrack`. Sums to 1.
fn combine(spatial: Option<&[f64]>, appearance: &[f64], new_track: f64) -> Vec<f64> {
    let mut v: Vec<f64> = match spatial {
        Some(s) => s.iter().zip(appearance).map(|(s, a)| s * a).collect(),
        None => appearance.to_vec(),
    };
    v.push(new_track);
    let sum: f64 = v.iter().sum();
    v.into_iter().map(|x| x / sum).collect()
}

/// Probability of `det` belonging to each of `tracks` (predicted states), plus a
/// final entry for starting a new track.
pub fn joint_assignment_likelihood(
    det: &Detection,
    tracks: &[&TrackState],
    cfg: &RunConfig,
    model: &MotionModel,
) -> Result<Vec<f64>> {
    if tracks.is_empty() {
        return Ok(vec![1.0]);
    }
    let galleries: Vec<&BinnedGallery> = tracks.iter().map(|t| &t.effective).collect();
    let appearance = appearance_likelihood(&det.embedding, &galleries, cfg.gamma)?;
    let spatial = match cfg.cues {
        Cues::PositionAppearance => {
            let states: Vec<&KalmanState> = tracks.iter().map(|t| &t.kalman).collect();
            Some(spatial_likelihood(
                &det.bbox.to_measurement(),
                &states,
                model,
                cfg.beta,
            )?)
        }
        Cues::AppearanceOnly => None,
    };
    Ok(combine(
        spatial.as_deref(),
        &appearance,
        cfg.new_track_likelihood,
    ))
}

fn sample_index(probs: &[f64], total: f64, rng: &mut impl Rng) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Advances one particle by one frame: predict, sample a one-to-one assignment,
/// update the assigned tracks, start new ones and retire stale ones.
pub fn step_particle(
    p: &mut Particle,
    input: &FrameInput<'_>,
    cfg: &RunConfig,
    model: &MotionModel,
    rng: &mut impl Rng,
) -> Result<FrameAssignment> {
    for t in p.tracks.values_mut().filter(|t| t.alive) {
        t.kalman = t.kalman.predict(model);
    }
    let ids: Vec<u32> = p.alive_tracks().map(|t| t.id).collect();
    let use_position = cfg.cues == Cues::PositionAppearance;
    let innovations: Vec<Innovation> = if use_position {
        ids.iter()
            .map(|id| p.tracks[id].kalman.innovation(model))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let n_det = input.detections.len();
    let mut order: Vec<usize> = (0..n_det).collect();
    order.shuffle(rng);
    let mut taken = vec![false; ids.len()];
    let mut targets = vec![Target::NewTrack; n_det];
    let mut log_correction = 0.0;

    for &d in &order {
        let det = &input.detections[d];
        let likelihood = if ids.is_empty() {
            vec![1.0]
        } else {
            let appearance_d: Vec<f64> = ids
                .iter()
                .map(|id| p.tracks[id].effective.nearest_bin_distance(&det.embedding))
                .collect::<Result<_>>()?;
            let appearance = softmin(&appearance_d, cfg.gamma);
            let mut gated = vec![false; ids.len()];
            let spatial = if use_position {
                let z = det.bbox.to_measurement();
                let dist: Vec<f64> = innovations.iter().map(|inn| inn.mahalanobis(&z)).collect();
                for (g, d) in gated.iter_mut().zip(&dist) {
                    *g = *d > cfg.gate;
                }
                Some(softmin(&dist, cfg.beta))
            } else {
                None
            };
            let mut v = combine(spatial.as_deref(), &appearance, cfg.new_track_likelihood);
            for k in 0..ids.len() {
                if taken[k] || gated[k] {
                    v[k] = 0.0;
                }
            }
            v
        };
        let total: f64 = likelihood.iter().sum();
        log_correction += total.ln();
        let k = sample_index(&likelihood, total, rng);
        if k < ids.len() {
            taken[k] = true;
            targets[d] = Target::Track(ids[k]);
        }
    }
    p.log_weight += log_correction;

    let bins = cfg.bins;
    let mut entries = Vec::with_capacity(n_det);
    for (d, target) in targets.iter().enumerate() {
        let det = &input.detections[d];
        let bin = input.bins[d];
        let id = match *target {
            Target::Track(id) => {
                let t = p.tracks.get_mut(&id).expect("sampled track exists");
                let (post, _) = t.kalman.update(&det.bbox.to_measurement(), model)?;
                t.kalman = post;
                t.gallery.absorb(&det.embedding, bin)?;
                t.effective.absorb(&det.embedding, bin)?;
                t.last_seen = input.frame;
                t.misses = 0;
                id
            }
            Target::NewTrack => {
                let id = p.next_id;
                p.next_id += 1;
                p.tracks.insert(id, TrackState::start(id, det, bin, bins)?);
                id
            }
        };
        entries.push(AssignedDetection {
            det_index: d,
            track_id: id,
            bbox: p.tracks[&id].kalman.bbox(),
        });
    }
    for (k, id) in ids.iter().enumerate() {
        if !taken[k] {
            let t = p.tracks.get_mut(id).unwrap();
            t.misses += 1;
            if t.misses > cfg.miss_limit {
                t.alive = false;
            }
        }
    }
    p.history.push(FrameRecord {
        frame: input.frame,
        entries,
    });
    Ok(FrameAssignment { entries: targets })
}

/// Rescales log-weights so the weights sum to one. A set whose weights all
/// underflow is reset to uniform.
pub fn normalize_weights(particles: &mut [Particle]) {
    let max = particles
        .iter()
        .map(|p| p.log_weight)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let lw = -(particles.len() as f64).ln();
        particles.iter_mut().for_each(|p| p.log_weight = lw);
        return;
    }
    let log_sum = max
        + particles
            .iter()
            .map(|p| (p.log_weight - max).exp())
            .sum::<f64>()
            .ln();
    for p in particles.iter_mut() {
        p.log_weight -= log_sum;
    }
}

pub fn effective_sample_size(particles: &[Particle]) -> f64 {
    1.0 / particles.iter().map(|p| p.weight().powi(2)).sum::<f64>()
}

/// Systematic resampling indices for `n` draws with offset `u0 in [0, 1/n)`.
pub fn systematic_indices(weights: &[f64], n: usize, u0: f64) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0] / total;
    let mut i = 0;
    for k in 0..n {
        let u = u0 + k as f64 / n as f64;
        while u >= cumulative && i + 1 < weights.len() {
            i += 1;
            cumulative += weights[i] / total;
        }
        out.push(i);
    }
    out
}

/// Systematic resampling when the effective sample size falls below
/// `resample_ess_frac * n_particles`. Returns whether it resampled.
pub fn resample(particles: &mut Vec<Particle>, cfg: &RunConfig, rng: &mut impl Rng) -> bool {
    let n = cfg.n_particles;
    if particles.is_empty() || effective_sample_size(particles) >= cfg.resample_ess_frac * n as f64
    {
        return false;
    }
    let weights: Vec<f64> = particles.iter().map(|p| p.weight()).collect();
    let u0 = rng.random::<f64>() / n as f64;
    let picks = systematic_indices(&weights, n, u0);
    let lw = -(n as f64).ln();
    *particles = picks
        .into_iter()
        .map(|i| {
            let mut p = particles[i].clone();
            p.log_weight = lw;
            p
        })
        .collect();
    true
}

/// Highest-weight particle; ties go to the lowest index.
pub fn map_particle(particles: &[Particle]) -> Result<&Particle> {
    let mut best: Option<&Particle> = None;
    for p in particles {
        if best.is_none_or(|b| p.log_weight > b.log_weight) {
            best = Some(p);
        }
    }
    best.ok_or(Error::EmptyParticleSet)
}

/// What a sensor commits at the end of a fusion batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    /// Tracks seen during the batch, from the MAP particle.
    pub summaries: Vec<TrackSummary>,
    /// MAP particle's assignment history for the batch.
    pub history: Vec<FrameRecord>,
    /// Detections absorbed this batch, i.e. what a full gallery would retain.
    pub absorbed: u64,
}

/// One sensor's particle filter.
#[derive(Debug, Clone)]
pub struct SensorFilter {
    pub sensor_id: u32,
    cfg: RunConfig,
    model: MotionModel,
    particles: Vec<Particle>,
}

impl SensorFilter {
    pub fn new(sensor_id: u32, cfg: RunConfig) -> Self {
        let n = cfg.n_particles;
        Self {
            sensor_id,
            model: MotionModel::from_config(&cfg),
            particles: (0..n).map(|_| Particle::new(1.0 / n as f64)).collect(),
            cfg,
        }
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn step(&mut self, input: &FrameInput<'_>) -> Result<()> {
        let (seed, sensor, frame) = (self.cfg.seed, self.sensor_id as u64, input.frame as u64);
        let mut rng = substream(seed, "resample", &[sensor, frame]);
        resample(&mut self.particles, &self.cfg, &mut rng);
        let (cfg, model) = (&self.cfg, &self.model);
        self.particles
            .par_iter_mut()
            .enumerate()
            .map(|(i, p)| {
                let mut rng = substream(seed, "within_sensor", &[sensor, frame, i as u64]);
                step_particle(p, input, cfg, model, &mut rng).map(|_| ())
            })
            .collect::<Result<Vec<()>>>()?;
        normalize_weights(&mut self.particles);
        Ok(())
    }

    /// Commits the MAP particle: reports the tracks active since `batch_start`,
    /// drops dead tracks and restarts every particle from the MAP hypothesis.
    pub fn end_batch(&mut self, batch_start: u32) -> Result<BatchOutcome> {
        let mut map = map_particle(&self.particles)?.clone();
        let summaries = map
            .tracks
            .values()
            .filter(|t| t.last_seen >= batch_start && !t.gallery.is_empty())
            .map(|t| TrackSummary {
                identity: Identity::local(self.sensor_id, t.id),
                gallery: t.gallery.clone(),
                first_frame: t.first_frame,
                last_frame: t.last_seen,
            })
            .collect();
        let history = std::mem::take(&mut map.history);
        let absorbed = history.iter().map(|f| f.entries.len() as u64).sum();
        map.tracks.retain(|_, t| t.alive);
        let n = self.cfg.n_particles;
        map.log_weight = -(n as f64).ln();
        self.particles = vec![map; n];
        Ok(BatchOutcome {
            summaries,
            history,
            absorbed,
        })
    }

    /// Installs merged galleries from cross-sensor matches on live tracks.
    pub fn apply_remote(&mut self, remote: &BTreeMap<u32, BinnedGallery>) -> Result<()> {
        for p in &mut self.particles {
            for (id, g) in remote {
                if let Some(t) = p.tracks.get_mut(id) {
                    t.set_remote(Some(g.clone()))?;
                }
            }
        }
        Ok(())
    }

    /// Bytes held by the MAP particle's live galleries.
    pub fn gallery_bytes(&self) -> usize {
        map_particle(&self.particles)
            .map(|p| p.alive_tracks().map(|t| t.gallery.storage_bytes()).sum())
            .unwrap_or(0)
    }
}
