//! Shared domain types: detections, identities and the run configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in image pixels. `x`, `y` is the box center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Measurement vector `[x, y, w, h]` consumed by the Kalman update.
    pub fn to_measurement(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x + self.w / 2.0).min(other.x + other.w / 2.0)
            - (self.x - self.w / 2.0).max(other.x - other.w / 2.0);
        let iy = (self.y + self.h / 2.0).min(other.y + other.h / 2.0)
            - (self.y - self.h / 2.0).max(other.y - other.h / 2.0);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Detector confidence in `[0, 1]`; zero means the keypoint was not found.
    pub c: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, c: f64) -> Self {
        Self { x, y, c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TorsoKeypoints {
    pub right_shoulder: Keypoint,
    pub left_shoulder: Keypoint,
    pub right_hip: Keypoint,
    pub left_hip: Keypoint,
}

impl TorsoKeypoints {
    pub fn as_array(&self) -> [Keypoint; 4] {
        [
            self.right_shoulder,
            self.left_shoulder,
            self.right_hip,
            self.left_hip,
        ]
    }

    pub fn from_array(kp: [Keypoint; 4]) -> Self {
        Self {
            right_shoulder: kp[0],
            left_shoulder: kp[1],
            right_hip: kp[2],
            left_hip: kp[3],
        }
    }
}

/// One person observation from one sensor at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub sensor_id: u32,
    pub frame: u32,
    pub bbox: BBox,
    pub embedding: Vec<f64>,
    pub keypoints: TorsoKeypoints,
    /// Ground-truth identity; only used for evaluation.
    pub gt_id: Option<u32>,
}

impl Detection {
    /// Checks the ingestion invariants against the run's embedding dimension.
    pub fn validate(&self, n_f: usize) -> Result<()> {
        let b = &self.bbox;
        if !(b.w > 0.0 && b.h > 0.0) {
            return Err(Error::InvalidDetection(format!(
                "box size must be positive, got {}x{}",
                b.w, b.h
            )));
        }
        if ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDetection("non-finite box".into()));
        }
        if self.embedding.len() != n_f {
            return Err(Error::DimensionMismatch {
                expected: n_f,
                got: self.embedding.len(),
            });
        }
        if !self.embedding.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDetection("non-finite embedding".into()));
        }
        for kp in self.keypoints.as_array() {
            if !(0.0..=1.0).contains(&kp.c) {
                return Err(Error::InvalidDetection(format!(
                    "keypoint confidence {} outside [0, 1]",
                    kp.c
                )));
            }
            if !kp.x.is_finite() || !kp.y.is_finite() {
                return Err(Error::InvalidDetection("non-finite keypoint".into()));
            }
        }
        Ok(())
    }
}

/// Detections of a whole recording across all sensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    pub n_f: usize,
    /// Frames are numbered `0..frames`.
    pub frames: u32,
    /// Every sensor in the network, including ones that saw nobody.
    pub sensors: Vec<u32>,
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn validate(&self) -> Result<()> {
        for d in &self.detections {
            d.validate(self.n_f)?;
            if !self.sensors.contains(&d.sensor_id) {
                return Err(Error::InvalidDetection(format!(
                    "unknown sensor {}",
                    d.sensor_id
                )));
            }
            if d.frame >= self.frames {
                return Err(Error::InvalidDetection(format!(
                    "frame {} outside 0..{}",
                    d.frame, self.frames
                )));
            }
        }
        Ok(())
    }

    /// Detections of one sensor grouped by frame, for every frame in order.
    pub fn sensor_frames(&self, sensor_id: u32) -> Vec<Vec<Detection>> {
        let mut frames = vec![Vec::new(); self.frames as usize];
        for d in self.detections.iter().filter(|d| d.sensor_id == sensor_id) {
            frames[d.frame as usize].push(d.clone());
        }
        frames
    }
}

/// A track node in the cross-sensor graph: `(sensor, local track)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TrackKey {
    pub sensor_id: u32,
    pub local_track_id: u32,
}

impl TrackKey {
    pub fn new(sensor_id: u32, local_track_id: u32) -> Self {
        Self {
            sensor_id,
            local_track_id,
        }
    }
}

impl std::fmt::Display for TrackKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s{}.t{}", self.sensor_id, self.local_track_id)
    }
}

/// Run-wide identity. The canonical id of a cross-sensor component is its smallest
/// member key, packed so that integer order equals key order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GlobalId(pub u64);

impl From<TrackKey> for GlobalId {
    fn from(k: TrackKey) -> Self {
        GlobalId(((k.sensor_id as u64) << 32) | k.local_track_id as u64)
    }
}

impl GlobalId {
    pub fn key(self) -> TrackKey {
        TrackKey::new((self.0 >> 32) as u32, self.0 as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Identity {
    pub sensor_id: u32,
    pub local_track_id: u32,
    pub global_id: Option<GlobalId>,
}

impl Identity {
    pub fn local(sensor_id: u32, local_track_id: u32) -> Self {
        Self {
            sensor_id,
            local_track_id,
            global_id: None,
        }
    }

    pub fn key(&self) -> TrackKey {
        TrackKey::new(self.sensor_id, self.local_track_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    #[default]
    Uniform,
    Kmeans,
}

/// Which cues feed the within-sensor assignment likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cues {
    #[default]
    PositionAppearance,
    AppearanceOnly,
}

/// Run-level configuration. Field names are the config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Embedding dimension. 128 is an arbitrary default.
    pub n_f: usize,
    /// Orientation bin count `L`.
    pub bins: usize,
    /// Frames per fusion cycle `T`.
    pub batch_len: usize,
    pub n_particles: usize,
    /// Spatial softmin temperature.
    pub beta: f64,
    /// Appearance softmin temperature.
    pub gamma: f64,
    pub dt: f64,
    /// Pseudo-likelihood of a detection starting a new track.
    pub new_track_likelihood: f64,
    /// Consecutive missed frames after which a track is terminated.
    pub miss_limit: u32,
    /// Cross-sensor gallery distance above which matches are dropped.
    pub cs_threshold: f64,
    pub resample_ess_frac: f64,
    pub bin_mode: BinMode,
    pub seed: u64,
    /// Mahalanobis distance beyond which a track is not a candidate.
    pub gate: f64,
    pub cues: Cues,
    /// Process noise variances per frame: position, velocity, box size.
    pub q_pos: f64,
    pub q_vel: f64,
    pub q_box: f64,
    /// Measurement noise variance on each of `x, y, w, h`.
    pub r_meas: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_f: 128,
            bins: 6,
            batch_len: 150,
            n_particles: 20,
            beta: 5.0,
            gamma: 5.0,
            dt: 1.0,
            new_track_likelihood: 1e-6,
            miss_limit: 10,
            cs_threshold: 0.8,
            resample_ess_frac: 0.5,
            bin_mode: BinMode::Uniform,
            seed: 0,
            gate: 9.5,
            cues: Cues::PositionAppearance,
            q_pos: 1.0,
            q_vel: 0.25,
            q_box: 1.0,
            r_meas: 4.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        validate_config(cfg)
    }
}

/// Returns the config unchanged when every invariant holds, else names the first
/// violated one.
pub fn validate_config(cfg: RunConfig) -> Result<RunConfig> {
    fn positive(name: &str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{name} must be > 0")))
        }
    }
    fn non_negative(name: &str, v: f64) -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{name} must be ≥ 0")))
        }
    }
    if cfg.n_f == 0 {
        return Err(Error::InvalidConfig("n_f must be ≥ 1".into()));
    }
    if cfg.bins == 0 {
        return Err(Error::InvalidConfig("L must be ≥ 1".into()));
    }
    if cfg.batch_len == 0 {
        return Err(Error::InvalidConfig("T must be ≥ 1".into()));
    }
    if cfg.n_particles == 0 {
        return Err(Error::InvalidConfig("n_p must be ≥ 1".into()));
    }
    positive("beta", cfg.beta)?;
    positive("gamma", cfg.gamma)?;
    positive("dt", cfg.dt)?;
    positive("new_track_likelihood", cfg.new_track_likelihood)?;
    positive("cs_threshold", cfg.cs_threshold)?;
    if !(cfg.resample_ess_frac > 0.0 && cfg.resample_ess_frac <= 1.0) {
        return Err(Error::InvalidConfig(
            "resample_ess_frac must be in (0, 1]".into(),
        ));
    }
    positive("gate", cfg.gate)?;
    non_negative("q_pos", cfg.q_pos)?;
    non_negative("q_vel", cfg.q_vel)?;
    non_negative("q_box", cfg.q_box)?;
    positive("r_meas", cfg.r_meas)?;
    Ok(cfg)
}
