//! Synthetic worlds: people walking through sensor fields of view, seen as
//! boxes with orientation-dependent embeddings and torso keypoints.

mod files;
mod reid;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::types::{BBox, Detection, DetectionSet, Keypoint, TorsoKeypoints};

pub use files::{
    eval_frames, format_detections, format_features, format_groundtruth, format_tracks,
    load_detections, load_features, load_groundtruth, load_tracks, parse_detections,
    parse_features, parse_groundtruth, parse_tracks, write_detections, write_features,
    write_groundtruth, write_tracks, HypLabel,
};
pub use reid::{reid_features, ReidSpec};

/// Torso length as a fraction of box height.
pub const TORSO_FRACTION: f64 = 0.3;
/// Shoulder half-width at a frontal view, as a fraction of box width.
pub const SHOULDER_FRACTION: f64 = 0.3;
/// Hip half-width relative to the shoulder half-width.
pub const HIP_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorLayout {
    pub id: u32,
    /// World rectangle `[x0, y0, x1, y1]` seen by the sensor.
    pub fov: [f64; 4],
    /// Direction the sensor looks along, in degrees in the world plane.
    pub view_dir_deg: f64,
    pub px_per_unit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathModel {
    /// Walk through every field of view in sensor order (or reverse).
    #[default]
    Corridor,
    /// Wander between random points inside the covered area.
    RandomWaypoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub model: PathModel,
    /// Walking speed range, world units per frame.
    pub speed: [f64; 2],
    /// People start at a uniform frame in `0..=spawn_window`.
    pub spawn_window: u32,
    /// Waypoint jitter as a fraction of the field-of-view half extents.
    pub jitter: f64,
    /// Probability of walking a corridor backwards.
    pub reverse_prob: f64,
    pub waypoints: usize,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            model: PathModel::Corridor,
            speed: [0.03, 0.05],
            spawn_window: 100,
            jitter: 0.5,
            reverse_prob: 0.5,
            waypoints: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSpec {
    pub n_f: usize,
    pub sectors: usize,
    /// Expected norm of a person's base vector.
    pub base_scale: f64,
    /// Expected norm of each per-sector offset.
    pub offset_scale: f64,
    pub sigma_f: f64,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self {
            n_f: 32,
            sectors: 4,
            base_scale: 1.0,
            offset_scale: 0.5,
            sigma_f: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSpec {
    /// Box noise, pixels.
    pub sigma_z: f64,
    pub miss_prob: f64,
    /// Mean clutter detections per sensor per frame.
    pub clutter_rate: f64,
    /// Person width and height, world units.
    pub person_size: [f64; 2],
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self {
            sigma_z: 2.0,
            miss_prob: 0.05,
            clutter_rate: 0.0,
            person_size: [0.5, 1.7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeypointSpec {
    /// Keypoint position noise, pixels.
    pub sigma: f64,
    /// Probability that a keypoint's confidence drops to zero.
    pub dropout: f64,
}

impl Default for KeypointSpec {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            dropout: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub n_people: usize,
    pub sensors: Vec<SensorLayout>,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub embedding: EmbeddingSpec,
    #[serde(default)]
    pub detection: DetectionSpec,
    #[serde(default)]
    pub keypoints: KeypointSpec,
}

impl WorldSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: WorldSpec =
            toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("world spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.sensors.is_empty() {
            return bad("at least one sensor is required".into());
        }
        let mut ids: Vec<u32> = self.sensors.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.sensors.len() {
            return bad("sensor ids must be unique".into());
        }
        for s in &self.sensors {
            let [x0, y0, x1, y1] = s.fov;
            if !(x0 < x1 && y0 < y1) || !s.fov.iter().all(|v| v.is_finite()) {
                return bad(format!("sensor {} has an empty field of view", s.id));
            }
            if !(s.px_per_unit > 0.0 && s.px_per_unit.is_finite()) {
                return bad(format!("sensor {} px_per_unit must be > 0", s.id));
            }
            if !s.view_dir_deg.is_finite() {
                return bad(format!("sensor {} view direction must be finite", s.id));
            }
            if s.id > u16::MAX as u32 {
                return bad(format!("sensor id {} exceeds 65535", s.id));
            }
        }
        let t = &self.trajectory;
        if !(t.speed[0] > 0.0 && t.speed[0] <= t.speed[1] && t.speed[1].is_finite()) {
            return bad("speed must satisfy 0 < min <= max".into());
        }
        if !(0.0..=1.0).contains(&t.reverse_prob) || !(t.jitter >= 0.0 && t.jitter <= 1.0) {
            return bad("reverse_prob and jitter must be in [0, 1]".into());
        }
        if t.model == PathModel::RandomWaypoints && t.waypoints < 2 {
            return bad("random waypoints need at least 2 waypoints".into());
        }
        let e = &self.embedding;
        if e.n_f == 0 || e.sectors == 0 {
            return bad("n_f and sectors must be >= 1".into());
        }
        let d = &self.detection;
        let k = &self.keypoints;
        let sigmas = [e.base_scale, e.offset_scale, e.sigma_f, d.sigma_z, d.clutter_rate, k.sigma];
        if !sigmas.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return bad("scales, sigmas and rates must be finite and >= 0".into());
        }
        if !(0.0..=1.0).contains(&d.miss_prob) || !(0.0..=1.0).contains(&k.dropout) {
            return bad("probabilities must be in [0, 1]".into());
        }
        if !(d.person_size[0] > 0.0 && d.person_size[1] > 0.0) {
            return bad("person size must be positive".into());
        }
        Ok(())
    }

    pub fn sensor_ids(&self) -> Vec<u32> {
        self.sensors.iter().map(|s| s.id).collect()
    }
}

/// True state of one person seen by one sensor in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthRow {
    pub sensor_id: u32,
    pub frame: u32,
    pub gt_id: u32,
    pub bbox: BBox,
    /// Walking direction in the world plane, radians.
    pub heading: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub frames: u32,
    pub sensors: Vec<u32>,
    pub rows: Vec<GroundTruthRow>,
}

/// Signed angle `a - b` wrapped into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Orientation sector of a heading relative to the sensor's view direction.
/// Sector 0 faces away from the sensor; sectors advance counter-clockwise.
pub fn sector_of(relative: f64, sectors: usize) -> usize {
    let width = TAU / sectors as f64;
    let shifted = (relative + width / 2.0).rem_euclid(TAU);
    ((shifted / width) as usize).min(sectors - 1)
}

/// Torso keypoints of a person in `bbox` at `relative` heading. Apparent
/// shoulder width follows the cosine of the angle to the optical axis, signed
/// so that a person facing away has the right shoulder on the image right.
pub fn project_torso(bbox: &BBox, relative: f64) -> TorsoKeypoints {
    let half = SHOULDER_FRACTION * bbox.w * relative.cos();
    let torso = TORSO_FRACTION * bbox.h;
    let sy = bbox.y - torso / 2.0;
    let hy = bbox.y + torso / 2.0;
    TorsoKeypoints {
        right_shoulder: Keypoint::new(bbox.x + half, sy, 1.0),
        left_shoulder: Keypoint::new(bbox.x - half, sy, 1.0),
        right_hip: Keypoint::new(bbox.x + HIP_FRACTION * half, hy, 1.0),
        left_hip: Keypoint::new(bbox.x - HIP_FRACTION * half, hy, 1.0),
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    let s = scale / (n as f64).sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            s * z
        })
        .collect()
}

fn add_noise(rng: &mut ChaCha8Rng, v: &mut [f64], sigma: f64) {
    if sigma > 0.0 {
        let n = Normal::new(0.0, sigma).expect("sigma checked");
        v.iter_mut().for_each(|x| *x += n.sample(&mut *rng));
    }
}

struct Walker {
    start: u32,
    speed: f64,
    waypoints: Vec<[f64; 2]>,
}

/// World position and heading per frame.
type Path = Vec<([f64; 2], f64)>;

impl Walker {
    /// World positions and headings from the start frame until the last waypoint.
    fn path(&self) -> Path {
        let mut out = Vec::new();
        let mut pos = self.waypoints[0];
        let mut next = 1;
        let mut heading = 0.0;
        while next < self.waypoints.len() {
            let mut budget = self.speed;
            while budget > 0.0 && next < self.waypoints.len() {
                let target = self.waypoints[next];
                let (dx, dy) = (target[0] - pos[0], target[1] - pos[1]);
                let dist = dx.hypot(dy);
                if dist > 1e-12 {
                    heading = dy.atan2(dx);
                }
                if dist <= budget {
                    pos = target;
                    budget -= dist;
                    next += 1;
                } else {
                    pos = [pos[0] + dx / dist * budget, pos[1] + dy / dist * budget];
                    budget = 0.0;
                }
            }
            out.push((pos, heading));
        }
        out
    }
}

fn in_fov(p: [f64; 2], fov: &[f64; 4]) -> bool {
    p[0] >= fov[0] && p[0] <= fov[2] && p[1] >= fov[1] && p[1] <= fov[3]
}

fn plan_walkers(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Vec<Walker> {
    let t = &spec.trajectory;
    let bounds = spec.sensors.iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, s| {
            [
                b[0].min(s.fov[0]),
                b[1].min(s.fov[1]),
                b[2].max(s.fov[2]),
                b[3].max(s.fov[3]),
            ]
        },
    );
    (0..spec.n_people)
        .map(|_| {
            let start = rng.random_range(0..=t.spawn_window);
            let speed = rng.random_range(t.speed[0]..=t.speed[1]);
            let waypoints = match t.model {
                PathModel::Corridor => {
                    let mut pts: Vec<[f64; 2]> = spec
                        .sensors
                        .iter()
                        .map(|s| {
                            let c = [(s.fov[0] + s.fov[2]) / 2.0, (s.fov[1] + s.fov[3]) / 2.0];
                            let h = [(s.fov[2] - s.fov[0]) / 2.0, (s.fov[3] - s.fov[1]) / 2.0];
                            [
                                c[0] + t.jitter * h[0] * rng.random_range(-1.0..=1.0),
                                c[1] + t.jitter * h[1] * rng.random_range(-1.0..=1.0),
                            ]
                        })
                        .collect();
                    if rng.random_bool(t.reverse_prob) {
                        pts.reverse();
                    }
                    let first = &spec.sensors[0].fov;
                    let margin = (first[2] - first[0]).max(first[3] - first[1]);
                    let extend = |from: [f64; 2], toward: [f64; 2]| {
                        let (dx, dy) = (from[0] - toward[0], from[1] - toward[1]);
                        let d = dx.hypot(dy);
                        if d < 1e-9 {
                            [from[0] - margin, from[1]]
                        } else {
                            [from[0] + dx / d * margin, from[1] + dy / d * margin]
                        }
                    };
                    let entry = if pts.len() > 1 {
                        extend(pts[0], pts[1])
                    } else {
                        [pts[0][0] - margin, pts[0][1]]
                    };
                    let last = pts.len() - 1;
                    let exit = if pts.len() > 1 {
                        extend(pts[last], pts[last - 1])
                    } else {
                        [pts[0][0] + margin, pts[0][1]]
                    };
                    let mut all = vec![entry];
                    all.extend(pts);
                    all.push(exit);
                    all
                }
                PathModel::RandomWaypoints => (0..t.waypoints)
                    .map(|_| {
                        [
                            rng.random_range(bounds[0]..=bounds[2]),
                            rng.random_range(bounds[1]..=bounds[3]),
                        ]
                    })
                    .collect(),
            };
            Walker {
                start,
                speed,
                waypoints,
            }
        })
        .collect()
}

fn unit_sphere(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| -> f64 { StandardNormal.sample(&mut *rng) }).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm * radius).collect();
        }
    }
}

/// Simulates `n_frames` frames of `spec`. Reproducible from `(spec, seed)`.
pub fn generate(spec: &WorldSpec, n_frames: u32, seed: u64) -> Result<(DetectionSet, GroundTruth)> {
    spec.validate()?;
    let mut rng = substream(seed, "scenario", &[]);
    let e = &spec.embedding;
    let bases: Vec<Vec<f64>> = (0..spec.n_people)
        .map(|_| gaussian_vec(&mut rng, e.n_f, e.base_scale))
        .collect();
    let offsets: Vec<Vec<Vec<f64>>> = (0..spec.n_people)
        .map(|_| {
            (0..e.sectors)
                .map(|_| gaussian_vec(&mut rng, e.n_f, e.offset_scale))
                .collect()
        })
        .collect();
    let mean_norm = if bases.is_empty() {
        e.base_scale
    } else {
        bases
            .iter()
            .map(|b| b.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum::<f64>()
            / bases.len() as f64
    };
    let paths: Vec<(u32, Path)> = plan_walkers(spec, &mut rng)
        .into_iter()
        .map(|w| (w.start, w.path()))
        .collect();

    let d = &spec.detection;
    let box_noise = Normal::new(0.0, d.sigma_z).expect("checked");
    let kp_noise = Normal::new(0.0, spec.keypoints.sigma).expect("checked");
    let clutter = (d.clutter_rate > 0.0).then(|| Poisson::new(d.clutter_rate).expect("checked"));
    let mut detections = Vec::new();
    let mut rows = Vec::new();

    for frame in 0..n_frames {
        for s in &spec.sensors {
            let view = s.view_dir_deg.to_radians();
            for (pid, (start, path)) in paths.iter().enumerate() {
                let Some(step) = frame.checked_sub(*start) else { continue };
                let Some(&(pos, heading)) = path.get(step as usize) else { continue };
                if !in_fov(pos, &s.fov) {
                    continue;
                }
                let truth = BBox::new(
                    (pos[0] - s.fov[0]) * s.px_per_unit,
                    (pos[1] - s.fov[1]) * s.px_per_unit,
                    d.person_size[0] * s.px_per_unit,
                    d.person_size[1] * s.px_per_unit,
                );
                rows.push(GroundTruthRow {
                    sensor_id: s.id,
                    frame,
                    gt_id: pid as u32,
                    bbox: truth,
                    heading,
                });
                if rng.random_bool(d.miss_prob) {
                    continue;
                }
                let bbox = BBox::new(
                    truth.x + box_noise.sample(&mut rng),
                    truth.y + box_noise.sample(&mut rng),
                    (truth.w + box_noise.sample(&mut rng)).max(1.0),
                    (truth.h + box_noise.sample(&mut rng)).max(1.0),
                );
                let relative = wrap_angle(heading - view);
                let sector = sector_of(relative, e.sectors);
                let mut embedding: Vec<f64> = bases[pid]
                    .iter()
                    .zip(&offsets[pid][sector])
                    .map(|(b, o)| b + o)
                    .collect();
                add_noise(&mut rng, &mut embedding, e.sigma_f);
                let keypoints = noisy_torso(&mut rng, &bbox, relative, &kp_noise, spec.keypoints.dropout);
                detections.push(Detection {
                    sensor_id: s.id,
                    frame,
                    bbox,
                    embedding,
                    keypoints,
                    gt_id: Some(pid as u32),
                });
            }
            if let Some(c) = &clutter {
                let n = c.sample(&mut rng) as usize;
                let (wpx, hpx) = (
                    (s.fov[2] - s.fov[0]) * s.px_per_unit,
                    (s.fov[3] - s.fov[1]) * s.px_per_unit,
                );
                for _ in 0..n {
                    let bbox = BBox::new(
                        rng.random_range(0.0..=wpx),
                        rng.random_range(0.0..=hpx),
                        d.person_size[0] * s.px_per_unit,
                        d.person_size[1] * s.px_per_unit,
                    );
                    let relative = rng.random_range(-PI..PI);
                    let keypoints = noisy_torso(&mut rng, &bbox, relative, &kp_noise, spec.keypoints.dropout);
                    detections.push(Detection {
                        sensor_id: s.id,
                        frame,
                        bbox,
                        embedding: unit_sphere(&mut rng, e.n_f, mean_norm),
                        keypoints,
                        gt_id: None,
                    });
                }
            }
        }
    }
    let sensors = spec.sensor_ids();
    Ok((
        DetectionSet {
            n_f: e.n_f,
            frames: n_frames,
            sensors: sensors.clone(),
            detections,
        },
        GroundTruth {
            frames: n_frames,
            sensors,
            rows,
        },
    ))
}

fn noisy_torso(
    rng: &mut ChaCha8Rng,
    bbox: &BBox,
    relative: f64,
    noise: &Normal<f64>,
    dropout: f64,
) -> TorsoKeypoints {
    let mut kp = project_torso(bbox, relative).as_array();
    for k in kp.iter_mut() {
        k.x += noise.sample(&mut *rng);
        k.y += noise.sample(&mut *rng);
        if dropout > 0.0 && rng.random_bool(dropout) {
            k.c = 0.0;
        }
    }
    TorsoKeypoints::from_array(kp)
}
