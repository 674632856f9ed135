//! Labeled re-identification features with orientation-dependent appearance.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{project_torso, sector_of};
use crate::error::{Error, Result};
use crate::metrics::LabeledFeature;
use crate::orientation::s2t_ratio;
use crate::rng::substream;
use crate::types::BBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReidSpec {
    pub identities: usize,
    pub samples_per_identity: usize,
    pub n_f: usize,
    pub sectors: usize,
    pub base_scale: f64,
    pub offset_scale: f64,
    pub sigma_f: f64,
    /// Pixel noise on the keypoints the ratio is computed from.
    pub keypoint_sigma: f64,
    /// Fraction of each identity's samples held out as queries.
    pub query_fraction: f64,
}

impl Default for ReidSpec {
    fn default() -> Self {
        Self {
            identities: 100,
            samples_per_identity: 200,
            n_f: 32,
            sectors: 4,
            base_scale: 1.0,
            offset_scale: 1.0,
            sigma_f: 0.3,
            keypoint_sigma: 1.0,
            query_fraction: 0.2,
        }
    }
}

impl ReidSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ReidSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.identities == 0 || self.samples_per_identity < 2 || self.n_f == 0 || self.sectors == 0 {
            return Err(Error::InvalidSpec(
                "need identities >= 1, samples_per_identity >= 2, n_f >= 1, sectors >= 1".into(),
            ));
        }
        let scales = [self.base_scale, self.offset_scale, self.sigma_f, self.keypoint_sigma];
        if !scales.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidSpec("scales must be finite and >= 0".into()));
        }
        if !(self.query_fraction > 0.0 && self.query_fraction < 1.0) {
            return Err(Error::InvalidSpec("query_fraction must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Draws `(gallery, queries)`: every identity's samples are split, the first
/// `1 - query_fraction` into the gallery and the rest into the queries.
pub fn reid_features(spec: &ReidSpec, seed: u64) -> Result<(Vec<LabeledFeature>, Vec<LabeledFeature>)> {
    spec.validate()?;
    let mut rng = substream(seed, "reid", &[]);
    let per_dim = |scale: f64| scale / (spec.n_f as f64).sqrt();
    let vector = |rng: &mut rand_chacha::ChaCha8Rng, scale: f64| -> Vec<f64> {
        (0..spec.n_f)
            .map(|_| per_dim(scale) * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect()
    };
    let noise = Normal::new(0.0, spec.sigma_f).expect("validated");
    let kp_noise = Normal::new(0.0, spec.keypoint_sigma).expect("validated");
    let bbox = BBox::new(0.0, 0.0, 40.0, 120.0);
    let n_query = ((spec.samples_per_identity as f64 * spec.query_fraction).round() as usize)
        .clamp(1, spec.samples_per_identity - 1);
    let mut gallery = Vec::new();
    let mut queries = Vec::new();
    for id in 0..spec.identities as u32 {
        let base = vector(&mut rng, spec.base_scale);
        let offsets: Vec<Vec<f64>> = (0..spec.sectors).map(|_| vector(&mut rng, spec.offset_scale)).collect();
        for k in 0..spec.samples_per_identity {
            let relative = rng.random_range(-PI..PI);
            let sector = sector_of(relative, spec.sectors);
            let feature: Vec<f64> = base
                .iter()
                .zip(&offsets[sector])
                .map(|(b, o)| b + o + noise.sample(&mut rng))
                .collect();
            let mut kp = project_torso(&bbox, relative).as_array();
            for p in kp.iter_mut() {
                p.x += kp_noise.sample(&mut rng);
                p.y += kp_noise.sample(&mut rng);
            }
            let ratio = s2t_ratio(&crate::types::TorsoKeypoints::from_array(kp))
                .map(|r| r.value())
                .unwrap_or(0.0);
            let f = LabeledFeature { id, feature, ratio };
            if k < spec.samples_per_identity - n_query {
                gallery.push(f);
            } else {
                queries.push(f);
            }
        }
    }
    Ok((gallery, queries))
}
