//! Re-identification rank-1 accuracy, CLEAR MOT and identity (IDF1) scores.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::assignment::min_cost_assignment;
use crate::error::{Error, Result};
use crate::gallery::BinnedGallery;
use crate::orientation::{bin_index, fit_bins, BinBoundaries, S2TRatio};
use crate::rng::substream;
use crate::types::{BBox, BinMode};

/// Ground truth and hypotheses of one frame of one sensor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalFrame {
    pub sensor_id: u32,
    pub frame: u32,
    pub gt: Vec<(u32, BBox)>,
    pub hyp: Vec<(u64, BBox)>,
}

/// Scores in the column order of the usual tracking tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotScore {
    #[serde(rename = "IDF1")]
    pub idf1: f64,
    #[serde(rename = "IDP")]
    pub idp: f64,
    #[serde(rename = "IDR")]
    pub idr: f64,
    #[serde(rename = "FP")]
    pub fp: u64,
    #[serde(rename = "FN")]
    pub fn_: u64,
    #[serde(rename = "IDs")]
    pub ids: u64,
    #[serde(rename = "MOTA")]
    pub mota: f64,
    #[serde(rename = "MOTP")]
    pub motp: f64,
    #[serde(rename = "GT")]
    pub gt: u64,
    #[serde(rename = "matches")]
    pub matches: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityScores {
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    /// Frames where a ground-truth track and its matched hypothesis overlap.
    pub idtp: u64,
}

const BLOCKED: f64 = 1e9;

/// Matches one frame. `carry` maps gt id to the hypothesis it was last matched
/// to; those pairs are kept when still above the threshold. Returns
/// `(gt index, hyp index)` pairs.
pub fn match_frame(
    frame: &EvalFrame,
    carry: &BTreeMap<u32, u64>,
    iou_threshold: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut gt_used = vec![false; frame.gt.len()];
    let mut hyp_used = vec![false; frame.hyp.len()];
    for (gi, (gid, gbox)) in frame.gt.iter().enumerate() {
        let Some(&hid) = carry.get(gid) else { continue };
        if let Some(hi) = frame.hyp.iter().position(|(h, _)| *h == hid) {
            if !hyp_used[hi] && gbox.iou(&frame.hyp[hi].1) >= iou_threshold {
                pairs.push((gi, hi));
                gt_used[gi] = true;
                hyp_used[hi] = true;
            }
        }
    }
    let gts: Vec<usize> = (0..frame.gt.len()).filter(|&i| !gt_used[i]).collect();
    let hyps: Vec<usize> = (0..frame.hyp.len()).filter(|&j| !hyp_used[j]).collect();
    if !gts.is_empty() && !hyps.is_empty() {
        let cost: Vec<Vec<f64>> = gts
            .iter()
            .map(|&g| {
                hyps.iter()
                    .map(|&h| {
                        let iou = frame.gt[g].1.iou(&frame.hyp[h].1);
                        if iou >= iou_threshold {
                            1.0 - iou
                        } else {
                            BLOCKED
                        }
                    })
                    .collect()
            })
            .collect();
        for (r, c) in min_cost_assignment(&cost).into_iter().enumerate() {
            if let Some(c) = c {
                if cost[r][c] < BLOCKED {
                    pairs.push((gts[r], hyps[c]));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// CLEAR MOT over `frames` in the given order, with identity scores filled in.
pub fn clear_mot(frames: &[EvalFrame], iou_threshold: f64) -> MotScore {
    let mut last: BTreeMap<u32, u64> = BTreeMap::new();
    let (mut fp, mut fn_, mut ids, mut gt, mut matches) = (0u64, 0u64, 0u64, 0u64, 0u64);
    let mut iou_sum = 0.0;
    for f in frames {
        let pairs = match_frame(f, &last, iou_threshold);
        for &(g, h) in &pairs {
            let (gid, hid) = (f.gt[g].0, f.hyp[h].0);
            if last.get(&gid).is_some_and(|&prev| prev != hid) {
                ids += 1;
            }
            last.insert(gid, hid);
            iou_sum += f.gt[g].1.iou(&f.hyp[h].1);
        }
        gt += f.gt.len() as u64;
        matches += pairs.len() as u64;
        fn_ += (f.gt.len() - pairs.len()) as u64;
        fp += (f.hyp.len() - pairs.len()) as u64;
    }
    let errors = (fp + fn_ + ids) as f64;
    let id = identity_scores(frames, iou_threshold);
    MotScore {
        idf1: id.idf1,
        idp: id.idp,
        idr: id.idr,
        fp,
        fn_,
        ids,
        mota: 1.0 - errors / gt.max(1) as f64,
        motp: if matches == 0 {
            0.0
        } else {
            iou_sum / matches as f64
        },
        gt,
        matches,
    }
}

/// IDF1, IDP and IDR from the one-to-one ground-truth-to-hypothesis trajectory
/// matching that maximizes the number of overlapping detections.
pub fn identity_scores(frames: &[EvalFrame], iou_threshold: f64) -> IdentityScores {
    let mut overlap: BTreeMap<(u32, u64), u64> = BTreeMap::new();
    let mut gt_ids = BTreeSet::new();
    let mut hyp_ids = BTreeSet::new();
    let (mut gt_total, mut hyp_total) = (0u64, 0u64);
    for f in frames {
        gt_total += f.gt.len() as u64;
        hyp_total += f.hyp.len() as u64;
        for (g, gb) in &f.gt {
            gt_ids.insert(*g);
            for (h, hb) in &f.hyp {
                if gb.iou(hb) >= iou_threshold {
                    *overlap.entry((*g, *h)).or_default() += 1;
                }
            }
        }
        hyp_ids.extend(f.hyp.iter().map(|(h, _)| *h));
    }
    let gts: Vec<u32> = gt_ids.into_iter().collect();
    let hyps: Vec<u64> = hyp_ids.into_iter().collect();
    let mut idtp = 0;
    if !gts.is_empty() && !hyps.is_empty() {
        let cost: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| {
                hyps.iter()
                    .map(|h| -(overlap.get(&(*g, *h)).copied().unwrap_or(0) as f64))
                    .collect()
            })
            .collect();
        for (r, c) in min_cost_assignment(&cost).into_iter().enumerate() {
            if let Some(c) = c {
                idtp += overlap.get(&(gts[r], hyps[c])).copied().unwrap_or(0);
            }
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let (idp, idr) = (ratio(idtp, hyp_total), ratio(idtp, gt_total));
    let idf1 = if gt_total + hyp_total == 0 {
        0.0
    } else {
        2.0 * idtp as f64 / (gt_total + hyp_total) as f64
    };
    IdentityScores {
        idf1,
        idp,
        idr,
        idtp,
    }
}

/// A re-identification feature with its identity and orientation ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeature {
    pub id: u32,
    pub feature: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GalleryMode {
    /// Every gallery feature kept.
    Full,
    /// One mean per identity.
    Average,
    /// Features split uniformly at random into `bins` means per identity.
    RandomBins { bins: usize, seed: u64 },
    /// One mean per orientation bin, with `bins` bins fitted by k-means on the
    /// gallery ratios.
    OrientationBins(usize),
}

enum Representation {
    Full(BTreeMap<u32, Vec<Vec<f64>>>),
    Binned(BTreeMap<u32, BinnedGallery>),
}

fn build(gallery: &[LabeledFeature], mode: GalleryMode) -> Result<Representation> {
    let n_f = gallery[0].feature.len();
    if let Some(bad) = gallery.iter().find(|g| g.feature.len() != n_f) {
        return Err(Error::DimensionMismatch {
            expected: n_f,
            got: bad.feature.len(),
        });
    }
    let binned = |bins: usize, mut pick: Box<dyn FnMut(&LabeledFeature) -> usize + '_>| {
        let mut out: BTreeMap<u32, BinnedGallery> = BTreeMap::new();
        for g in gallery {
            let bin = pick(g);
            out.entry(g.id)
                .or_insert_with(|| BinnedGallery::new(bins, n_f))
                .absorb(&g.feature, bin)?;
        }
        Ok::<_, Error>(Representation::Binned(out))
    };
    match mode {
        GalleryMode::Full => {
            let mut out: BTreeMap<u32, Vec<Vec<f64>>> = BTreeMap::new();
            for g in gallery {
                out.entry(g.id).or_default().push(g.feature.clone());
            }
            Ok(Representation::Full(out))
        }
        GalleryMode::Average => binned(1, Box::new(|_| 0)),
        GalleryMode::RandomBins { bins, seed } => {
            if bins == 0 {
                return Err(Error::InvalidConfig("bins must be >= 1".into()));
            }
            let mut rng = substream(seed, "random_bins", &[]);
            binned(bins, Box::new(move |_| rng.random_range(0..bins)))
        }
        GalleryMode::OrientationBins(bins) => {
            let ratios = gallery
                .iter()
                .map(|g| S2TRatio::new(g.ratio))
                .collect::<Result<Vec<_>>>()?;
            let edges = fit_bins(&ratios, bins, BinMode::Kmeans)
                .or_else(|_| Ok::<_, Error>(BinBoundaries::uniform(bins)))?;
            let mut it = ratios.into_iter();
            binned(bins, Box::new(move |_| bin_index(it.next().unwrap(), &edges)))
        }
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Fraction of queries whose nearest gallery entry has the query's identity.
/// Ties go to the smaller identity.
pub fn rank1(gallery: &[LabeledFeature], queries: &[LabeledFeature], mode: GalleryMode) -> Result<f64> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    if queries.is_empty() {
        return Ok(0.0);
    }
    let rep = build(gallery, mode)?;
    let mut hits = 0usize;
    for q in queries {
        let mut best: Option<(f64, u32)> = None;
        let mut consider = |d: f64, id: u32| {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, id));
            }
        };
        match &rep {
            Representation::Full(map) => {
                for (id, feats) in map {
                    let d = feats
                        .iter()
                        .map(|f| l2(f, &q.feature))
                        .fold(f64::INFINITY, f64::min);
                    consider(d, *id);
                }
            }
            Representation::Binned(map) => {
                for (id, g) in map {
                    consider(g.nearest_bin_distance(&q.feature)?, *id);
                }
            }
        }
        if best.map(|(_, id)| id) == Some(q.id) {
            hits += 1;
        }
    }
    Ok(hits as f64 / queries.len() as f64)
}

/// Number of stored feature vectors under `mode`.
pub fn gallery_vectors(gallery: &[LabeledFeature], mode: GalleryMode) -> Result<usize> {
    if gallery.is_empty() {
        return Err(Error::EmptyGallery);
    }
    Ok(match build(gallery, mode)? {
        Representation::Full(map) => map.values().map(Vec::len).sum(),
        Representation::Binned(map) => map.values().map(BinnedGallery::occupied_bins).sum(),
    })
}

/// Splits labelled features into `(gallery, queries)` per identity: a seeded
/// random `query_fraction` of each identity's records becomes queries, always
/// leaving at least one in the gallery. Both halves keep input order.
pub fn split_features(
    features: &[LabeledFeature],
    query_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledFeature>, Vec<LabeledFeature>)> {
    if !(0.0..1.0).contains(&query_fraction) {
        return Err(Error::InvalidConfig(format!(
            "query fraction must be in [0, 1), got {query_fraction}"
        )));
    }
    let mut by_id: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, f) in features.iter().enumerate() {
        by_id.entry(f.id).or_default().push(i);
    }
    let mut is_query = vec![false; features.len()];
    for (id, mut idx) in by_id {
        let n = idx.len();
        let n_query = ((n as f64 * query_fraction).round() as usize).min(n - 1);
        let mut rng = substream(seed, "split", &[id as u64]);
        // partial Fisher-Yates: the first n_query slots are a uniform sample
        for k in 0..n_query {
            let j = rng.random_range(k..n);
            idx.swap(k, j);
        }
        for &i in &idx[..n_query] {
            is_query[i] = true;
        }
    }
    let (q, g): (Vec<_>, Vec<_>) = features.iter().zip(is_query).partition(|(_, q)| *q);
    Ok((
        g.into_iter().map(|(f, _)| f.clone()).collect(),
        q.into_iter().map(|(f, _)| f.clone()).collect(),
    ))
}
