//! Shoulder-to-torso (S2T) orientation descriptor and orientation bins.
//!
//! The ratio is the confidence-weighted shoulder/hip width divided by the
//! confidence-weighted torso length. Image `y` grows downward, so the torso length
//! is taken as hips minus shoulders and an upright person has a positive length.
//! A positive ratio means the right shoulder appears on the right of the image,
//! i.e. the person faces away from the camera.

use crate::error::{Error, Result};
use crate::types::{BinMode, TorsoKeypoints};

const MIN_TORSO_PX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct S2TRatio(f64);

impl S2TRatio {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::NonFiniteRatio)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn s2t_ratio(kp: &TorsoKeypoints) -> Result<S2TRatio> {
    let (rs, ls, rh, lh) = (
        kp.right_shoulder,
        kp.left_shoulder,
        kp.right_hip,
        kp.left_hip,
    );
    let total = rs.c + ls.c + rh.c + lh.c;
    if total <= 0.0 {
        return Err(Error::AllOccluded);
    }
    let width = ((rs.c + ls.c) * (rs.x - ls.x) + (rh.c + lh.c) * (rh.x - lh.x)) / total;
    let height = ((rs.c + rh.c) * (rh.y - rs.y) + (ls.c + lh.c) * (lh.y - ls.y)) / total;
    if height.abs() < MIN_TORSO_PX {
        return Err(Error::DegenerateTorso(height));
    }
    S2TRatio::new(width / height)
}

/// Bin edges `b_0 < b_1 < ... < b_L`; bin `l` is the half-open `[b_l, b_{l+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinBoundaries {
    edges: Vec<f64>,
}

impl BinBoundaries {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidConfig("need at least two bin edges".into()));
        }
        if edges.iter().any(|e| e.is_nan()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "bin edges must be strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    /// `bins` equal-width bins over `[-1, 1]`, outer edges open to infinity.
    pub fn uniform(bins: usize) -> Self {
        assert!(bins >= 1, "bin count must be positive");
        let mut edges = Vec::with_capacity(bins + 1);
        edges.push(f64::NEG_INFINITY);
        for l in 1..bins {
            edges.push(-1.0 + 2.0 * l as f64 / bins as f64);
        }
        edges.push(f64::INFINITY);
        Self { edges }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Index of the bin holding `r`. Values equal to an interior edge go right; values
/// outside finite outer edges are clamped to the outermost bins.
pub fn bin_index(r: S2TRatio, b: &BinBoundaries) -> usize {
    let interior = &b.edges[1..b.edges.len() - 1];
    interior.partition_point(|&e| e <= r.value())
}

pub fn fit_bins(ratios: &[S2TRatio], bins: usize, mode: BinMode) -> Result<BinBoundaries> {
    if bins == 0 {
        return Err(Error::InvalidConfig("L must be ≥ 1".into()));
    }
    match mode {
        BinMode::Uniform => Ok(BinBoundaries::uniform(bins)),
        BinMode::Kmeans => {
            let values: Vec<f64> = ratios.iter().map(|r| r.value()).collect();
            let centers = kmeans_1d(&values, bins)?;
            let mut edges = Vec::with_capacity(bins + 1);
            edges.push(f64::NEG_INFINITY);
            edges.extend(centers.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            edges.push(f64::INFINITY);
            BinBoundaries::new(edges)
        }
    }
}

/// Globally optimal 1-D k-means. Returns the sorted cluster centers.
///
/// Optimal clusters of sorted scalars are contiguous runs, so this is a
/// partition DP; the optimal split point is monotone in the prefix length, which
/// lets each layer be filled by divide and conquer in `O(n log n)`.
pub fn kmeans_1d(values: &[f64], k: usize) -> Result<Vec<f64>> {
    let mut xs: Vec<f64> = values.to_vec();
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteRatio);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let distinct = 1 + xs.windows(2).filter(|w| w[0] != w[1]).count();
    if xs.is_empty() || distinct < k {
        return Err(Error::TooFewSamples {
            needed: k,
            got: if xs.is_empty() { 0 } else { distinct },
        });
    }
    let n = xs.len();
    let shift = xs.iter().sum::<f64>() / n as f64;
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, &x) in xs.iter().enumerate() {
        let c = x - shift;
        s1[i + 1] = s1[i] + c;
        s2[i + 1] = s2[i] + c * c;
    }
    let sse = |i: usize, j: usize| -> f64 {
        let len = (j - i) as f64;
        let s = s1[j] - s1[i];
        (s2[j] - s2[i]) - s * s / len
    };

    // cost[j]: best SSE of x[..j] with the current number of clusters.
    let mut cost: Vec<f64> = (0..=n).map(|j| if j == 0 { 0.0 } else { sse(0, j) }).collect();
    // split[c][j]: start index of the last cluster in the best c+1 clustering of x[..j].
    let mut split = vec![vec![0usize; n + 1]; k];

    for layer in 1..k {
        let mut next = vec![f64::INFINITY; n + 1];
        let mut arg = vec![0usize; n + 1];
        fill_layer(
            layer + 1,
            n,
            layer,
            n - 1,
            &cost,
            &sse,
            &mut next,
            &mut arg,
        );
        cost = next;
        split[layer] = arg;
    }

    let mut centers = Vec::with_capacity(k);
    let mut end = n;
    for layer in (0..k).rev() {
        let start = if layer == 0 { 0 } else { split[layer][end] };
        let len = (end - start) as f64;
        centers.push((s1[end] - s1[start]) / len + shift);
        end = start;
    }
    centers.reverse();
    Ok(centers)
}

/// Fills `next[j]` for `j in lo..=hi` knowing the optimal split lies in
/// `opt_lo..=opt_hi`. Ties keep the smallest split.
#[allow(clippy::too_many_arguments)]
fn fill_layer(
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
    prev: &[f64],
    sse: &dyn Fn(usize, usize) -> f64,
    next: &mut [f64],
    arg: &mut [usize],
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_i = opt_lo;
    for i in opt_lo..=opt_hi.min(mid - 1) {
        let c = prev[i] + sse(i, mid);
        if c < best {
            best = c;
            best_i = i;
        }
    }
    next[mid] = best;
    arg[mid] = best_i;
    if mid > lo {
        fill_layer(lo, mid - 1, opt_lo, best_i, prev, sse, next, arg);
    }
    fill_layer(mid + 1, hi, best_i, opt_hi, prev, sse, next, arg);
}
