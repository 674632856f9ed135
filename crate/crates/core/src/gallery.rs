//! Orientation-binned appearance gallery.
//!
//! Each track keeps one running-mean embedding per orientation bin, so its
//! storage is `O(L * n_f)` no matter how many detections it absorbs.

use crate::error::{Error, Result};
use crate::wire::{put_f32, put_u32, WireReader};

#[derive(Debug, Clone, PartialEq)]
pub struct BinSlot {
    pub mean: Vec<f64>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedGallery {
    n_f: usize,
    bins: Vec<Option<BinSlot>>,
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    sq_l2(a, b).sqrt()
}

fn sq_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl BinnedGallery {
    pub fn new(bins: usize, n_f: usize) -> Self {
        Self {
            n_f,
            bins: vec![None; bins],
        }
    }

    /// Builds a gallery from explicit slots. Panics if a slot has the wrong length
    /// or a zero count.
    pub fn from_slots(n_f: usize, slots: Vec<Option<BinSlot>>) -> Self {
        for s in slots.iter().flatten() {
            assert_eq!(s.mean.len(), n_f, "slot length");
            assert!(s.count > 0, "non-empty slot needs a positive count");
        }
        Self { n_f, bins: slots }
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    pub fn slots(&self) -> &[Option<BinSlot>] {
        &self.bins
    }

    pub fn slot(&self, bin: usize) -> Option<&BinSlot> {
        self.bins.get(bin).and_then(|s| s.as_ref())
    }

    pub fn total_count(&self) -> u64 {
        self.bins.iter().flatten().map(|s| s.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_count() == 0
    }

    pub fn occupied_bins(&self) -> usize {
        self.bins.iter().flatten().count()
    }

    /// Bytes held by the bin means and counts.
    pub fn storage_bytes(&self) -> usize {
        self.bins.len() * std::mem::size_of::<u64>()
            + self.occupied_bins() * self.n_f * std::mem::size_of::<f64>()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_f {
            return Err(Error::DimensionMismatch {
                expected: self.n_f,
                got: len,
            });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &BinnedGallery) -> Result<()> {
        if self.bins.len() != other.bins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bins.len(),
                got: other.bins.len(),
            });
        }
        self.check_dim(other.n_f)
    }

    pub fn absorb(&mut self, embedding: &[f64], bin: usize) -> Result<()> {
        self.check_dim(embedding.len())?;
        if bin >= self.bins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bins.len(),
                got: bin,
            });
        }
        match &mut self.bins[bin] {
            None => {
                self.bins[bin] = Some(BinSlot {
                    mean: embedding.to_vec(),
                    count: 1,
                })
            }
            Some(slot) => {
                slot.count += 1;
                let k = slot.count as f64;
                for (m, e) in slot.mean.iter_mut().zip(embedding) {
                    *m += (e - *m) / k;
                }
            }
        }
        Ok(())
    }

    /// Count-weighted mean over all bins.
    pub fn overall_mean(&self) -> Option<Vec<f64>> {
        let total = self.total_count();
        if total == 0 {
            return None;
        }
        let mut out = vec![0.0; self.n_f];
        for s in self.bins.iter().flatten() {
            let w = s.count as f64 / total as f64;
            for (o, m) in out.iter_mut().zip(&s.mean) {
                *o += w * m;
            }
        }
        Some(out)
    }

    /// Minimum L2 distance from `embedding` to any populated bin mean.
    pub fn nearest_bin_distance(&self, embedding: &[f64]) -> Result<f64> {
        self.check_dim(embedding.len())?;
        self.bins
            .iter()
            .flatten()
            .map(|s| sq_l2(&s.mean, embedding))
            .min_by(|a, b| a.total_cmp(b))
            .map(f64::sqrt)
            .ok_or(Error::BothEmpty)
    }

    pub fn merge(&self, other: &BinnedGallery) -> Result<BinnedGallery> {
        self.check_compatible(other)?;
        let bins = self
            .bins
            .iter()
            .zip(&other.bins)
            .map(|(a, b)| match (a, b) {
                (None, None) => None,
                (Some(s), None) | (None, Some(s)) => Some(s.clone()),
                (Some(a), Some(b)) => {
                    let count = a.count + b.count;
                    let (wa, wb) = (a.count as f64 / count as f64, b.count as f64 / count as f64);
                    let mean = a.mean.iter().zip(&b.mean).map(|(x, y)| wa * x + wb * y).collect();
                    Some(BinSlot { mean, count })
                }
            })
            .collect();
        Ok(BinnedGallery { n_f: self.n_f, bins })
    }

    /// Rounds every mean to `f32`, the precision used on the wire.
    pub fn quantized(&self) -> BinnedGallery {
        let bins = self
            .bins
            .iter()
            .map(|s| {
                s.as_ref().map(|s| BinSlot {
                    mean: s.mean.iter().map(|&v| v as f32 as f64).collect(),
                    count: s.count,
                })
            })
            .collect();
        BinnedGallery { n_f: self.n_f, bins }
    }

    /// Size of [`encode_wire`](Self::encode_wire) output.
    pub fn wire_len(&self) -> usize {
        self.bins.len() * 4 + self.occupied_bins() * self.n_f * 4
    }

    /// One record of `L` slots: `count: u32`, then `n_f` `f32`s when non-empty.
    pub fn encode_wire(&self, out: &mut Vec<u8>) {
        for slot in &self.bins {
            match slot {
                None => put_u32(out, 0),
                Some(s) => {
                    put_u32(out, s.count.min(u32::MAX as u64) as u32);
                    for &v in &s.mean {
                        put_f32(out, v as f32);
                    }
                }
            }
        }
    }

    pub(crate) fn decode_wire(r: &mut WireReader<'_>, bins: usize, n_f: usize) -> Result<Self> {
        let mut slots = Vec::with_capacity(bins);
        for _ in 0..bins {
            let count = r.u32("slot count")?;
            if count == 0 {
                slots.push(None);
                continue;
            }
            if r.remaining() < n_f * 4 {
                return Err(Error::malformed(
                    r.offset(),
                    format!("truncated slot: need {} bytes, have {}", n_f * 4, r.remaining()),
                ));
            }
            let mut mean = Vec::with_capacity(n_f);
            for _ in 0..n_f {
                mean.push(r.f32("slot mean")? as f64);
            }
            slots.push(Some(BinSlot {
                mean,
                count: count as u64,
            }));
        }
        Ok(Self { n_f, bins: slots })
    }
}

/// Distance between two track galleries.
///
/// Uses the bins populated in both galleries, rescaled by `sqrt(L / shared)` so the
/// magnitude matches a full stacked-vector distance. Without a shared bin it falls
/// back to the distance between the count-weighted overall means.
pub fn gallery_distance(g1: &BinnedGallery, g2: &BinnedGallery) -> Result<f64> {
    g1.check_compatible(g2)?;
    if g1.is_empty() || g2.is_empty() {
        return Err(Error::BothEmpty);
    }
    let mut shared = 0usize;
    let mut sum = 0.0;
    for (a, b) in g1.bins.iter().zip(&g2.bins) {
        if let (Some(a), Some(b)) = (a, b) {
            shared += 1;
            sum += sq_l2(&a.mean, &b.mean);
        }
    }
    if shared > 0 {
        Ok(sum.sqrt() * (g1.bins.len() as f64 / shared as f64).sqrt())
    } else {
        let (m1, m2) = (g1.overall_mean().unwrap(), g2.overall_mean().unwrap());
        Ok(l2(&m1, &m2))
    }
}
