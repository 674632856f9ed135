//! Cross-sensor trajectory association from binned galleries.

use std::collections::BTreeMap;

use crate::assignment::min_cost_assignment;
use crate::error::Result;
use crate::gallery::{gallery_distance, BinnedGallery};
use crate::types::{GlobalId, Identity, RunConfig, TrackKey};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackSummary {
    pub identity: Identity,
    pub gallery: BinnedGallery,
    pub first_frame: u32,
    pub last_frame: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub track_a: Identity,
    pub track_b: Identity,
    pub distance: f64,
}

/// One-to-one matches between the tracks of two sensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    pub pairs: Vec<MatchPair>,
}

impl MatchSet {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// `exp(-gamma * gallery_distance)`.
pub fn similarity(a: &TrackSummary, b: &TrackSummary, gamma: f64) -> Result<f64> {
    Ok((-gamma * gallery_distance(&a.gallery, &b.gallery)?).exp())
}

pub fn distance_matrix(sa: &[TrackSummary], sb: &[TrackSummary]) -> Result<Vec<Vec<f64>>> {
    sa.iter()
        .map(|a| {
            sb.iter()
                .map(|b| gallery_distance(&a.gallery, &b.gallery))
                .collect()
        })
        .collect()
}

/// Min-cost matching on `cost`, padded to square with `threshold`, keeping only
/// real pairs that are allowed and within `threshold`. Disallowed entries must
/// already carry a cost above `threshold`.
pub fn gated_assignment(cost: &[Vec<f64>], threshold: f64) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let n = rows.max(cols);
    let square: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < rows && j < cols {
                        cost[i][j]
                    } else {
                        threshold
                    }
                })
                .collect()
        })
        .collect();
    min_cost_assignment(&square)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .filter(|&(i, j)| i < rows && j < cols && cost[i][j] <= threshold)
        .collect()
}

pub fn associate_pair(
    sa: &[TrackSummary],
    sb: &[TrackSummary],
    cfg: &RunConfig,
) -> Result<MatchSet> {
    associate_masked(sa, sb, cfg.cs_threshold, |_, _| true)
}

/// Like [`associate_pair`], but pairs with `allowed(i, j) == false` are never
/// matched.
pub fn associate_masked(
    sa: &[TrackSummary],
    sb: &[TrackSummary],
    threshold: f64,
    allowed: impl Fn(usize, usize) -> bool,
) -> Result<MatchSet> {
    let mut cost = distance_matrix(sa, sb)?;
    let blocked = threshold.abs() * 2.0 + 1e6;
    for (i, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            if !allowed(i, j) {
                *c = blocked;
            }
        }
    }
    let pairs = gated_assignment(&cost, threshold)
        .into_iter()
        .map(|(i, j)| MatchPair {
            track_a: sa[i].identity,
            track_b: sb[j].identity,
            distance: cost[i][j],
        })
        .collect();
    Ok(MatchSet { pairs })
}

/// Ring schedule of sensor pairs: (s0,s1), (s1,s2), ..., (s_{M-1},s0).
pub fn ring_schedule(sensors: &[u32]) -> Vec<(u32, u32)> {
    match sensors.len() {
        0 | 1 => Vec::new(),
        2 => vec![(sensors[0], sensors[1])],
        m => (0..m).map(|i| (sensors[i], sensors[(i + 1) % m])).collect(),
    }
}

/// Persistent union-find over track keys. Each component is named by its
/// smallest member.
#[derive(Debug, Clone, Default)]
pub struct IdentityResolver {
    parent: BTreeMap<TrackKey, TrackKey>,
}

impl IdentityResolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: TrackKey) {
        self.parent.entry(key).or_insert(key);
    }

    pub fn find(&mut self, key: TrackKey) -> TrackKey {
        self.insert(key);
        let mut root = key;
        while self.parent[&root] != root {
            root = self.parent[&root];
        }
        let mut cur = key;
        while cur != root {
            let next = self.parent[&cur];
            self.parent.insert(cur, root);
            cur = next;
        }
        root
    }

    /// Returns true when `a` and `b` were in different components.
    pub fn union(&mut self, a: TrackKey, b: TrackKey) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent.insert(hi, lo);
        true
    }

    pub fn global_id(&mut self, key: TrackKey) -> GlobalId {
        GlobalId::from(self.find(key))
    }

    /// Components keyed by canonical member, each listing its members in order.
    pub fn components(&mut self) -> BTreeMap<TrackKey, Vec<TrackKey>> {
        let keys: Vec<TrackKey> = self.parent.keys().copied().collect();
        let mut out: BTreeMap<TrackKey, Vec<TrackKey>> = BTreeMap::new();
        for k in keys {
            let root = self.find(k);
            out.entry(root).or_default().push(k);
        }
        out
    }

    pub fn apply(&mut self, matches: &MatchSet) {
        for p in &matches.pairs {
            self.union(p.track_a.key(), p.track_b.key());
        }
    }
}

/// Components whose members include two tracks of one sensor.
pub fn same_sensor_conflicts(
    components: &BTreeMap<TrackKey, Vec<TrackKey>>,
) -> Vec<TrackKey> {
    components
        .iter()
        .filter(|(_, members)| {
            members
                .windows(2)
                .any(|w| w[0].sensor_id == w[1].sensor_id)
        })
        .map(|(root, _)| *root)
        .collect()
}

/// Global id of every track appearing in `matches`, by connected component.
pub fn resolve_identities(matches: &[MatchSet]) -> BTreeMap<TrackKey, GlobalId> {
    let mut uf = IdentityResolver::new();
    for m in matches {
        uf.apply(m);
    }
    let components = uf.components();
    for root in same_sensor_conflicts(&components) {
        log::warn!("component {root} holds several tracks of one sensor; kept as one identity");
    }
    components
        .into_iter()
        .flat_map(|(root, members)| members.into_iter().map(move |k| (k, GlobalId::from(root))))
        .collect()
}

/// Every summary in a matched component gets the merge of all member galleries.
pub fn merge_matched_galleries(
    summaries: &[TrackSummary],
    matches: &[MatchSet],
) -> Result<Vec<TrackSummary>> {
    let ids = resolve_identities(matches);
    let mut merged: BTreeMap<GlobalId, BinnedGallery> = BTreeMap::new();
    for s in summaries {
        let Some(gid) = ids.get(&s.identity.key()) else {
            continue;
        };
        let g = match merged.remove(gid) {
            Some(acc) => acc.merge(&s.gallery)?,
            None => s.gallery.clone(),
        };
        merged.insert(*gid, g);
    }
    Ok(summaries
        .iter()
        .map(|s| match ids.get(&s.identity.key()) {
            Some(gid) => TrackSummary {
                gallery: merged[gid].clone(),
                identity: Identity {
                    global_id: Some(*gid),
                    ..s.identity
                },
                ..s.clone()
            },
            None => s.clone(),
        })
        .collect())
}
