use std::collections::BTreeMap;

use dmtrack::assignment::{assignment_cost, min_cost_assignment};
use dmtrack::cross_sensor::{gated_assignment, resolve_identities, MatchPair, MatchSet};
use dmtrack::Identity;
use proptest::prelude::*;

/// Every complete one-to-one assignment of the smaller side, as row -> column.
fn all_assignments(rows: usize, cols: usize) -> Vec<Vec<Option<usize>>> {
    fn go(r: usize, rows: usize, cols: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if r == rows {
            if cur.iter().flatten().count() == rows.min(cols) {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..cols {
            if !cur.contains(&Some(c)) {
                cur.push(Some(c));
                go(r + 1, rows, cols, cur, out);
                cur.pop();
            }
        }
        if rows > cols {
            cur.push(None);
            go(r + 1, rows, cols, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, rows, cols, &mut Vec::new(), &mut out);
    out
}

fn matrix(max: usize, entry: impl Strategy<Value = f64> + Clone) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max, 1..=max).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(entry.clone(), c), r)
    })
}

fn match_sets() -> impl Strategy<Value = Vec<MatchSet>> {
    let pair = (0u32..4, 0u32..6, 0u32..4, 0u32..6).prop_filter_map("distinct sensors", |(sa, ta, sb, tb)| {
        (sa != sb).then(|| MatchPair {
            track_a: Identity::local(sa, ta),
            track_b: Identity::local(sb, tb),
            distance: 0.1,
        })
    });
    prop::collection::vec(prop::collection::vec(pair, 0..5).prop_map(|pairs| MatchSet { pairs }), 0..5)
}

proptest! {
    #[test]
    fn hungarian_matches_exhaustive_minimum(cost in matrix(7, (0u32..50).prop_map(f64::from))) {
        let (rows, cols) = (cost.len(), cost[0].len());
        prop_assume!(rows * cols <= 30);
        let best = all_assignments(rows, cols)
            .iter()
            .map(|a| assignment_cost(&cost, a))
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(assignment_cost(&cost, &min_cost_assignment(&cost)), best);
    }

    #[test]
    fn min_distance_is_max_similarity(cost in matrix(6, 0.0f64..3.0), gamma in 0.1f64..5.0) {
        let (rows, cols) = (cost.len(), cost[0].len());
        let product = |a: &Vec<Option<usize>>| {
            a.iter()
                .enumerate()
                .filter_map(|(r, c)| c.map(|c| (-gamma * cost[r][c]).exp()))
                .product::<f64>()
        };
        let all = all_assignments(rows, cols);
        let argmax = all.iter().max_by(|a, b| product(a).total_cmp(&product(b))).unwrap();
        let chosen = min_cost_assignment(&cost);
        prop_assert!(product(&chosen) >= product(argmax) * (1.0 - 1e-12));
        prop_assert!((assignment_cost(&cost, &chosen) - assignment_cost(&cost, argmax)).abs() <= 1e-9);
    }

    #[test]
    fn raising_the_threshold_keeps_pairs(cost in matrix(6, 0.0f64..2.0), t1 in 0.0f64..2.0, dt in 0.0f64..1.0) {
        let low = gated_assignment(&cost, t1);
        let high = gated_assignment(&cost, t1 + dt);
        for p in &low {
            prop_assert!(high.contains(p), "{p:?} lost when raising {t1} to {}", t1 + dt);
            prop_assert!(cost[p.0][p.1] <= t1);
        }
    }

    #[test]
    fn resolution_ignores_processing_order(sets in match_sets(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::{Rng as _, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let reference = resolve_identities(&sets);
        let mut shuffled = sets.clone();
        shuffled.shuffle(&mut rng);
        for s in &mut shuffled {
            s.pairs.shuffle(&mut rng);
            for p in &mut s.pairs {
                if rng.random_bool(0.5) {
                    std::mem::swap(&mut p.track_a, &mut p.track_b);
                }
            }
        }
        prop_assert_eq!(&resolve_identities(&shuffled), &reference);

        // every component is labelled by its smallest member
        let mut smallest: BTreeMap<_, _> = BTreeMap::new();
        for (k, g) in &reference {
            let e = smallest.entry(*g).or_insert(*k);
            if k < e {
                *e = *k;
            }
        }
        for (g, k) in smallest {
            prop_assert_eq!(g.key(), k);
        }
    }
}
