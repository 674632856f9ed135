use dmtrack::motion::{KalmanState, MotionModel};
use dmtrack::netsim::SensorNode;
use dmtrack::orientation::BinBoundaries;
use dmtrack::within_sensor::{
    joint_assignment_likelihood, softmin, step_particle, FrameInput, Particle, Target, TrackState,
};
use dmtrack::{BBox, BinnedGallery, Cues, Detection, RunConfig, TorsoKeypoints};
use proptest::prelude::*;
use rand::SeedableRng;

const N_F: usize = 4;

fn detection(frame: u32, x: f64, y: f64, embedding: Vec<f64>) -> Detection {
    Detection {
        sensor_id: 0,
        frame,
        bbox: BBox::new(x, y, 30.0, 80.0),
        embedding,
        keypoints: TorsoKeypoints::default(),
        gt_id: None,
    }
}

fn track(id: u32, x: f64, y: f64, embedding: &[f64]) -> TrackState {
    let mut gallery = BinnedGallery::new(2, N_F);
    gallery.absorb(embedding, 0).unwrap();
    TrackState {
        id,
        kalman: KalmanState::from_bbox(&BBox::new(x, y, 30.0, 80.0)),
        effective: gallery.clone(),
        gallery,
        remote: None,
        first_frame: 0,
        last_seen: 0,
        misses: 0,
        alive: true,
    }
}

fn point() -> impl Strategy<Value = (f64, f64, Vec<f64>)> {
    (0.0f64..400.0, 0.0f64..400.0, prop::collection::vec(-1.0f64..1.0, N_F))
}

/// Random frames of detections with a few people drifting around.
fn frames() -> impl Strategy<Value = Vec<Vec<Detection>>> {
    prop::collection::vec(prop::collection::vec(point(), 0..6), 1..25).prop_map(|fs| {
        fs.into_iter()
            .enumerate()
            .map(|(f, pts)| {
                pts.into_iter()
                    .map(|(x, y, e)| detection(f as u32, x, y, e))
                    .collect()
            })
            .collect()
    })
}

fn cfg(seed: u64, cues: Cues) -> RunConfig {
    RunConfig {
        n_f: N_F,
        bins: 2,
        n_particles: 6,
        seed,
        cues,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn softmin_sums_to_one_and_ignores_shifts(
        d in prop::collection::vec(0.0f64..50.0, 1..10),
        shift in -100.0f64..100.0,
        temp in 0.1f64..20.0,
    ) {
        let p = softmin(&d, temp);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let shifted: Vec<f64> = d.iter().map(|v| v + shift).collect();
        for (a, b) in p.iter().zip(softmin(&shifted, temp)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn joint_likelihood_sums_to_one_and_follows_track_order(
        det in point(),
        tracks in prop::collection::vec(point(), 1..6),
        appearance_only in any::<bool>(),
        rotate in 0usize..6,
    ) {
        let cues = if appearance_only { Cues::AppearanceOnly } else { Cues::PositionAppearance };
        let c = cfg(0, cues);
        let m = MotionModel::from_config(&c);
        let det = detection(1, det.0, det.1, det.2);
        let states: Vec<TrackState> = tracks
            .iter()
            .enumerate()
            .map(|(i, (x, y, e))| {
                let mut t = track(i as u32, *x, *y, e);
                t.kalman = t.kalman.predict(&m);
                t
            })
            .collect();
        let refs: Vec<&TrackState> = states.iter().collect();
        let p = joint_assignment_likelihood(&det, &refs, &c, &m).unwrap();
        prop_assert_eq!(p.len(), states.len() + 1);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);

        let k = rotate % states.len();
        let mut rotated = refs.clone();
        rotated.rotate_left(k);
        let q = joint_assignment_likelihood(&det, &rotated, &c, &m).unwrap();
        for i in 0..states.len() {
            prop_assert!((q[i] - p[(i + k) % states.len()]).abs() <= 1e-12);
        }
        prop_assert!((q[states.len()] - p[states.len()]).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_frame_assignment_is_one_to_one(frames in frames(), seed in any::<u64>()) {
        let c = cfg(seed, Cues::PositionAppearance);
        let m = MotionModel::from_config(&c);
        let bounds = BinBoundaries::uniform(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut particles = vec![Particle::new(0.5), Particle::new(0.5)];
        for (f, dets) in frames.iter().enumerate() {
            let input = FrameInput::new(f as u32, dets, &bounds);
            for p in &mut particles {
                let a = step_particle(p, &input, &c, &m, &mut rng).unwrap();
                prop_assert_eq!(a.entries.len(), dets.len());
                let mut ids: Vec<u32> = a
                    .entries
                    .iter()
                    .filter_map(|t| match t {
                        Target::Track(id) => Some(*id),
                        Target::NewTrack => None,
                    })
                    .collect();
                ids.sort_unstable();
                let n = ids.len();
                ids.dedup();
                prop_assert_eq!(ids.len(), n, "two detections share a track in frame {}", f);
            }
        }
    }

    #[test]
    fn same_seed_same_evolution(frames in frames(), seed in any::<u64>()) {
        let c = cfg(seed, Cues::PositionAppearance);
        let mut a = SensorNode::new(0, c.clone());
        let mut b = SensorNode::new(0, c);
        let (oa, ob) = (a.run_batch(&frames).unwrap(), b.run_batch(&frames).unwrap());
        prop_assert_eq!(oa, ob);
        prop_assert_eq!(a.filter().particles(), b.filter().particles());
    }
}
