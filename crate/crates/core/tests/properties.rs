//! Property suites over randomized inputs.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use socialgest::classifier::{predict_confidence, train_adaboost, train_stump, Stump};
use socialgest::dyad::{decode_message, encode_message, fuse, ConfidenceSet, FusionConfig, Session, SessionInput, WireMessage};
use socialgest::features::{window_features, HAND_STATE_LEFT, HAND_STATE_RIGHT, HANDS_DISTANCE, MAX_OFFSET, SPEED_LEFT, SPEED_RIGHT};
use socialgest::skeleton::validate_frame;
use socialgest::{parse_clip, serialize_clip, synth_clip, BoostModel, GestureLabel, SkeletonFrame, SynthParams, Vec3, WindowConfig};

use common::{brute_force_stump, random_clip, random_message};

fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn window(gesture: usize, seed: u64, noise: f64, start: usize) -> Vec<SkeletonFrame> {
    let params = SynthParams {
        noise_sigma: noise,
        participant_seed: seed % 7,
        ..SynthParams::default()
    };
    let clip = synth_clip(GestureLabel::ATOMIC[gesture], &params, seed).unwrap();
    clip.frames[start..start + 15].to_vec()
}

fn features(frames: &[SkeletonFrame]) -> [f64; 32] {
    window_features(frames, 30.0, &WindowConfig::default()).unwrap().0
}

/// Feature index of the same quantity on the other side of the body.
fn mirror_index(i: usize) -> usize {
    let per_frame = |j: usize| match j {
        0..=5 => j + 6,
        6..=11 => j - 6,
        HAND_STATE_LEFT => HAND_STATE_RIGHT,
        HAND_STATE_RIGHT => HAND_STATE_LEFT,
        _ => j,
    };
    match i {
        SPEED_LEFT => SPEED_RIGHT,
        SPEED_RIGHT => SPEED_LEFT,
        i if i >= MAX_OFFSET => MAX_OFFSET + per_frame(i - MAX_OFFSET),
        i => per_frame(i),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clip_round_trip(seed in any::<u64>()) {
        let clip = random_clip(&mut chacha(seed));
        let bytes = serialize_clip(&clip);
        let back = parse_clip(&bytes).unwrap();
        prop_assert_eq!(&back, &clip);
        prop_assert_eq!(serialize_clip(&back), bytes);
    }

    #[test]
    fn synthesized_frames_are_valid(g in 0usize..8, seed in any::<u64>(), participant in any::<u64>()) {
        let params = SynthParams { participant_seed: participant, ..SynthParams::default() };
        let clip = synth_clip(GestureLabel::ATOMIC[g], &params, seed).unwrap();
        prop_assert_eq!(clip.frames.len(), 210);
        for f in &clip.frames {
            prop_assert!(validate_frame(f).is_ok());
        }
        prop_assert!(clip.validate().is_ok());
    }

    #[test]
    fn left_gestures_mirror_right_ones(pair in 0usize..4, seed in any::<u64>(), participant in any::<u64>()) {
        let params = SynthParams { participant_seed: participant, ..SynthParams::default() };
        let right = synth_clip(GestureLabel::ATOMIC[2 * pair], &params, seed).unwrap();
        let left = synth_clip(GestureLabel::ATOMIC[2 * pair + 1], &params, seed).unwrap();
        for (r, l) in right.frames.iter().zip(&left.frames) {
            prop_assert_eq!(&r.mirrored(), l);
        }
    }

    #[test]
    fn features_ignore_translation(
        g in 0usize..8, seed in 0u64..1000, noise in 0.0..0.03f64, start in 0usize..190,
        dx in -5.0..5.0f64, dy in -5.0..5.0f64, dz in -5.0..5.0f64,
    ) {
        let frames = window(g, seed, noise, start);
        let shift = Vec3::new(dx, dy, dz);
        let moved: Vec<SkeletonFrame> = frames
            .iter()
            .map(|f| SkeletonFrame { joints: f.joints.map(|j| j + shift), ..f.clone() })
            .collect();
        let (a, b) = (features(&frames), features(&moved));
        for i in 0..32 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-12, "feature {}: {} vs {}", i, a[i], b[i]);
        }
    }

    #[test]
    fn features_ignore_scale(
        g in 0usize..8, seed in 0u64..1000, noise in 0.0..0.03f64, start in 0usize..190,
        k in 0.3..3.0f64, cx in -2.0..2.0f64, cy in -2.0..2.0f64, cz in -2.0..2.0f64,
    ) {
        let frames = window(g, seed, noise, start);
        let center = Vec3::new(cx, cy, cz);
        let scaled: Vec<SkeletonFrame> = frames
            .iter()
            .map(|f| SkeletonFrame { joints: f.joints.map(|j| center + (j - center) * k), ..f.clone() })
            .collect();
        let (a, b) = (features(&frames), features(&scaled));
        for i in 0..32 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-9, "feature {}: {} vs {}", i, a[i], b[i]);
        }
    }

    #[test]
    fn features_follow_mirroring(g in 0usize..8, seed in 0u64..1000, noise in 0.0..0.03f64, start in 0usize..190) {
        let frames = window(g, seed, noise, start);
        let mirrored: Vec<SkeletonFrame> = frames.iter().map(SkeletonFrame::mirrored).collect();
        let (a, b) = (features(&frames), features(&mirrored));
        for i in 0..32 {
            prop_assert!((a[i] - b[mirror_index(i)]).abs() <= 1e-12, "feature {}", i);
        }
        prop_assert_eq!(a[HANDS_DISTANCE], b[HANDS_DISTANCE]);
    }

    #[test]
    fn stump_matches_brute_force(seed in any::<u64>(), n in 1usize..=50, f in 1usize..=8, coarse in any::<bool>()) {
        use rand::Rng;
        let mut r = chacha(seed);
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..f).map(|_| if coarse { r.gen_range(0..3) as f64 } else { r.gen_range(-1.0..1.0) }).collect())
            .collect();
        let labels: Vec<i8> = (0..n).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
        let raw: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let (stump, err) = train_stump(&samples, &labels, &weights).unwrap();
        let (bf, _, bpol, berr) = brute_force_stump(&samples, &labels, &weights);
        prop_assert_eq!(err, berr);
        prop_assert_eq!((stump.feature_index, stump.polarity), (bf, bpol));
    }

    #[test]
    fn boosting_keeps_weights_normalized(seed in any::<u64>(), n in 4usize..60, rounds in 1usize..25) {
        use rand::Rng;
        let mut r = chacha(seed);
        let samples: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let mut labels: Vec<i8> = (0..n).map(|_| if r.gen_bool(0.3) { 1 } else { -1 }).collect();
        labels[0] = 1;
        labels[1] = -1;
        let config = socialgest::TrainConfig { rounds, ..Default::default() };
        let (model, trace) = train_adaboost(GestureLabel::RH, &samples, &labels, &config).unwrap();
        prop_assert!(model.stumps.len() <= rounds);
        for (sum, min) in trace.weight_sums.iter().zip(&trace.weight_mins) {
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(*min >= 0.0);
        }
        prop_assert!(trace.training_error <= trace.error_bound() + 1e-12);
    }

    #[test]
    fn agreeing_stump_never_lowers_confidence(seed in any::<u64>(), stumps in 1usize..12, extra in 0.001..20.0f64) {
        use rand::Rng;
        let mut r = chacha(seed);
        let x: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut model = BoostModel {
            gesture: GestureLabel::R5,
            stumps: (0..stumps)
                .map(|_| Stump {
                    feature_index: r.gen_range(0..4),
                    threshold: r.gen_range(-1.0..1.0),
                    polarity: if r.gen_bool(0.5) { 1 } else { -1 },
                    alpha: r.gen_range(0.01..5.0),
                })
                .collect(),
            trained_rounds: stumps,
        };
        let before = predict_confidence(&model, &x).unwrap();
        let f = r.gen_range(0..4);
        model.stumps.push(Stump { feature_index: f, threshold: x[f] - 0.5, polarity: 1, alpha: extra });
        prop_assert!(predict_confidence(&model, &x).unwrap() >= before);
    }

    #[test]
    fn scaling_alphas_keeps_confidence(seed in any::<u64>(), k in 0.01..100.0f64) {
        use rand::Rng;
        let mut r = chacha(seed);
        let model = BoostModel {
            gesture: GestureLabel::LS,
            stumps: (0..8)
                .map(|_| Stump {
                    feature_index: r.gen_range(0..3),
                    threshold: r.gen_range(-1.0..1.0),
                    polarity: if r.gen_bool(0.5) { 1 } else { -1 },
                    alpha: r.gen_range(0.01..5.0),
                })
                .collect(),
            trained_rounds: 8,
        };
        let mut scaled = model.clone();
        for s in &mut scaled.stumps {
            s.alpha *= k;
        }
        let xs: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let c: Vec<f64> = xs.iter().map(|x| model.confidence(x)).collect();
        let d: Vec<f64> = xs.iter().map(|x| scaled.confidence(x)).collect();
        for i in 0..xs.len() {
            prop_assert!((c[i] - d[i]).abs() <= 1e-12);
            for j in 0..xs.len() {
                if c[i] < c[j] - 1e-12 {
                    prop_assert!(d[i] < d[j]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wire_round_trip(seed in any::<u64>()) {
        let m = random_message(&mut chacha(seed));
        prop_assert_eq!(decode_message(&encode_message(&m)).unwrap(), m);
    }

    #[test]
    fn decoding_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        if let Ok(m) = decode_message(&bytes) {
            prop_assert_eq!(decode_message(&encode_message(&m)).unwrap(), m);
        }
    }

    #[test]
    fn mangled_lines_decode_or_fail_cleanly(seed in any::<u64>(), cut in 0.0..1.0f64, pos in 0.0..1.0f64, byte in any::<u8>()) {
        let mut line = encode_message(&random_message(&mut chacha(seed)));
        let i = ((line.len() - 1) as f64 * pos) as usize;
        line[i] = byte;
        line.truncate(1 + ((line.len() - 1) as f64 * cut) as usize);
        if let Ok(m) = decode_message(&line) {
            prop_assert_eq!(decode_message(&encode_message(&m)).unwrap(), m);
        }
    }

    #[test]
    fn fuse_is_symmetric_bounded_monotone(a in 0.0..=1.0f64, b in 0.0..=1.0f64, up in 0.0..=1.0f64) {
        let f = fuse(a, b).unwrap();
        prop_assert_eq!(f, fuse(b, a).unwrap());
        prop_assert!((0.0..=1.0).contains(&f));
        let a2 = a + (1.0 - a) * up;
        prop_assert!(fuse(a2, b).unwrap() >= f);
        if f >= 0.5 {
            prop_assert!(a * b >= 0.25 - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Random confidence streams on both sides: per peer and gesture, triggers
    /// are at least one refractory period apart, and only fire when both
    /// sides clear the floor.
    #[test]
    fn session_triggers_respect_refractory_and_floor(seed in any::<u64>()) {
        use rand::Rng;
        let mut r = chacha(seed);
        let cfg = FusionConfig::default();
        let mut s = Session::new("A");
        s.step(SessionInput::Remote(WireMessage::Hello { peer: "B".into(), version: 1 }), &cfg).unwrap();
        let mut level = [0.0f64; 8];
        let mut remote_level = [0.0f64; 8];
        let mut last: std::collections::BTreeMap<GestureLabel, f64> = Default::default();
        let q = |v: [f64; 8]| ConfidenceSet(v.map(socialgest::num::round6));
        let dyadic = [GestureLabel::R5, GestureLabel::L5, GestureLabel::RH, GestureLabel::LH];
        let mut local_in_force = q(level);
        for k in 0..300 {
            let t = k as f64 / 30.0;
            for i in 0..8 {
                level[i] = (level[i] + r.gen_range(-0.2..0.2)).clamp(0.0, 1.0);
                remote_level[i] = (remote_level[i] + r.gen_range(-0.2..0.2)).clamp(0.0, 1.0);
            }
            let remote = q(remote_level);
            let mut fired = Vec::new();
            // A remote update fuses with the local sample already held.
            for trig in s.step(SessionInput::Remote(WireMessage::Conf { peer: "B".into(), t, conf: remote }), &cfg).unwrap() {
                fired.push((trig, local_in_force));
            }
            local_in_force = q(level);
            for trig in s.step(SessionInput::Local { t, conf: local_in_force }, &cfg).unwrap() {
                fired.push((trig, local_in_force));
            }
            for (trig, local) in fired {
                if let Some(prev) = last.insert(trig.gesture, trig.t) {
                    prop_assert!(trig.t - prev >= cfg.refractory, "{:?} at {} and {}", trig.gesture, prev, trig.t);
                }
                if dyadic.contains(&trig.gesture) {
                    let i = trig.gesture.code();
                    prop_assert!(local.0[i] >= cfg.per_peer_floor && remote.0[i] >= cfg.per_peer_floor);
                    prop_assert!(trig.fused >= cfg.dyad_threshold);
                    prop_assert_eq!(trig.fused, socialgest::num::round6(fuse(local.0[i], remote.0[i]).unwrap()));
                }
            }
        }
    }
}
