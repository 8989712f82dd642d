#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::Rng;
use socialgest::dyad::{ConfidenceSet, WireMessage};
use socialgest::skeleton::{cohort, HandState, LabelSpan, SynthParams};
use socialgest::{train_bundle, Clip, GestureLabel, ModelBundle, SkeletonFrame, TrainConfig, Vec3, WindowConfig};

/// The bundle behind the pilot numbers: default cohort, seed 1, 50 rounds.
pub fn default_bundle() -> &'static ModelBundle {
    static B: OnceLock<ModelBundle> = OnceLock::new();
    B.get_or_init(|| train_named("train-default", 1, 50))
}

pub fn small_bundle() -> &'static ModelBundle {
    static B: OnceLock<ModelBundle> = OnceLock::new();
    B.get_or_init(|| train_named("train-small", 1, 20))
}

pub fn train_named(name: &str, seed: u64, rounds: usize) -> ModelBundle {
    let corpus: Vec<Clip> = cohort(name, seed, &SynthParams::default())
        .unwrap()
        .into_iter()
        .map(|c| c.clip)
        .collect();
    let config = TrainConfig {
        rounds,
        seed,
        ..TrainConfig::default()
    };
    train_bundle(&corpus, &WindowConfig::default(), &config).unwrap()
}

/// A value on the 1e-6 grid every persisted real lives on.
pub fn grid(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let (a, b) = ((lo * 1e6) as i64, (hi * 1e6) as i64);
    rng.gen_range(a..=b) as f64 / 1e6
}

fn hand_state(rng: &mut impl Rng) -> HandState {
    [
        HandState::Neutral,
        HandState::OnTable,
        HandState::PalmOut,
        HandState::CurvedTowardCamera,
        HandState::ReachingSide,
    ][rng.gen_range(0..5)]
}

pub fn random_clip(rng: &mut impl Rng) -> Clip {
    let fps = [15.0, 24.0, 30.0, 60.0][rng.gen_range(0..4)];
    let n = rng.gen_range(1..40);
    let frames = (0..n)
        .map(|i| {
            let mut joints = [Vec3::default(); 25];
            for j in &mut joints {
                *j = Vec3::new(grid(rng, -2.0, 2.0), grid(rng, -2.0, 2.0), grid(rng, -1.0, 4.0));
            }
            SkeletonFrame {
                t: i as f64 / fps,
                joints,
                hand_left: hand_state(rng),
                hand_right: hand_state(rng),
            }
        })
        .collect();
    let mut spans = Vec::new();
    let mut at = 0;
    while at < n && rng.gen_bool(0.6) {
        let start = rng.gen_range(at..n);
        let end = rng.gen_range(start..n);
        spans.push(LabelSpan {
            gesture: GestureLabel::ATOMIC[rng.gen_range(0..8)],
            start_frame: start,
            end_frame: end,
        });
        at = end + 1;
    }
    let mut meta = BTreeMap::new();
    for k in 0..rng.gen_range(0..4) {
        let v: String = (0..rng.gen_range(0..12))
            .map(|_| ['a', 'Z', '"', '\\', ' ', 'é', '7', '\t'][rng.gen_range(0..8)])
            .collect();
        meta.insert(format!("key{k}"), v);
    }
    Clip {
        fps,
        frames,
        spans,
        meta,
    }
}

pub fn random_message(rng: &mut impl Rng) -> WireMessage {
    let peer: String = (0..rng.gen_range(1..8))
        .map(|_| ['A', 'b', '-', '"', 'ü', '\\', '9'][rng.gen_range(0..7)])
        .collect();
    let t = grid(rng, 0.0, 3600.0);
    match rng.gen_range(0..4) {
        0 => WireMessage::Hello { peer, version: 1 },
        1 => {
            let mut c = [0.0; 8];
            for v in &mut c {
                *v = grid(rng, 0.0, 1.0);
            }
            WireMessage::Conf {
                peer,
                t,
                conf: ConfidenceSet(c),
            }
        }
        2 => WireMessage::Trigger {
            gesture: GestureLabel::ALL[rng.gen_range(0..10)],
            t,
            fused: grid(rng, 0.0, 1.0),
        },
        _ => WireMessage::Bye { peer },
    }
}

/// Exhaustive stump search: every feature, a cut below the minimum and at
/// each observed value, both polarities. Errors are summed in sample order.
/// Returns (feature, cut, polarity, weighted error) of the first minimum in
/// feature-major, cut-ascending, +1-before--1 order. Polarity +1 predicts
/// +1 for values above the cut.
pub fn brute_force_stump(samples: &[Vec<f64>], labels: &[i8], weights: &[f64]) -> (usize, f64, i8, f64) {
    let mut best: Option<(usize, f64, i8, f64)> = None;
    for f in 0..samples[0].len() {
        let mut cuts: Vec<f64> = samples.iter().map(|s| s[f]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let below = cuts[0] - 1.0;
        for cut in std::iter::once(below).chain(cuts.iter().copied()) {
            for pol in [1i8, -1] {
                let mut err = 0.0;
                for ((s, &y), &w) in samples.iter().zip(labels).zip(weights) {
                    let above = s[f] > cut;
                    let pred = if above == (pol == 1) { 1 } else { -1 };
                    if pred != y {
                        err += w;
                    }
                }
                if best.map_or(true, |(_, _, _, e)| err < e) {
                    best = Some((f, cut, pol, err));
                }
            }
        }
    }
    best.unwrap()
}
