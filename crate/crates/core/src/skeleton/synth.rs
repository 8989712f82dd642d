//! Deterministic synthetic enactments of the atomic gestures.
//!
//! Each clip is a rest pose, a smoothstep rise to a gesture apex, a hold, a
//! symmetric return and rest again. Left-handed gestures are produced by
//! mirroring the right-handed enactment, including its noise, so the mirror
//! relation between `L*` and `R*` clips is exact.

use std::collections::BTreeMap;

use rand::Rng as _;
use rand::RngCore;
use rand_distr::StandardNormal;
use thiserror::Error;

use super::{Clip, HandState, JointId, LabelSpan, SkeletonFrame, JOINT_COUNT};
use crate::geom::Vec3;
use crate::label::GestureLabel;
use crate::num::{fmt6, round6};
use crate::rng::{self, streams, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Per-joint, per-frame Gaussian noise, meters.
    pub noise_sigma: f64,
    pub amplitude_scale_range: (f64, f64),
    /// Each phase boundary moves by up to this many seconds.
    pub timing_jitter: f64,
    /// Selects the synthetic performer; fixes their amplitude and timing habits.
    pub participant_seed: u64,
    pub fps: f64,
    pub duration: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            noise_sigma: 0.01,
            amplitude_scale_range: (0.9, 1.1),
            timing_jitter: 0.15,
            participant_seed: 0,
            fps: 30.0,
            duration: 7.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("{0} is not an atomic gesture and cannot be enacted directly")]
    NotEnactable(GestureLabel),
    #[error("invalid synthesis parameters: {0}")]
    BadParams(String),
    #[error("unknown cohort {0:?}")]
    UnknownCohort(String),
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let (lo, hi) = self.amplitude_scale_range;
        let bad = |m: &str| Err(SynthError::BadParams(m.to_string()));
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be finite and >= 0");
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return bad("amplitude range must be positive and ordered");
        }
        if !(self.timing_jitter.is_finite() && self.timing_jitter >= 0.0) {
            return bad("timing_jitter must be finite and >= 0");
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad("fps must be positive");
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad("duration must be positive");
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps).round() as usize
    }
}

/// Habits of one synthetic performer, fixed by `participant_seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipantTraits {
    pub amplitude_center: f64,
    /// Shift applied to every phase boundary, seconds.
    pub time_offset: f64,
}

const AMPLITUDE_SPREAD: f64 = 0.02;
const MAX_TIME_OFFSET: f64 = 0.25;

pub fn participant_traits(params: &SynthParams) -> ParticipantTraits {
    let mut r = rng::stream(params.participant_seed, streams::PARTICIPANT);
    let (lo, hi) = params.amplitude_scale_range;
    let amplitude_center = if lo < hi { r.gen_range(lo..=hi) } else { lo };
    let time_offset = r.gen_range(-MAX_TIME_OFFSET..=MAX_TIME_OFFSET);
    ParticipantTraits {
        amplitude_center,
        time_offset,
    }
}

// Rest pose, body frame (SpineMid at the origin). Right side; left is the x mirror.
const SPINE_BASE: Vec3 = Vec3::new(0.0, -0.30, 0.0);
const SPINE_MID: Vec3 = Vec3::new(0.0, 0.0, 0.0);
const SPINE_SHOULDER: Vec3 = Vec3::new(0.0, 0.25, 0.0);
const NECK: Vec3 = Vec3::new(0.0, 0.33, 0.0);
const HEAD: Vec3 = Vec3::new(0.0, 0.45, 0.0);
const SHOULDER_R: Vec3 = Vec3::new(0.18, 0.25, 0.0);
const REST_HAND_R: Vec3 = Vec3::new(0.22, -0.20, -0.05);
const HIP_R: Vec3 = Vec3::new(0.09, -0.30, 0.0);
const KNEE_R: Vec3 = Vec3::new(0.09, -0.75, 0.0);
const ANKLE_R: Vec3 = Vec3::new(0.09, -1.15, 0.0);
const FOOT_R: Vec3 = Vec3::new(0.09, -1.20, -0.08);

const ELBOW_OUTWARD: f64 = 0.05;
const HAND_TIP_LENGTH: f64 = 0.07;
const THUMB_OFFSET: f64 = 0.03;

/// Right-handed apex target and hold-phase hand state.
fn apex(gesture: GestureLabel) -> (Vec3, HandState) {
    match gesture {
        GestureLabel::R5 => (
            Vec3::new(0.25, 0.50, SPINE_MID.z - 0.35),
            HandState::PalmOut,
        ),
        GestureLabel::RH => (
            Vec3::new(0.15, 0.10, SPINE_MID.z - 0.45),
            HandState::CurvedTowardCamera,
        ),
        GestureLabel::RS => (
            Vec3::new(-0.22, 0.28, SPINE_MID.z - 0.05),
            HandState::ReachingSide,
        ),
        GestureLabel::RM => (
            Vec3::new(0.25, -0.50, SPINE_MID.z - 0.25),
            HandState::OnTable,
        ),
        other => unreachable!("no right-handed apex for {other}"),
    }
}

// Phase boundaries for a 7 s clip; other durations scale proportionally.
const NOMINAL_DURATION: f64 = 7.0;
const PHASES: [f64; 4] = [1.5, 2.5, 4.5, 5.5];

/// Timing and amplitude of one arm's enactment, right-handed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPlan {
    pub gesture: GestureLabel,
    pub rise_start: f64,
    pub hold_start: f64,
    pub hold_end: f64,
    pub return_end: f64,
    pub amplitude: f64,
}

impl ArmPlan {
    fn draw(
        gesture: GestureLabel,
        params: &SynthParams,
        traits: &ParticipantTraits,
        delay: f64,
        r: &mut Rng,
    ) -> ArmPlan {
        let (lo, hi) = params.amplitude_scale_range;
        let a_lo = (traits.amplitude_center - AMPLITUDE_SPREAD).max(lo);
        let a_hi = (traits.amplitude_center + AMPLITUDE_SPREAD).min(hi);
        let amplitude = if a_lo < a_hi {
            r.gen_range(a_lo..=a_hi)
        } else {
            a_lo
        };
        let scale = params.duration / NOMINAL_DURATION;
        let mut b = [0.0; 4];
        let mut prev = 0.0_f64;
        for (slot, nominal) in b.iter_mut().zip(PHASES) {
            let jitter = if params.timing_jitter > 0.0 {
                r.gen_range(-params.timing_jitter..=params.timing_jitter)
            } else {
                0.0
            };
            let v = (nominal * scale + traits.time_offset + delay + jitter)
                .clamp(0.0, params.duration);
            *slot = v.max(prev);
            prev = *slot;
        }
        ArmPlan {
            gesture,
            rise_start: b[0],
            hold_start: b[1],
            hold_end: b[2],
            return_end: b[3],
            amplitude,
        }
    }

    /// Fraction of the way from rest to apex at time `t`.
    pub fn progress(&self, t: f64) -> f64 {
        fn smoothstep(u: f64) -> f64 {
            let u = u.clamp(0.0, 1.0);
            u * u * (3.0 - 2.0 * u)
        }
        if t < self.rise_start || t >= self.return_end {
            0.0
        } else if t < self.hold_start {
            smoothstep((t - self.rise_start) / (self.hold_start - self.rise_start))
        } else if t < self.hold_end {
            1.0
        } else {
            1.0 - smoothstep((t - self.hold_end) / (self.return_end - self.hold_end))
        }
    }

    pub fn hand_state(&self, t: f64) -> HandState {
        if t >= self.hold_start && t < self.hold_end {
            apex(self.gesture).1
        } else {
            HandState::Neutral
        }
    }

    pub fn hand(&self, t: f64) -> Vec3 {
        let (target, _) = apex(self.gesture);
        REST_HAND_R + (target - REST_HAND_R) * (self.amplitude * self.progress(t))
    }

    fn span(&self, fps: f64, frames: usize, label: GestureLabel) -> LabelSpan {
        let last = frames.saturating_sub(1);
        let start = ((self.rise_start * fps).ceil() as usize).min(last);
        let end = ((self.return_end * fps).floor() as usize).clamp(start, last);
        LabelSpan {
            gesture: label,
            start_frame: start,
            end_frame: end,
        }
    }
}

/// Right-arm joints given the hand position: (elbow, wrist, hand, tip, thumb).
fn right_arm(hand: Vec3) -> [Vec3; 5] {
    let elbow = (SHOULDER_R + hand) * 0.5 + Vec3::new(ELBOW_OUTWARD, 0.0, 0.0);
    let forearm = hand - elbow;
    let len = forearm.norm();
    let tip = if len > 0.0 {
        hand + forearm * (HAND_TIP_LENGTH / len)
    } else {
        hand
    };
    let thumb = hand + Vec3::new(-THUMB_OFFSET, 0.0, 0.0);
    [elbow, hand, hand, tip, thumb]
}

const RIGHT_ARM: [JointId; 5] = [
    JointId::ElbowRight,
    JointId::WristRight,
    JointId::HandRight,
    JointId::HandTipRight,
    JointId::ThumbRight,
];

fn rest_frame() -> SkeletonFrame {
    use JointId::*;
    let mut f = SkeletonFrame::new(0.0, [Vec3::ZERO; JOINT_COUNT]);
    for (j, p) in [
        (SpineBase, SPINE_BASE),
        (SpineMid, SPINE_MID),
        (SpineShoulder, SPINE_SHOULDER),
        (Neck, NECK),
        (Head, HEAD),
        (ShoulderRight, SHOULDER_R),
        (HipRight, HIP_R),
        (KneeRight, KNEE_R),
        (AnkleRight, ANKLE_R),
        (FootRight, FOOT_R),
    ] {
        f.set_joint(j, p);
        f.set_joint(j.mirrored(), p.mirror_x());
    }
    for (j, p) in RIGHT_ARM.iter().zip(right_arm(REST_HAND_R)) {
        f.set_joint(*j, p);
        f.set_joint(j.mirrored(), p.mirror_x());
    }
    f
}

fn seed_meta(params: &SynthParams, seed: u64) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("seed".into(), seed.to_string());
    meta.insert("participant".into(), params.participant_seed.to_string());
    meta.insert("noise_sigma".into(), fmt6(params.noise_sigma));
    meta
}

/// Core renderer. `right` / `left` are right-handed plans; the left plan is
/// mirrored onto the left arm.
fn render(
    right: Option<&ArmPlan>,
    left: Option<&ArmPlan>,
    params: &SynthParams,
    r: &mut Rng,
) -> Vec<SkeletonFrame> {
    let base = rest_frame();
    (0..params.frame_count())
        .map(|i| {
            let t = i as f64 / params.fps;
            let mut f = base.clone();
            f.t = t;
            if let Some(plan) = right {
                for (j, p) in RIGHT_ARM.iter().zip(right_arm(plan.hand(t))) {
                    f.set_joint(*j, p);
                }
                f.hand_right = plan.hand_state(t);
            }
            if let Some(plan) = left {
                for (j, p) in RIGHT_ARM.iter().zip(right_arm(plan.hand(t))) {
                    f.set_joint(j.mirrored(), p.mirror_x());
                }
                f.hand_left = plan.hand_state(t);
            }
            for p in f.joints.iter_mut() {
                let n = Vec3::new(
                    r.sample::<f64, _>(StandardNormal),
                    r.sample::<f64, _>(StandardNormal),
                    r.sample::<f64, _>(StandardNormal),
                );
                *p = (*p + n * params.noise_sigma).map(round6);
            }
            f
        })
        .collect()
}

/// One enactment of an atomic gesture (or a rest clip for `NONE`).
pub fn synth_clip(gesture: GestureLabel, params: &SynthParams, seed: u64) -> Result<Clip, SynthError> {
    params.validate()?;
    if !(gesture.is_atomic() || gesture == GestureLabel::None) {
        return Err(SynthError::NotEnactable(gesture));
    }
    let canonical = if gesture.is_left_handed() {
        gesture.mirrored()
    } else {
        gesture
    };
    let traits = participant_traits(params);
    let mut r = rng::stream(seed, params.participant_seed);
    let plan = (canonical != GestureLabel::None)
        .then(|| ArmPlan::draw(canonical, params, &traits, 0.0, &mut r));
    let mut frames = render(plan.as_ref(), None, params, &mut r);
    let mut spans: Vec<LabelSpan> = plan
        .iter()
        .map(|p| p.span(params.fps, frames.len(), gesture))
        .collect();
    if gesture.is_left_handed() {
        frames = frames.iter().map(SkeletonFrame::mirrored).collect();
        spans.iter_mut().for_each(|s| s.gesture = gesture);
    }
    let mut meta = seed_meta(params, seed);
    meta.insert("gesture".into(), gesture.to_string());
    if let Some(p) = &plan {
        meta.insert("amplitude".into(), fmt6(p.amplitude));
    }
    Ok(Clip {
        fps: params.fps,
        frames,
        spans,
        meta,
    })
}

/// Both arms enact independently: `right` must be right-handed, `left`
/// left-handed. The left arm's whole timeline is shifted by `left_delay`
/// seconds, which lets tests place the two peaks at a chosen distance.
pub fn synth_two_sided(
    right: Option<GestureLabel>,
    left: Option<GestureLabel>,
    params: &SynthParams,
    seed: u64,
    left_delay: f64,
) -> Result<Clip, SynthError> {
    params.validate()?;
    if let Some(g) = right {
        if !g.is_atomic() || g.is_left_handed() {
            return Err(SynthError::NotEnactable(g));
        }
    }
    if let Some(g) = left {
        if !g.is_atomic() || !g.is_left_handed() {
            return Err(SynthError::NotEnactable(g));
        }
    }
    let traits = participant_traits(params);
    let mut r = rng::stream(seed, params.participant_seed);
    let rp = right.map(|g| ArmPlan::draw(g, params, &traits, 0.0, &mut r));
    let lp = left.map(|g| ArmPlan::draw(g.mirrored(), params, &traits, left_delay, &mut r));
    let frames = render(rp.as_ref(), lp.as_ref(), params, &mut r);
    let mut spans = Vec::new();
    if let (Some(p), Some(g)) = (&rp, right) {
        spans.push(p.span(params.fps, frames.len(), g));
    }
    if let (Some(p), Some(g)) = (&lp, left) {
        spans.push(p.span(params.fps, frames.len(), g));
    }
    let mut meta = seed_meta(params, seed);
    let name: Vec<String> = right.iter().chain(left.iter()).map(|g| g.to_string()).collect();
    meta.insert("gesture".into(), name.join("+"));
    meta.insert("left_delay".into(), fmt6(left_delay));
    Ok(Clip {
        fps: params.fps,
        frames,
        spans,
        meta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortClip {
    /// Suggested file stem, e.g. `v03_RH_2`.
    pub name: String,
    pub clip: Clip,
}

/// Synthetic training cohort: every volunteer enacts each atomic gesture and
/// a rest clip `clips_per_gesture` times.
pub fn cohort_with(
    volunteers: usize,
    clips_per_gesture: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Vec<CohortClip>, SynthError> {
    let mut r = rng::stream(seed, streams::COHORT);
    let mut out = Vec::with_capacity(volunteers * 9 * clips_per_gesture);
    for v in 0..volunteers {
        let p = SynthParams {
            participant_seed: r.next_u64(),
            ..params.clone()
        };
        let labels = GestureLabel::ATOMIC.iter().copied().chain([GestureLabel::None]);
        for g in labels {
            for k in 0..clips_per_gesture {
                let mut clip = synth_clip(g, &p, r.next_u64())?;
                clip.meta.insert("volunteer".into(), v.to_string());
                out.push(CohortClip {
                    name: format!("v{v:02}_{g}_{k}"),
                    clip,
                });
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_VOLUNTEERS: usize = 12;
pub const DEFAULT_CLIPS_PER_GESTURE: usize = 5;

/// Named cohorts: `train-default` (12 volunteers x 5 clips per class) and
/// `train-small` (3 volunteers x 2 clips, for quick checks).
pub fn cohort(name: &str, seed: u64, params: &SynthParams) -> Result<Vec<CohortClip>, SynthError> {
    match name {
        "train-default" => cohort_with(DEFAULT_VOLUNTEERS, DEFAULT_CLIPS_PER_GESTURE, seed, params),
        "train-small" => cohort_with(3, 2, seed, params),
        other => Err(SynthError::UnknownCohort(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::validate_frame;

    fn quiet() -> SynthParams {
        SynthParams {
            noise_sigma: 0.0,
            ..SynthParams::default()
        }
    }

    fn mid_hold(clip: &Clip, params: &SynthParams, seed: u64, g: GestureLabel) -> SkeletonFrame {
        // Recompute the plan to find the hold midpoint.
        let traits = participant_traits(params);
        let mut r = rng::stream(seed, params.participant_seed);
        let plan = ArmPlan::draw(g, params, &traits, 0.0, &mut r);
        let mid = 0.5 * (plan.hold_start + plan.hold_end);
        clip.frames[(mid * params.fps).round() as usize].clone()
    }

    #[test]
    fn default_clip_has_210_frames() {
        let c = synth_clip(GestureLabel::R5, &SynthParams::default(), 7).unwrap();
        assert_eq!(c.len(), 210);
        assert_eq!(c.fps, 30.0);
        assert_eq!(c.spans.len(), 1);
        c.validate().unwrap();
    }

    #[test]
    fn seeded_determinism() {
        let p = SynthParams::default();
        assert_eq!(
            synth_clip(GestureLabel::LS, &p, 11).unwrap(),
            synth_clip(GestureLabel::LS, &p, 11).unwrap()
        );
        assert_ne!(
            synth_clip(GestureLabel::LS, &p, 11).unwrap(),
            synth_clip(GestureLabel::LS, &p, 12).unwrap()
        );
    }

    #[test]
    fn none_stays_at_rest() {
        let p = SynthParams::default();
        let c = synth_clip(GestureLabel::None, &p, 3).unwrap();
        assert!(c.spans.is_empty());
        let bound = 0.1 + 3.0 * p.noise_sigma;
        for f in &c.frames {
            assert!(f.joint(JointId::HandRight).distance(REST_HAND_R) < bound);
            assert_eq!(f.hand_right, HandState::Neutral);
        }
    }

    #[test]
    fn composites_are_rejected() {
        let p = SynthParams::default();
        assert_eq!(
            synth_clip(GestureLabel::Hug, &p, 1),
            Err(SynthError::NotEnactable(GestureLabel::Hug))
        );
        assert!(synth_clip(GestureLabel::HoldHands, &p, 1).is_err());
        assert!(synth_two_sided(Some(GestureLabel::LS), None, &p, 1, 0.0).is_err());
    }

    #[test]
    fn bad_params_rejected() {
        let p = SynthParams {
            noise_sigma: -1.0,
            ..SynthParams::default()
        };
        assert!(matches!(synth_clip(GestureLabel::R5, &p, 1), Err(SynthError::BadParams(_))));
        let p = SynthParams {
            duration: 0.0,
            ..SynthParams::default()
        };
        assert!(synth_clip(GestureLabel::R5, &p, 1).is_err());
    }

    #[test]
    fn apex_geometry() {
        use JointId::*;
        for participant_seed in 0..20 {
            let p = SynthParams {
                participant_seed,
                ..quiet()
            };
            let seed = 100 + participant_seed;
            let c = synth_clip(GestureLabel::R5, &p, seed).unwrap();
            let f = mid_hold(&c, &p, seed, GestureLabel::R5);
            assert!(f.joint(HandRight).y - f.joint(ShoulderRight).y >= 0.15);
            assert_eq!(f.hand_right, HandState::PalmOut);

            let c = synth_clip(GestureLabel::RS, &p, seed).unwrap();
            let f = mid_hold(&c, &p, seed, GestureLabel::RS);
            assert!(f.joint(HandRight).distance(f.joint(ShoulderLeft)) <= 0.15);

            let c = synth_clip(GestureLabel::RM, &p, seed).unwrap();
            let f = mid_hold(&c, &p, seed, GestureLabel::RM);
            assert!(f.joint(HandRight).y <= f.joint(SpineBase).y - 0.15);

            let c = synth_clip(GestureLabel::RH, &p, seed).unwrap();
            let f = mid_hold(&c, &p, seed, GestureLabel::RH);
            assert!(f.joint(SpineMid).z - f.joint(HandRight).z >= 0.35);
        }
    }

    #[test]
    fn every_atomic_clip_is_valid() {
        let p = SynthParams::default();
        for g in GestureLabel::ATOMIC {
            for seed in 0..3 {
                let c = synth_clip(g, &p, seed).unwrap();
                assert!(c.frames.iter().all(|f| validate_frame(f).is_ok()));
                c.validate().unwrap();
                assert_eq!(c.spans[0].gesture, g);
            }
        }
    }

    #[test]
    fn left_is_exact_mirror_of_right() {
        let p = SynthParams::default();
        for (r, l) in [
            (GestureLabel::R5, GestureLabel::L5),
            (GestureLabel::RH, GestureLabel::LH),
            (GestureLabel::RS, GestureLabel::LS),
            (GestureLabel::RM, GestureLabel::LM),
        ] {
            let right = synth_clip(r, &p, 9).unwrap();
            let left = synth_clip(l, &p, 9).unwrap();
            for (a, b) in right.frames.iter().zip(&left.frames) {
                assert_eq!(a.mirrored(), *b);
            }
            assert_eq!(right.spans[0].start_frame, left.spans[0].start_frame);
            assert_eq!(right.spans[0].end_frame, left.spans[0].end_frame);
        }
    }

    #[test]
    fn two_sided_has_both_spans() {
        let c = synth_two_sided(
            Some(GestureLabel::RS),
            Some(GestureLabel::LS),
            &SynthParams::default(),
            4,
            0.2,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.gestures(), vec![GestureLabel::RS, GestureLabel::LS]);
    }

    #[test]
    fn cohort_sizes() {
        let small = cohort("train-small", 1, &SynthParams::default()).unwrap();
        assert_eq!(small.len(), 3 * 9 * 2);
        assert!(cohort("nope", 1, &SynthParams::default()).is_err());
        let names: std::collections::BTreeSet<_> = small.iter().map(|c| c.name.clone()).collect();
        assert_eq!(names.len(), small.len());
    }
}
