//! Pilot-study surrogate: prompted enactments by synthetic participants,
//! classified and tallied into a confusion matrix.

mod matrix;
mod report;

use rand::{Rng as _, RngCore};
use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{BundleError, ModelBundle};
use crate::detector::{classify_prompted_clip, DetectError, DetectorConfig};
use crate::label::GestureLabel;
use crate::rng::{self, streams};
use crate::skeleton::{synth_clip, SynthError, SynthParams};

pub use matrix::{confusion_matrix, ConfusionMatrix, MatrixError};
pub use report::{parse_report_csv, render_report, CsvReport, ReportFormat};

#[derive(Debug, Clone, PartialEq)]
pub struct PilotConfig {
    pub participants: usize,
    /// Inclusive range each participant's prompt count is drawn from.
    pub prompts_per_participant: (usize, usize),
    pub prompt_set: Vec<GestureLabel>,
    pub enactment_duration: f64,
    pub fps: f64,
    pub seed: u64,
    /// Noise and variability of the enactments; `participant_seed`, `fps`
    /// and `duration` are overridden per run.
    pub synth: SynthParams,
    /// Enactments of each of RM and LM per participant, scored apart from
    /// the main matrix. Zero skips the block.
    pub mat_prompts: usize,
    pub detector: DetectorConfig,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            participants: 17,
            prompts_per_participant: (27, 30),
            prompt_set: GestureLabel::RETAINED.to_vec(),
            enactment_duration: 7.0,
            fps: 30.0,
            seed: 0,
            synth: SynthParams::default(),
            mat_prompts: 3,
            detector: DetectorConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid pilot configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("unknown report format {0:?}")]
    Format(String),
    #[error("malformed report csv at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

impl PilotConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Config(m.to_string()));
        let (lo, hi) = self.prompts_per_participant;
        if self.participants == 0 {
            return bad("participants must be at least 1");
        }
        if lo > hi || hi == 0 {
            return bad("prompt range must be non-empty");
        }
        if self.prompt_set.is_empty() || self.prompt_set.iter().any(|g| !g.is_atomic()) {
            return bad("prompt set must be non-empty and atomic");
        }
        self.detector.validate()?;
        self.synth_for(0).validate()?;
        Ok(())
    }

    fn synth_for(&self, participant_seed: u64) -> SynthParams {
        SynthParams {
            participant_seed,
            fps: self.fps,
            duration: self.enactment_duration,
            ..self.synth.clone()
        }
    }
}

/// Correct out of total for one gesture or participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub correct: u64,
    pub total: u64,
}

impl Tally {
    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotReport {
    pub seed: u64,
    pub participants: usize,
    pub noise_sigma: f64,
    pub matrix: ConfusionMatrix,
    pub per_participant: Vec<Tally>,
    /// `None` when the mat block was skipped.
    pub rm: Option<Tally>,
    pub lm: Option<Tally>,
}

impl PilotReport {
    pub fn overall_accuracy(&self) -> f64 {
        self.matrix.accuracy()
    }
}

struct Prompt {
    gesture: GestureLabel,
    seed: u64,
}

struct ParticipantPlan {
    participant_seed: u64,
    prompts: Vec<Prompt>,
    mat: Vec<Prompt>,
}

fn plan(config: &PilotConfig) -> Vec<ParticipantPlan> {
    let mut rng = rng::stream(config.seed, streams::PILOT);
    let (lo, hi) = config.prompts_per_participant;
    (0..config.participants)
        .map(|_| {
            let participant_seed = rng.next_u64();
            let count = rng.gen_range(lo..=hi);
            let prompts = (0..count)
                .map(|_| Prompt {
                    gesture: config.prompt_set[rng.gen_range(0..config.prompt_set.len())],
                    seed: rng.next_u64(),
                })
                .collect();
            let mat = (0..config.mat_prompts)
                .flat_map(|_| [GestureLabel::RM, GestureLabel::LM])
                .map(|gesture| Prompt {
                    gesture,
                    seed: rng.next_u64(),
                })
                .collect();
            ParticipantPlan {
                participant_seed,
                prompts,
                mat,
            }
        })
        .collect()
}

type Outcomes = (Vec<(GestureLabel, GestureLabel)>, Vec<(GestureLabel, GestureLabel)>);

fn enact(p: &ParticipantPlan, bundle: &ModelBundle, config: &PilotConfig) -> Result<Outcomes, EvalError> {
    let params = config.synth_for(p.participant_seed);
    let classify = |prompts: &[Prompt]| -> Result<Vec<_>, EvalError> {
        prompts
            .iter()
            .map(|q| {
                let clip = synth_clip(q.gesture, &params, q.seed)?;
                Ok((q.gesture, classify_prompted_clip(&clip, bundle, &config.detector)?))
            })
            .collect()
    };
    Ok((classify(&p.prompts)?, classify(&p.mat)?))
}

/// Run the prompted pilot. Draws happen sequentially from one seeded
/// stream; enactments run in parallel and are merged in participant order.
pub fn run_pilot(bundle: &ModelBundle, config: &PilotConfig) -> Result<PilotReport, EvalError> {
    bundle.check_feature_spec()?;
    config.validate()?;
    let plans = plan(config);
    let results: Vec<Outcomes> = plans
        .par_iter()
        .map(|p| enact(p, bundle, config))
        .collect::<Result<_, _>>()?;

    let mut cols = GestureLabel::ATOMIC.to_vec();
    cols.push(GestureLabel::Hug);
    let mut matrix = ConfusionMatrix::new(&config.prompt_set, &cols);
    let mut per_participant = Vec::with_capacity(results.len());
    let (mut rm, mut lm) = (Tally::default(), Tally::default());
    for (prompts, mat) in &results {
        let mut tally = Tally::default();
        for &(truth, pred) in prompts {
            matrix.record(truth, pred)?;
            tally.total += 1;
            tally.correct += u64::from(truth == pred);
        }
        per_participant.push(tally);
        for &(truth, pred) in mat {
            let t = if truth == GestureLabel::RM { &mut rm } else { &mut lm };
            t.total += 1;
            t.correct += u64::from(truth == pred);
        }
    }
    let skipped = config.mat_prompts == 0;
    Ok(PilotReport {
        seed: config.seed,
        participants: config.participants,
        noise_sigma: config.synth.noise_sigma,
        matrix,
        per_participant,
        rm: (!skipped).then_some(rm),
        lm: (!skipped).then_some(lm),
    })
}
