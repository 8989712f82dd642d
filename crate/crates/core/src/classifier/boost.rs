//! Discrete AdaBoost over decision stumps.

use super::stump::{check_inputs, Stump, StumpSearch};
use super::{TrainConfig, TrainError};
use crate::label::GestureLabel;

pub const EPSILON_FLOOR: f64 = 1e-10;
pub const EPSILON_CEIL: f64 = 0.5 - 1e-10;

/// One-vs-rest detector for a single gesture.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostModel {
    pub gesture: GestureLabel,
    pub stumps: Vec<Stump>,
    pub trained_rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("model has no stumps")]
pub struct EmptyModel;

impl BoostModel {
    pub fn alpha_sum(&self) -> f64 {
        self.stumps.iter().map(|s| s.alpha).sum()
    }

    /// Weighted vote `sum_t alpha_t * h_t(x)`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.stumps
            .iter()
            .map(|s| s.alpha * f64::from(s.predict(x)))
            .sum()
    }

    /// Margin mapped affinely onto [0, 1]; 0.5 is a split vote.
    pub fn confidence(&self, x: &[f64]) -> f64 {
        let total = self.alpha_sum();
        if total <= 0.0 {
            return 0.5;
        }
        ((1.0 + self.margin(x) / total) / 2.0).clamp(0.0, 1.0)
    }

    pub fn classify(&self, x: &[f64]) -> i8 {
        if self.margin(x) > 0.0 {
            1
        } else {
            -1
        }
    }
}

pub fn predict_confidence(model: &BoostModel, x: &[f64]) -> Result<f64, EmptyModel> {
    if model.stumps.is_empty() || model.alpha_sum() <= 0.0 {
        return Err(EmptyModel);
    }
    Ok(model.confidence(x))
}

/// Per-round diagnostics of a boosting run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoostTrace {
    /// Weighted error of each kept round, before clamping.
    pub errors: Vec<f64>,
    /// Sum of sample weights after each kept round's update.
    pub weight_sums: Vec<f64>,
    /// Smallest sample weight after each kept round's update.
    pub weight_mins: Vec<f64>,
    /// Fraction of training samples the final ensemble misclassifies.
    pub training_error: f64,
}

impl BoostTrace {
    /// Product of `2 * sqrt(eps (1 - eps))` over kept rounds, using the clamped errors.
    pub fn error_bound(&self) -> f64 {
        self.errors
            .iter()
            .map(|&e| {
                let e = e.clamp(EPSILON_FLOOR, EPSILON_CEIL);
                2.0 * (e * (1.0 - e)).sqrt()
            })
            .product()
    }
}

/// Boost on an existing search, so one-vs-rest models can share the sorted
/// sample index.
pub fn boost_with<S: AsRef<[f64]> + Sync>(
    gesture: GestureLabel,
    search: &StumpSearch<'_, S>,
    samples: &[S],
    labels: &[i8],
    config: &TrainConfig,
) -> Result<(BoostModel, BoostTrace), TrainError> {
    if config.rounds < 1 {
        return Err(TrainError::BadRounds);
    }
    let n = samples.len();
    let mut weights = vec![1.0 / n as f64; n];
    check_inputs(n, labels, &weights)?;
    let has_pos = labels.iter().any(|&y| y > 0);
    let has_neg = labels.iter().any(|&y| y < 0);
    if !(has_pos && has_neg) {
        return Err(TrainError::SingleClass);
    }

    let mut stumps = Vec::new();
    let mut trace = BoostTrace::default();
    for _ in 0..config.rounds {
        let (mut stump, eps) = search.best(labels, &weights);
        if eps >= 0.5 {
            break;
        }
        let clamped = eps.clamp(EPSILON_FLOOR, EPSILON_CEIL);
        stump.alpha = 0.5 * ((1.0 - clamped) / clamped).ln();
        for (i, w) in weights.iter_mut().enumerate() {
            let agree = f64::from(labels[i]) * f64::from(stump.predict(samples[i].as_ref()));
            *w *= (-stump.alpha * agree).exp();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        trace.errors.push(eps);
        trace.weight_sums.push(weights.iter().sum());
        trace
            .weight_mins
            .push(weights.iter().copied().fold(f64::INFINITY, f64::min));
        stumps.push(stump);
        // A perfect stump leaves the distribution unchanged; further rounds repeat it.
        if eps == 0.0 {
            break;
        }
    }
    if stumps.is_empty() {
        return Err(TrainError::NoWeakLearner);
    }
    let model = BoostModel {
        gesture,
        trained_rounds: stumps.len(),
        stumps,
    };
    let wrong = samples
        .iter()
        .zip(labels)
        .filter(|(x, &y)| model.classify(x.as_ref()) != y)
        .count();
    trace.training_error = wrong as f64 / n as f64;
    Ok((model, trace))
}

pub fn train_adaboost<S: AsRef<[f64]> + Sync>(
    gesture: GestureLabel,
    samples: &[S],
    labels: &[i8],
    config: &TrainConfig,
) -> Result<(BoostModel, BoostTrace), TrainError> {
    if samples.is_empty() {
        return Err(TrainError::Empty);
    }
    if labels.len() != samples.len() {
        return Err(TrainError::LengthMismatch);
    }
    let search = StumpSearch::new(samples)?;
    boost_with(gesture, &search, samples, labels, config)
}
