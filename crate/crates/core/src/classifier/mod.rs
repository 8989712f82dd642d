//! One-vs-rest boosted stump detectors, one per atomic gesture.

mod boost;
mod bundle;
mod stump;

use thiserror::Error;

use crate::features::FeatureError;
use crate::label::GestureLabel;
use crate::skeleton::ClipError;

pub use boost::{
    boost_with, predict_confidence, train_adaboost, BoostModel, BoostTrace, EmptyModel,
    EPSILON_CEIL, EPSILON_FLOOR,
};
pub use bundle::{
    corpus_samples, load_bundle, save_bundle, train_bundle, train_bundle_with_traces, BundleError,
    LabelledWindows, ModelBundle, BUNDLE_FORMAT_VERSION,
};
pub use stump::{train_stump, Stump, StumpSearch, BELOW_MIN_OFFSET};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    /// Boosting rounds per gesture.
    pub rounds: usize,
    pub seed: u64,
    pub volunteers: usize,
    pub clips_per_gesture_per_volunteer: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rounds: 50,
            seed: 0,
            volunteers: 12,
            clips_per_gesture_per_volunteer: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("no samples")]
    Empty,
    #[error("samples, labels and weights differ in length")]
    LengthMismatch,
    #[error("labels must be +1 or -1")]
    BadLabel,
    #[error("weights must be finite and non-negative")]
    BadWeight,
    #[error("weights sum to {0}, expected 1")]
    Unnormalized(f64),
    #[error("non-finite feature value")]
    NonFinite,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("rounds must be at least 1")]
    BadRounds,
    #[error("no stump does better than chance")]
    NoWeakLearner,
    #[error("corpus has no examples of {0}")]
    MissingClass(GestureLabel),
    #[error("clip {index}: {source}")]
    InvalidClip { index: usize, source: ClipError },
    #[error("clip {index}: {source}")]
    Feature { index: usize, source: FeatureError },
    #[error("{gesture}: {source}")]
    Gesture {
        gesture: GestureLabel,
        source: Box<TrainError>,
    },
}
