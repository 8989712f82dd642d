//! The trained gesture database: eight detectors plus provenance, and its
//! `gmodel v1` text encoding.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use super::boost::{boost_with, BoostModel, BoostTrace};
use super::stump::{Stump, StumpSearch};
use super::{TrainConfig, TrainError};
use crate::features::{sliding_windows, FeatureVector, WindowConfig, FEATURE_SPEC_VERSION, WINDOW_FEATURES};
use crate::label::GestureLabel;
use crate::num::{fmt6, round6};
use crate::skeleton::Clip;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    /// One model per atomic gesture, in gesture code order.
    pub models: Vec<BoostModel>,
    pub feature_spec_version: u32,
    pub train_meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BundleError {
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error("unsupported bundle version {0}")]
    Version(u32),
    #[error("bundle feature spec {found} does not match {expected}")]
    FeatureSpec { found: u32, expected: u32 },
    #[error("bundle is missing models for {}", list(.0))]
    Missing(Vec<GestureLabel>),
    #[error("duplicate model for {0}")]
    Duplicate(GestureLabel),
    #[error("{0} is not an atomic gesture")]
    NotAtomic(GestureLabel),
    #[error("model {gesture}: {reason}")]
    BadModel {
        gesture: GestureLabel,
        reason: String,
    },
}

fn list(labels: &[GestureLabel]) -> String {
    labels.iter().map(|g| g.as_str()).collect::<Vec<_>>().join(", ")
}

impl ModelBundle {
    /// Checks the bundle invariants and puts models in code order.
    pub fn new(
        mut models: Vec<BoostModel>,
        feature_spec_version: u32,
        train_meta: BTreeMap<String, String>,
    ) -> Result<Self, BundleError> {
        let mut seen = [false; 8];
        for m in &models {
            let i = m.gesture.atomic_index().ok_or(BundleError::NotAtomic(m.gesture))?;
            if seen[i] {
                return Err(BundleError::Duplicate(m.gesture));
            }
            seen[i] = true;
            let bad = |reason: &str| BundleError::BadModel {
                gesture: m.gesture,
                reason: reason.to_string(),
            };
            if m.stumps.is_empty() {
                return Err(bad("no stumps"));
            }
            for s in &m.stumps {
                if s.feature_index >= WINDOW_FEATURES {
                    return Err(bad("feature index out of range"));
                }
                if s.polarity != 1 && s.polarity != -1 {
                    return Err(bad("polarity must be +1 or -1"));
                }
                if !(s.alpha.is_finite() && s.alpha >= 0.0) || !s.threshold.is_finite() {
                    return Err(bad("non-finite or negative parameter"));
                }
            }
            if m.alpha_sum() <= 0.0 {
                return Err(bad("alphas sum to zero"));
            }
        }
        let missing: Vec<GestureLabel> = GestureLabel::ATOMIC
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(g, _)| *g)
            .collect();
        if !missing.is_empty() {
            return Err(BundleError::Missing(missing));
        }
        models.sort_by_key(|m| m.gesture);
        Ok(Self {
            models,
            feature_spec_version,
            train_meta,
        })
    }

    pub fn model(&self, g: GestureLabel) -> Option<&BoostModel> {
        g.atomic_index().map(|i| &self.models[i])
    }

    /// Confidence of every atomic detector, in gesture code order.
    pub fn confidences(&self, x: &FeatureVector) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (o, m) in out.iter_mut().zip(&self.models) {
            *o = m.confidence(x.as_slice());
        }
        out
    }

    pub fn check_feature_spec(&self) -> Result<(), BundleError> {
        if self.feature_spec_version != FEATURE_SPEC_VERSION {
            return Err(BundleError::FeatureSpec {
                found: self.feature_spec_version,
                expected: FEATURE_SPEC_VERSION,
            });
        }
        Ok(())
    }
}

/// Windows eligible for training, with the atomic gestures whose spans
/// contain each one. NONE-clip windows carry no gestures.
#[derive(Debug, Clone, Default)]
pub struct LabelledWindows {
    pub samples: Vec<FeatureVector>,
    pub tags: Vec<u8>,
}

impl LabelledWindows {
    pub fn labels_for(&self, g: GestureLabel) -> Vec<i8> {
        let bit = 1u8 << g.code();
        self.tags
            .iter()
            .map(|t| if t & bit != 0 { 1 } else { -1 })
            .collect()
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Positives for `g` are windows lying wholly inside a `g` span; windows
/// inside other spans and every window of an unlabelled clip are negatives.
/// Windows that straddle a span boundary are not used.
pub fn corpus_samples(corpus: &[Clip], window: &WindowConfig) -> Result<LabelledWindows, TrainError> {
    for (index, clip) in corpus.iter().enumerate() {
        clip.validate()
            .map_err(|source| TrainError::InvalidClip { index, source })?;
    }
    for g in GestureLabel::ATOMIC {
        if !corpus.iter().any(|c| c.spans.iter().any(|s| s.gesture == g)) {
            return Err(TrainError::MissingClass(g));
        }
    }
    if !corpus.iter().any(|c| c.spans.is_empty()) {
        return Err(TrainError::MissingClass(GestureLabel::None));
    }
    window
        .validate()
        .map_err(|source| TrainError::Feature { index: 0, source })?;

    let per_clip: Vec<Vec<(FeatureVector, u8)>> = corpus
        .par_iter()
        .enumerate()
        .map(|(index, clip)| {
            let windows = sliding_windows(&clip.frames, clip.fps, window)
                .map_err(|source| TrainError::Feature { index, source })?;
            let rest = clip.spans.is_empty();
            Ok(windows
                .into_iter()
                .filter_map(|(end, x)| {
                    let first = end + 1 - window.window;
                    let tag = clip
                        .spans
                        .iter()
                        .filter(|s| s.contains_range(first, end))
                        .fold(0u8, |t, s| t | (1 << s.gesture.code()));
                    (rest || tag != 0).then_some((x, tag))
                })
                .collect())
        })
        .collect::<Result<_, TrainError>>()?;

    let mut out = LabelledWindows::default();
    for (x, tag) in per_clip.into_iter().flatten() {
        out.samples.push(x);
        out.tags.push(tag);
    }
    Ok(out)
}

fn quantized(model: BoostModel) -> BoostModel {
    BoostModel {
        stumps: model
            .stumps
            .into_iter()
            .map(|s| Stump {
                threshold: round6(s.threshold),
                alpha: round6(s.alpha),
                ..s
            })
            .collect(),
        ..model
    }
}

/// Trains all eight detectors and also returns each run's boosting trace
/// (traces describe the unquantized ensembles).
pub fn train_bundle_with_traces(
    corpus: &[Clip],
    window: &WindowConfig,
    config: &TrainConfig,
) -> Result<(ModelBundle, Vec<BoostTrace>), TrainError> {
    if config.rounds < 1 {
        return Err(TrainError::BadRounds);
    }
    let data = corpus_samples(corpus, window)?;
    let search = StumpSearch::new(&data.samples)?;
    let runs: Vec<(BoostModel, BoostTrace)> = GestureLabel::ATOMIC
        .par_iter()
        .map(|&g| {
            let labels = data.labels_for(g);
            boost_with(g, &search, &data.samples, &labels, config).map_err(|e| TrainError::Gesture {
                gesture: g,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let mut meta = BTreeMap::new();
    meta.insert("seed".into(), config.seed.to_string());
    meta.insert("rounds".into(), config.rounds.to_string());
    meta.insert("volunteers".into(), config.volunteers.to_string());
    meta.insert("clips".into(), corpus.len().to_string());
    meta.insert("windows".into(), data.samples.len().to_string());
    meta.insert("window".into(), window.window.to_string());
    let (models, traces): (Vec<_>, Vec<_>) = runs.into_iter().map(|(m, t)| (quantized(m), t)).unzip();
    let bundle = ModelBundle::new(models, FEATURE_SPEC_VERSION, meta)
        .expect("training produces one valid model per gesture");
    Ok((bundle, traces))
}

pub fn train_bundle(
    corpus: &[Clip],
    window: &WindowConfig,
    config: &TrainConfig,
) -> Result<ModelBundle, TrainError> {
    train_bundle_with_traces(corpus, window, config).map(|(b, _)| b)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Canonical `gmodel v1` text, newline-terminated.
pub fn save_bundle(bundle: &ModelBundle) -> Vec<u8> {
    let mut out = format!(
        "{{\"v\":{},\"feature_spec\":{},\"meta\":{{",
        BUNDLE_FORMAT_VERSION, bundle.feature_spec_version
    );
    for (i, (k, v)) in bundle.train_meta.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}:{}", json_string(k), json_string(v));
    }
    out.push_str("},\"models\":[");
    for (i, m) in bundle.models.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"g\":\"{}\",\"stumps\":[", m.gesture);
        for (k, s) in m.stumps.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(
                out,
                "{{\"f\":{},\"t\":{},\"p\":{},\"a\":{}}}",
                s.feature_index,
                fmt6(s.threshold),
                s.polarity,
                fmt6(s.alpha)
            );
        }
        out.push_str("]}");
    }
    out.push_str("]}\n");
    out.into_bytes()
}

#[derive(Deserialize)]
struct BundleRec {
    v: u32,
    feature_spec: u32,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    models: Vec<ModelRec>,
}

#[derive(Deserialize)]
struct ModelRec {
    g: String,
    stumps: Vec<StumpRec>,
}

#[derive(Deserialize)]
struct StumpRec {
    f: usize,
    t: f64,
    p: i8,
    a: f64,
}

pub fn load_bundle(bytes: &[u8]) -> Result<ModelBundle, BundleError> {
    let rec: BundleRec =
        serde_json::from_slice(bytes).map_err(|e| BundleError::Malformed(e.to_string()))?;
    if rec.v != BUNDLE_FORMAT_VERSION {
        return Err(BundleError::Version(rec.v));
    }
    if rec.feature_spec != FEATURE_SPEC_VERSION {
        return Err(BundleError::FeatureSpec {
            found: rec.feature_spec,
            expected: FEATURE_SPEC_VERSION,
        });
    }
    let models = rec
        .models
        .into_iter()
        .map(|m| {
            let gesture: GestureLabel = m
                .g
                .parse()
                .map_err(|_| BundleError::Malformed(format!("unknown gesture {:?}", m.g)))?;
            let stumps: Vec<Stump> = m
                .stumps
                .into_iter()
                .map(|s| Stump {
                    feature_index: s.f,
                    threshold: s.t,
                    polarity: s.p,
                    alpha: s.a,
                })
                .collect();
            Ok(BoostModel {
                gesture,
                trained_rounds: stumps.len(),
                stumps,
            })
        })
        .collect::<Result<Vec<_>, BundleError>>()?;
    ModelBundle::new(models, rec.feature_spec, rec.meta)
}
