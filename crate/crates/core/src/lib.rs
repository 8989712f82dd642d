//! Skeleton-based recognition of social touch gestures (high-five, handshake,
//! shoulder pat, hand on mat, and the composite hug) for videochat sessions.
//!
//! The crate is organized as a pipeline:
//!
//! * [`skeleton`]: joint/frame/clip data model, the `skel-jsonl` clip format,
//!   and a seeded synthetic performer standing in for a depth sensor.
//! * [`features`]: body-normalized per-frame features and window summaries.
//! * [`classifier`]: one-vs-rest AdaBoost stump detectors and their bundle file.
//! * [`detector`]: streaming hysteresis detection and hug composition.
//! * [`dyad`]: two-peer confidence exchange, fusion and a simulated network.
//! * [`eval`]: prompted-gesture pilot runs and confusion matrices.

pub mod classifier;
pub mod detector;
pub mod dyad;
pub mod eval;
pub mod features;
pub mod geom;
pub mod label;
pub mod num;
pub mod rng;
pub mod skeleton;

pub use classifier::{load_bundle, save_bundle, train_bundle, BoostModel, ModelBundle, TrainConfig};

pub use detector::{classify_prompted_clip, DetectionEvent, Detector, DetectorConfig};
pub use features::{FeatureVector, WindowConfig};
pub use geom::Vec3;
pub use label::GestureLabel;
pub use skeleton::{parse_clip, serialize_clip, synth_clip, Clip, SkeletonFrame, SynthParams};
