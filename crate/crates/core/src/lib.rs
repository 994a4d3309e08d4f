//! Speech emotion recognition from first principles.
//!
//! The crate covers the whole pipeline: WAV ingestion and dataset manifests
//! ([`audio_io`]), signal-processing kernels ([`dsp`]), per-clip feature
//! assembly and Fisher-score selection ([`features`]), a CNN-LSTM network with
//! hand-written backpropagation ([`nn`]), and the training / evaluation loop
//! with its reporting files ([`train_eval`]).
//!
//! Data-parallel loops (feature extraction across clips, per-sample gradients
//! within a batch) go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise. Reductions
//! always run in a fixed order so results do not depend on the thread count.

pub mod audio_io;
pub mod config;
pub mod dsp;
pub mod exec;
pub mod features;
pub mod nn;
pub mod pipeline;
pub mod train_eval;

pub use audio_io::{AudioClip, Dataset, EmotionLabel, Gender, Manifest, ManifestEntry};

pub use config::RunConfig;
pub use exec::Execution;
