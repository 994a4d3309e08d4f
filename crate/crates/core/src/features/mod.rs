//! Per-clip feature assembly, the dataset feature matrix, Fisher-score
//! selection and z-score normalization.

mod assemble;
mod matrix;
mod select;

use thiserror::Error;

pub use assemble::{analyze, assemble, ClipAnalysis, ClipFeatures, FeatureExtractor, FeatureParams, GLOBAL_NAMES, N_GLOBALS, N_PEAKS};
pub use matrix::{FeatureMatrix, format_sig9};
pub use select::{fisher_score, select_top_k, zscore_normalize, Normalizer, SelectionReport, SEPARABLE_SCORE, STD_FLOOR};

use crate::audio_io::AudioError;
use crate::dsp::DspError;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("insufficient classes: {0}")]
    InsufficientClasses(String),
    #[error("k = {k} must be between 1 and {d}")]
    BadK { k: usize, d: usize },
    #[error("feature file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FeatureError>;
