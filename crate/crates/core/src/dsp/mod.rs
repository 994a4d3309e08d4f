//! Signal-processing kernels: framing, FFT, power spectra, spectral peaks,
//! Mel filterbank, MFCC, clip statistics and pitch trend.
//!
//! Everything here is a pure function of its inputs.

mod export;
mod fft;
mod frame;
mod mel;
mod pitch;
mod spectrum;
mod stats;

use thiserror::Error;

pub use export::{write_spectrogram_csv, write_waveplot_csv};
pub use fft::{fft, fft_in_place};
pub use frame::{frame_signal, hamming_window, FrameMatrix};
pub use mel::{dct_ii_orthonormal, dct_iii_orthonormal, hz_to_mel, mel_filterbank, mel_to_hz, mfcc, MelFilterbank, LOG_FLOOR};
pub use pitch::{pitch_trend, CoarseTrend, PitchTrend};
pub use spectrum::{dominant_frequency, power_spectra, power_spectrum, top_peaks, PowerSpectra};
pub use stats::{signal_stats, SignalStats};

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("bad frame parameters: {0}")]
    BadFrameParams(String),
    #[error("bad filterbank parameters: {0}")]
    BadBankParams(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("signal has zero variance")]
    DegenerateSignal,
    #[error("pitch trend needs at least 3 frames, got {0}")]
    TooFewFrames(usize),
}

pub type Result<T> = std::result::Result<T, DspError>;
