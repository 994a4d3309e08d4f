//! Audio ingestion: WAV decoding, resampling, dataset label parsing and the
//! dataset manifest.

mod labels;
mod manifest;
mod wav;

use std::path::PathBuf;

use thiserror::Error;

pub use labels::{parse_ravdess, parse_savee, Dataset, EmotionLabel, Gender};
pub use manifest::{build_manifest, manifest_from_paths, Manifest, ManifestEntry};
pub use wav::{decode_wav, load_wav, write_wav_pcm16};

/// Sample rate every clip is brought to before feature extraction.
pub const CANONICAL_RATE: u32 = 22_050;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV: {0}")]
    MalformedWav(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("WAV contains no audio data")]
    EmptyAudio,
    #[error("unrecognized dataset filename: {0}")]
    UnrecognizedFilename(String),
    #[error("no parseable audio files found")]
    NoFilesFound,
    #[error("sample rate must be positive")]
    InvalidRate,
    #[error("manifest: {0}")]
    Manifest(String),
}

pub type Result<T> = std::result::Result<T, AudioError>;

/// Mono PCM audio in [-1, 1] with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source_path: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_path: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        if sample_rate == 0 {
            return Err(AudioError::InvalidRate);
        }
        Ok(Self {
            samples,
            sample_rate,
            source_path: source_path.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Linear-interpolation resampler.
///
/// Output sample `i` sits at input position `i * from / to`; positions past
/// the last input sample hold the last value. No anti-alias filtering is
/// applied, so downsampling folds energy above the new Nyquist frequency.
pub fn resample_linear(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(AudioError::InvalidRate);
    }
    if target_rate == clip.sample_rate {
        return Ok(clip.clone());
    }
    let src = clip.samples();
    let ratio = clip.sample_rate as f64 / target_rate as f64;
    let out_len = ((src.len() as f64 / ratio).round() as usize).max(1);
    let last = src.len() - 1;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * ratio;
            let left = pos.floor() as usize;
            if left >= last {
                return src[last];
            }
            let frac = pos - left as f64;
            src[left] + (src[left + 1] - src[left]) * frac
        })
        .collect();
    AudioClip::new(samples, target_rate, clip.source_path.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn clip(samples: Vec<f64>, rate: u32) -> AudioClip {
        AudioClip::new(samples, rate, "mem").unwrap()
    }

    #[test]
    fn clip_invariants() {
        assert!(matches!(AudioClip::new(vec![], 8000, "x"), Err(AudioError::EmptyAudio)));
        assert!(matches!(AudioClip::new(vec![0.0], 0, "x"), Err(AudioError::InvalidRate)));
        let c = clip(vec![0.0; 22050], 22050);
        assert_eq!(c.duration_s(), 1.0);
    }

    #[test]
    fn resample_identity_when_rates_match() {
        let c = clip(vec![0.1, -0.4, 0.9], 16000);
        assert_eq!(resample_linear(&c, 16000).unwrap(), c);
    }

    #[test]
    fn resample_constant_stays_constant() {
        let c = clip(vec![0.7; 4410], 44100);
        for target in [8000, 22050, 48000] {
            let r = resample_linear(&c, target).unwrap();
            assert!(r.samples().iter().all(|&v| (v - 0.7).abs() < 1e-15));
            assert!((r.duration_s() - c.duration_s()).abs() <= 1.0 / target as f64);
        }
    }

    #[test]
    fn resample_sine_matches_closed_form() {
        let from = 8000;
        let to = 16000;
        let n = 8000;
        let src: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 100.0 * i as f64 / from as f64).sin())
            .collect();
        let r = resample_linear(&clip(src, from), to).unwrap();
        assert_eq!(r.len(), 16000);
        // The final output sample sits past the last input; skip the clamped tail.
        for (i, &v) in r.samples().iter().enumerate().take(r.len() - 2) {
            let exact = (2.0 * PI * 100.0 * i as f64 / to as f64).sin();
            assert!((v - exact).abs() < 0.01, "sample {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn resample_rejects_zero_rate() {
        assert!(resample_linear(&clip(vec![1.0], 8000), 0).is_err());
    }
}
