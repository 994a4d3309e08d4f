use serde::{Deserialize, Serialize};

use super::Result;
use crate::audio_io::{AudioClip, EmotionLabel, Gender};
use crate::dsp::{
    dominant_frequency, frame_signal, mel_filterbank, mfcc, pitch_trend, power_spectra, signal_stats, top_peaks,
    MelFilterbank, PitchTrend, PowerSpectra, SignalStats,
};

pub const N_PEAKS: usize = 3;
pub const N_GLOBALS: usize = 10;

pub const GLOBAL_NAMES: [&str; N_GLOBALS] = [
    "avg_energy",
    "mean",
    "std",
    "max",
    "min",
    "skewness",
    "kurtosis",
    "pitch_begin",
    "pitch_middle",
    "pitch_end",
];

/// Framing and filterbank settings shared by every clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    pub frame_len: usize,
    pub hop: usize,
    pub n_filters: usize,
    pub n_mfcc: usize,
    pub fmin: f64,
    pub fmax: f64,
    /// Coarse pitch spread (Hz) below which the trend counts as flat.
    pub flatness_hz: f64,
    /// Frames kept per clip after tail padding / truncation.
    pub max_frames: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            frame_len: 2048,
            hop: 1024,
            n_filters: 26,
            n_mfcc: 13,
            fmin: 0.0,
            fmax: 11_025.0,
            flatness_hz: 10.0,
            max_frames: 70,
        }
    }
}

impl FeatureParams {
    /// Per-frame channels: MFCCs, peak frequencies, peak powers, energy, pitch delta.
    pub fn n_channels(&self) -> usize {
        self.n_mfcc + 2 * N_PEAKS + 2
    }

    pub fn channel_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.n_mfcc).map(|i| format!("mfcc{i}")).collect();
        names.extend((0..N_PEAKS).map(|i| format!("peak_hz{i}")));
        names.extend((0..N_PEAKS).map(|i| format!("peak_pow{i}")));
        names.push("energy".into());
        names.push("pitch_delta".into());
        names
    }

    /// Flattened column names: `t{frame}_{channel}` in frame-major order, then the globals.
    pub fn column_names(&self) -> Vec<String> {
        let channels = self.channel_names();
        let mut names = Vec::with_capacity(self.n_columns());
        for t in 0..self.max_frames {
            for c in &channels {
                names.push(format!("t{t:02}_{c}"));
            }
        }
        names.extend(GLOBAL_NAMES.iter().map(|s| s.to_string()));
        names
    }

    pub fn n_columns(&self) -> usize {
        self.max_frames * self.n_channels() + N_GLOBALS
    }
}

/// Intermediate DSP results for one clip, before padding.
#[derive(Debug, Clone)]
pub struct ClipAnalysis {
    pub power: PowerSpectra,
    pub mfcc: Vec<Vec<f64>>,
    pub frame_energy: Vec<f64>,
    pub peaks: Vec<Vec<(f64, f64)>>,
    pub dominant: Vec<f64>,
    pub pitch: PitchTrend,
    pub stats: SignalStats,
}

/// Per-clip network input: a `[max_frames × n_channels]` sequence plus globals.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipFeatures {
    /// Row-major `[n_frames × n_channels]`.
    pub sequence: Vec<f64>,
    pub n_frames: usize,
    pub n_channels: usize,
    pub globals: [f64; N_GLOBALS],
    pub label: EmotionLabel,
    pub gender: Gender,
}

impl ClipFeatures {
    pub fn frame(&self, t: usize) -> &[f64] {
        &self.sequence[t * self.n_channels..(t + 1) * self.n_channels]
    }

    /// Sequence followed by globals.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.sequence.clone();
        v.extend_from_slice(&self.globals);
        v
    }
}

/// Statistics that tolerate constant signals: skewness and kurtosis become 0.
fn lenient_stats(samples: &[f64]) -> SignalStats {
    signal_stats(samples).unwrap_or_else(|_| {
        let v = samples[0];
        SignalStats {
            avg_energy: v * v,
            mean: v,
            std: 0.0,
            max: v,
            min: v,
            skewness: 0.0,
            kurtosis: 0.0,
        }
    })
}

/// Runs the DSP chain on a clip.
pub fn analyze(clip: &AudioClip, params: &FeatureParams, bank: &MelFilterbank) -> Result<ClipAnalysis> {
    let frames = frame_signal(clip, params.frame_len, params.hop)?;
    let power = power_spectra(&frames)?;
    let mfcc = mfcc(&power, bank, params.n_mfcc)?;
    let frame_energy = frames
        .frames
        .iter()
        .map(|f| f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64)
        .collect();
    let peaks = power.power.iter().map(|row| top_peaks(row, N_PEAKS, power.bin_hz)).collect();
    let dominant: Vec<f64> = power
        .power
        .iter()
        .map(|row| dominant_frequency(row, power.bin_hz))
        .collect();
    let pitch = pitch_trend(&dominant, params.flatness_hz)?;
    let stats = lenient_stats(clip.samples());
    Ok(ClipAnalysis {
        power,
        mfcc,
        frame_energy,
        peaks,
        dominant,
        pitch,
        stats,
    })
}

/// Lays DSP outputs out in the fixed channel order, padding with zero rows or
/// truncating at the tail to `params.max_frames`.
pub fn assemble(analysis: &ClipAnalysis, params: &FeatureParams, label: EmotionLabel, gender: Gender) -> ClipFeatures {
    let n_channels = params.n_channels();
    let mut sequence = vec![0.0; params.max_frames * n_channels];
    let available = analysis.mfcc.len().min(params.max_frames);
    for t in 0..available {
        let row = &mut sequence[t * n_channels..(t + 1) * n_channels];
        let (mfcc_part, rest) = row.split_at_mut(params.n_mfcc);
        mfcc_part.copy_from_slice(&analysis.mfcc[t]);
        for (i, &(hz, pow)) in analysis.peaks[t].iter().enumerate() {
            rest[i] = hz;
            rest[N_PEAKS + i] = pow;
        }
        rest[2 * N_PEAKS] = analysis.frame_energy[t];
        rest[2 * N_PEAKS + 1] = analysis.pitch.fine_deltas[t];
    }
    let s = &analysis.stats;
    let m = analysis.pitch.segment_means;
    ClipFeatures {
        sequence,
        n_frames: params.max_frames,
        n_channels,
        globals: [s.avg_energy, s.mean, s.std, s.max, s.min, s.skewness, s.kurtosis, m[0], m[1], m[2]],
        label,
        gender,
    }
}

/// Owns the filterbank so it is built once per run.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    params: FeatureParams,
    sample_rate: u32,
    bank: MelFilterbank,
}

impl FeatureExtractor {
    pub fn new(params: FeatureParams, sample_rate: u32) -> Result<Self> {
        let bank = mel_filterbank(params.n_filters, params.frame_len, sample_rate, params.fmin, params.fmax)?;
        Ok(Self {
            params,
            sample_rate,
            bank,
        })
    }

    pub fn params(&self) -> &FeatureParams {
        &self.params
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.bank
    }

    pub fn analyze(&self, clip: &AudioClip) -> Result<ClipAnalysis> {
        analyze(clip, &self.params, &self.bank)
    }

    pub fn extract(&self, clip: &AudioClip, label: EmotionLabel, gender: Gender) -> Result<ClipFeatures> {
        Ok(assemble(&self.analyze(clip)?, &self.params, label, gender))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::LOG_FLOOR;
    use std::f64::consts::PI;

    fn extractor() -> FeatureExtractor {
        FeatureExtractor::new(FeatureParams::default(), 22050).unwrap()
    }

    fn tone(n: usize) -> AudioClip {
        let s = (0..n)
            .map(|i| 0.5 * (2.0 * PI * 300.0 * i as f64 / 22050.0).sin())
            .collect();
        AudioClip::new(s, 22050, "tone").unwrap()
    }

    #[test]
    fn channel_layout() {
        let p = FeatureParams::default();
        assert_eq!(p.n_channels(), 21);
        assert_eq!(p.n_columns(), 1480);
        let names = p.column_names();
        assert_eq!(names.len(), 1480);
        assert_eq!(names[0], "t00_mfcc0");
        assert_eq!(names[20], "t00_pitch_delta");
        assert_eq!(names[1479], "pitch_end");
        let unique: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), names.len());
    }

    #[test]
    fn long_clip_is_truncated() {
        let clip = tone(73_500);
        let a = extractor().analyze(&clip).unwrap();
        assert_eq!(a.mfcc.len(), 72);
        let f = assemble(&a, &FeatureParams::default(), EmotionLabel::Sad, Gender::Male);
        assert_eq!(f.sequence.len(), 70 * 21);
        assert_eq!(f.frame(69)[..13], a.mfcc[69][..]);
    }

    #[test]
    fn short_clip_is_zero_padded() {
        // 40 frames: ceil(40_000 / 1024) = 40.
        let f = extractor().extract(&tone(40_000), EmotionLabel::Fear, Gender::Female).unwrap();
        assert!(f.frame(39).iter().any(|&v| v != 0.0));
        for t in 40..70 {
            assert!(f.frame(t).iter().all(|&v| v == 0.0), "row {t}");
        }
        assert_eq!(f.label, EmotionLabel::Fear);
    }

    #[test]
    fn silent_clip() {
        let clip = AudioClip::new(vec![0.0; 22050], 22050, "silence").unwrap();
        let f = extractor().extract(&clip, EmotionLabel::Neutral, Gender::Male).unwrap();
        let floor = LOG_FLOOR.ln() * 26f64.sqrt();
        for t in 0..22 {
            assert_eq!(f.frame(t)[19], 0.0, "energy at {t}");
            assert!((f.frame(t)[0] - floor).abs() < 1e-9);
        }
        assert!(f.flatten().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn deterministic() {
        let clip = tone(30_000);
        let e = extractor();
        assert_eq!(
            e.extract(&clip, EmotionLabel::Anger, Gender::Male).unwrap(),
            e.extract(&clip, EmotionLabel::Anger, Gender::Male).unwrap()
        );
    }

    #[test]
    fn too_short_for_pitch_trend() {
        let clip = tone(1000);
        assert!(extractor().extract(&clip, EmotionLabel::Anger, Gender::Male).is_err());
    }
}
