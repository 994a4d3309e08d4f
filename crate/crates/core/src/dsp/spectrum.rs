use num_complex::Complex64;

use super::{fft, FrameMatrix, Result};

/// One-sided power spectra of every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectra {
    /// `n_frames` rows of `frame_len / 2 + 1` bins.
    pub power: Vec<Vec<f64>>,
    pub bin_hz: f64,
}

impl PowerSpectra {
    pub fn n_frames(&self) -> usize {
        self.power.len()
    }

    pub fn width(&self) -> usize {
        self.power.first().map_or(0, Vec::len)
    }
}

/// `|X[k]|²` for `k` in `0..=n/2`, without any `1/N` normalization.
pub fn power_spectrum(spectrum: &[Complex64]) -> Vec<f64> {
    let half = spectrum.len() / 2;
    spectrum[..=half.min(spectrum.len().saturating_sub(1))]
        .iter()
        .map(Complex64::norm_sqr)
        .collect()
}

pub fn power_spectra(frames: &FrameMatrix) -> Result<PowerSpectra> {
    let power = frames
        .frames
        .iter()
        .map(|f| fft(f, frames.frame_len).map(|x| power_spectrum(&x)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerSpectra {
        power,
        bin_hz: frames.sample_rate as f64 / frames.frame_len as f64,
    })
}

/// The `k` strongest bins as `(frequency, power)`, strongest first.
///
/// Ties go to the lower bin. Returns fewer than `k` pairs when the row is shorter.
pub fn top_peaks(power: &[f64], k: usize, bin_hz: f64) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..power.len()).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| (i as f64 * bin_hz, power[i]))
        .collect()
}

/// Frequency of the strongest non-DC bin (lowest index on ties).
///
/// A row with only the DC bin yields 0 Hz.
pub fn dominant_frequency(power_row: &[f64], bin_hz: f64) -> f64 {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in power_row.iter().enumerate().skip(1) {
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((i, p));
        }
    }
    best.map_or(0.0, |(i, _)| i as f64 * bin_hz)
}
