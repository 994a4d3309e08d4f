use std::f64::consts::PI;

use super::{DspError, PowerSpectra, Result};

/// Floor applied to filter energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters on the Mel axis, one row per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    /// `n_filters` rows of `frame_len / 2 + 1` weights.
    pub weights: Vec<Vec<f64>>,
    pub n_filters: usize,
    pub fmin: f64,
    pub fmax: f64,
    /// FFT bin at each of the `n_filters + 2` Mel points.
    pub edge_bins: Vec<usize>,
}

impl MelFilterbank {
    pub fn width(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Filter energies `weights · power_row`.
    pub fn apply(&self, power_row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w.iter().zip(power_row).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Builds `n_filters` triangles whose edges are equally spaced in Mel between
/// `fmin` and `fmax` and snapped to the nearest FFT bin.
///
/// Filter `j` rises linearly from edge `j` to a peak of exactly 1 at edge
/// `j + 1` and falls back to zero at edge `j + 2`.
pub fn mel_filterbank(
    n_filters: usize,
    frame_len: usize,
    sample_rate: u32,
    fmin: f64,
    fmax: f64,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate as f64 / 2.0;
    if n_filters == 0 {
        return Err(DspError::BadBankParams("n_filters must be at least 1".into()));
    }
    if !(fmin >= 0.0 && fmin < fmax && fmax <= nyquist) {
        return Err(DspError::BadBankParams(format!(
            "need 0 <= fmin < fmax <= {nyquist}, got fmin={fmin}, fmax={fmax}"
        )));
    }
    if frame_len < 2 {
        return Err(DspError::BadBankParams("frame_len must be at least 2".into()));
    }
    let width = frame_len / 2 + 1;
    let bin_hz = sample_rate as f64 / frame_len as f64;
    let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let step = (mel_hi - mel_lo) / (n_filters + 1) as f64;
    let edge_bins: Vec<usize> = (0..n_filters + 2)
        .map(|i| {
            let hz = mel_to_hz(mel_lo + step * i as f64);
            ((hz / bin_hz).round() as usize).min(width - 1)
        })
        .collect();
    if let Some(w) = edge_bins.windows(2).position(|w| w[0] >= w[1]) {
        return Err(DspError::BadBankParams(format!(
            "Mel points {w} and {} fall in the same FFT bin {}; use fewer filters or a longer frame",
            w + 1,
            edge_bins[w]
        )));
    }
    let weights = (0..n_filters)
        .map(|j| {
            let (lo, mid, hi) = (edge_bins[j], edge_bins[j + 1], edge_bins[j + 2]);
            (0..width)
                .map(|k| {
                    if k > lo && k <= mid {
                        (k - lo) as f64 / (mid - lo) as f64
                    } else if k > mid && k < hi {
                        (hi - k) as f64 / (hi - mid) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(MelFilterbank {
        weights,
        n_filters,
        fmin,
        fmax,
        edge_bins,
    })
}

fn dct_scale(k: usize, m: usize) -> f64 {
    if k == 0 {
        (1.0 / m as f64).sqrt()
    } else {
        (2.0 / m as f64).sqrt()
    }
}

/// Orthonormal DCT-II.
pub fn dct_ii_orthonormal(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    (0..m)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(n, v)| v * (PI * k as f64 * (2 * n + 1) as f64 / (2 * m) as f64).cos())
                .sum();
            dct_scale(k, m) * s
        })
        .collect()
}

/// Orthonormal DCT-III, the inverse of [`dct_ii_orthonormal`].
pub fn dct_iii_orthonormal(c: &[f64]) -> Vec<f64> {
    let m = c.len();
    (0..m)
        .map(|n| {
            c.iter()
                .enumerate()
                .map(|(k, v)| dct_scale(k, m) * v * (PI * k as f64 * (2 * n + 1) as f64 / (2 * m) as f64).cos())
                .sum()
        })
        .collect()
}

/// Cepstral coefficients per frame: orthonormal DCT-II of floored natural-log
/// filter energies, truncated to `n_coeffs`.
pub fn mfcc(power: &PowerSpectra, bank: &MelFilterbank, n_coeffs: usize) -> Result<Vec<Vec<f64>>> {
    if power.width() != bank.width() {
        return Err(DspError::DimensionMismatch(format!(
            "power spectrum has {} bins, filterbank expects {}",
            power.width(),
            bank.width()
        )));
    }
    if n_coeffs > bank.n_filters {
        return Err(DspError::DimensionMismatch(format!(
            "{n_coeffs} coefficients requested from {} filters",
            bank.n_filters
        )));
    }
    Ok(power
        .power
        .iter()
        .map(|row| {
            let log_e: Vec<f64> = bank.apply(row).into_iter().map(|e| e.max(LOG_FLOOR).ln()).collect();
            let mut c = dct_ii_orthonormal(&log_e);
            c.truncate(n_coeffs);
            c
        })
        .collect())
}
