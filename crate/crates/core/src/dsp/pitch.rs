use super::{DspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseTrend {
    Rising,
    Falling,
    Flat,
}

/// Dominant-frequency movement over a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrend {
    pub coarse: CoarseTrend,
    /// Mean dominant frequency of the beginning, middle and ending thirds.
    pub segment_means: [f64; 3],
    /// Per-frame difference to the previous frame; frame 0 takes the forward difference.
    pub fine_deltas: Vec<f64>,
}

/// Coarse and fine pitch movement from per-frame dominant frequencies.
///
/// Frames are split into three contiguous thirds, the remainder going to the
/// earlier thirds. The third with the highest mean decides the coarse trend:
/// ending → rising, beginning → falling, middle → flat. A spread of segment
/// means below `flatness_threshold` is always flat.
pub fn pitch_trend(dominant_freqs: &[f64], flatness_threshold: f64) -> Result<PitchTrend> {
    let n = dominant_freqs.len();
    if n < 3 {
        return Err(DspError::TooFewFrames(n));
    }
    let mut segment_means = [0.0; 3];
    let mut start = 0;
    for (i, mean) in segment_means.iter_mut().enumerate() {
        let len = n / 3 + usize::from(i < n % 3);
        let seg = &dominant_freqs[start..start + len];
        *mean = seg.iter().sum::<f64>() / len as f64;
        start += len;
    }

    let hi = segment_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = segment_means.iter().cloned().fold(f64::INFINITY, f64::min);
    let top = segment_means.iter().position(|&m| m == hi).unwrap_or(1);
    let coarse = if hi - lo < flatness_threshold {
        CoarseTrend::Flat
    } else {
        match top {
            0 => CoarseTrend::Falling,
            2 => CoarseTrend::Rising,
            _ => CoarseTrend::Flat,
        }
    };

    let mut fine_deltas = Vec::with_capacity(n);
    fine_deltas.push(dominant_freqs[1] - dominant_freqs[0]);
    fine_deltas.extend(dominant_freqs.windows(2).map(|w| w[1] - w[0]));

    Ok(PitchTrend {
        coarse,
        segment_means,
        fine_deltas,
    })
}
