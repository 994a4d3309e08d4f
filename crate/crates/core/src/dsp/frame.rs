use std::f64::consts::PI;

use super::{DspError, Result};
use crate::audio_io::AudioClip;

/// Hamming-windowed frames of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl FrameMatrix {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }
}

/// `w[n] = 0.54 - 0.46 cos(2πn / (len - 1))`.
pub fn hamming_window(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Splits a clip into `ceil(len / hop)` windowed frames, zero-padding the tail.
pub fn frame_signal(clip: &AudioClip, frame_len: usize, hop: usize) -> Result<FrameMatrix> {
    if !frame_len.is_power_of_two() {
        return Err(DspError::BadFrameParams(format!("frame_len {frame_len} is not a power of two")));
    }
    if hop == 0 {
        return Err(DspError::BadFrameParams("hop must be at least 1".into()));
    }
    let samples = clip.samples();
    let window = hamming_window(frame_len);
    let n_frames = samples.len().div_ceil(hop).max(1);
    let frames = (0..n_frames)
        .map(|i| {
            let start = i * hop;
            window
                .iter()
                .enumerate()
                .map(|(n, w)| samples.get(start + n).map_or(0.0, |s| s * w))
                .collect()
        })
        .collect();
    Ok(FrameMatrix {
        frames,
        frame_len,
        hop,
        sample_rate: clip.sample_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 22050, "mem").unwrap()
    }

    #[test]
    fn window_endpoints() {
        let w = hamming_window(2048);
        assert!((w[0] - 0.08).abs() < 1e-15);
        assert!((w[2047] - 0.08).abs() < 1e-12);
        assert!(w.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn zero_signal_gives_zero_frames() {
        let f = frame_signal(&clip(vec![0.0; 5000]), 1024, 512).unwrap();
        assert!(f.frames.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn single_frame_is_windowed_signal() {
        let s: Vec<f64> = (0..256).map(|i| (i as f64 * 0.1).sin()).collect();
        let f = frame_signal(&clip(s.clone()), 256, 256).unwrap();
        assert_eq!(f.n_frames(), 1);
        let w = hamming_window(256);
        for n in 0..256 {
            assert_eq!(f.frames[0][n], s[n] * w[n]);
        }
    }

    #[test]
    fn frame_count_for_typical_clip() {
        let f = frame_signal(&clip(vec![0.1; 73_500]), 2048, 1024).unwrap();
        assert_eq!(f.n_frames(), 72);
        assert_eq!(f.frames[71].len(), 2048);
        // 71 * 1024 = 72704; 796 real samples then zero padding.
        assert_eq!(f.frames[71][796], 0.0);
        assert!(f.frames[71][795] != 0.0);
    }

    #[test]
    fn bad_params() {
        let c = clip(vec![1.0; 10]);
        assert!(matches!(frame_signal(&c, 1000, 10), Err(DspError::BadFrameParams(_))));
        assert!(matches!(frame_signal(&c, 1024, 0), Err(DspError::BadFrameParams(_))));
    }
}
