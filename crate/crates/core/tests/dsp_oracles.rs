mod common;

use common::*;
use ser_core::audio_io::{resample_linear, AudioClip};
use ser_core::dsp::{dominant_frequency, frame_signal, power_spectra};

#[test]
fn fft_matches_dft_for_every_power_of_two() {
    let mut n = 4;
    while n <= 2048 {
        let rep = fft_check(n, n as u64);
        assert!(rep.rel_err < 1e-9, "n={n}: {rep:?}");
        assert!(rep.parseval_rel < 1e-9, "n={n}: {rep:?}");
        assert!(rep.hermitian_err < 1e-9, "n={n}: {rep:?}");
        n *= 2;
    }
}

#[test]
fn mfcc_suite() {
    let rep = mfcc_check(5);
    assert!(rep.mel_round_trip < 1e-9, "{rep:?}");
    assert!(rep.mel_vs_oracle < 1e-12, "{rep:?}");
    assert!(rep.dct_round_trip < 1e-9, "{rep:?}");
    assert!(rep.scale_shift_c0 < 1e-8, "{rep:?}");
    assert!(rep.scale_shift_rest < 1e-8, "{rep:?}");
    assert!(rep.filterbank < 1e-12, "{rep:?}");
}

#[test]
fn stats_match_direct_summation() {
    assert!(stats_check(100, 3) < 1e-10);
}

#[test]
fn dominant_frequency_of_a_tone() {
    let rate = 22050;
    for f in [300.0, 1000.0, 4000.0] {
        let clip = AudioClip::new(tone(f, 0.5, rate, 1), rate, "tone").unwrap();
        let frames = frame_signal(&clip, 2048, 1024).unwrap();
        let power = power_spectra(&frames).unwrap();
        for row in &power.power[..power.n_frames() - 1] {
            let d = dominant_frequency(row, power.bin_hz);
            assert!((d - f).abs() <= power.bin_hz / 2.0 + 1e-9, "{d} vs {f}");
        }
    }
}

#[test]
fn resampling_preserves_tone_frequency() {
    let clip = AudioClip::new(tone(440.0, 1.0, 44100, 2), 44100, "t").unwrap();
    let down = resample_linear(&clip, 22050).unwrap();
    assert_eq!(down.len(), 22050);
    let frames = frame_signal(&down, 2048, 1024).unwrap();
    let power = power_spectra(&frames).unwrap();
    let d = dominant_frequency(&power.power[3], power.bin_hz);
    assert!((d - 440.0).abs() <= power.bin_hz);
}
