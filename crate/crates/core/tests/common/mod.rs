//! Oracles and fixtures shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::{LN_10, PI};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ser_core::dsp::{dct_ii_orthonormal, dct_iii_orthonormal, fft_in_place, hz_to_mel, mel_filterbank, mel_to_hz, mfcc, PowerSpectra};
use ser_core::nn::{
    conv1d_backward, conv1d_forward, cross_entropy, dense_backward, dense_forward, lstm_backward, lstm_forward,
    maxpool_backward, maxpool_forward, softmax, softmax_cross_entropy_backward, LstmParams, Model, ModelConfig, ModelInput,
    Tensor,
};
use ser_core::dsp::{signal_stats, SignalStats};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

// ---------------------------------------------------------------- FFT

pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| {
                    // Reduce the phase index first so the angle stays small.
                    let idx = (k * t) % n;
                    v * Complex64::from_polar(1.0, -2.0 * PI * idx as f64 / n as f64)
                })
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FftReport {
    /// max |fft − dft| / max |dft|.
    pub rel_err: f64,
    pub parseval_rel: f64,
    pub hermitian_err: f64,
}

impl FftReport {
    pub fn worst(self, o: FftReport) -> FftReport {
        FftReport {
            rel_err: self.rel_err.max(o.rel_err),
            parseval_rel: self.parseval_rel.max(o.parseval_rel),
            hermitian_err: self.hermitian_err.max(o.hermitian_err),
        }
    }
}

/// Compares one random complex transform and one random real transform of size `n`.
pub fn fft_check(n: usize, seed: u64) -> FftReport {
    let mut r = rng(seed);
    let x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    let mut fast = x.clone();
    fft_in_place(&mut fast).unwrap();
    let slow = dft(&x);
    let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let rel_err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;

    let time_energy: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    let freq_energy: f64 = fast.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
    let parseval_rel = (time_energy - freq_energy).abs() / time_energy;

    let mut real: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.random_range(-1.0..1.0), 0.0)).collect();
    fft_in_place(&mut real).unwrap();
    let rscale = real.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let hermitian_err = (1..n)
        .map(|k| (real[k] - real[n - k].conj()).norm())
        .fold(real[0].im.abs(), f64::max)
        / rscale;
    FftReport {
        rel_err,
        parseval_rel,
        hermitian_err,
    }
}

// ---------------------------------------------------------------- Mel / MFCC

pub fn mel_oracle(f: f64) -> f64 {
    2595.0 / LN_10 * (1.0 + f / 700.0).ln()
}

pub fn mel_inverse_oracle(m: f64) -> f64 {
    700.0 * ((m * LN_10 / 2595.0).exp() - 1.0)
}

/// Triangles evaluated on the Hz axis at each bin frequency, with edges
/// equally spaced in Mel and snapped to the nearest bin.
pub fn filterbank_oracle(n_filters: usize, frame_len: usize, sr: u32, fmin: f64, fmax: f64) -> Vec<Vec<f64>> {
    let width = frame_len / 2 + 1;
    let bin_hz = sr as f64 / frame_len as f64;
    let (lo, hi) = (mel_oracle(fmin), mel_oracle(fmax));
    let edges_hz: Vec<f64> = (0..n_filters + 2)
        .map(|i| {
            let hz = mel_inverse_oracle(lo + (hi - lo) * i as f64 / (n_filters + 1) as f64);
            (hz / bin_hz).round().min((width - 1) as f64) * bin_hz
        })
        .collect();
    (0..n_filters)
        .map(|j| {
            let (a, b, c) = (edges_hz[j], edges_hz[j + 1], edges_hz[j + 2]);
            (0..width)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    let up = (f - a) / (b - a);
                    let down = (c - f) / (c - b);
                    up.min(down).max(0.0)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MfccReport {
    pub mel_round_trip: f64,
    pub mel_vs_oracle: f64,
    pub dct_round_trip: f64,
    pub scale_shift_c0: f64,
    pub scale_shift_rest: f64,
    pub filterbank: f64,
}

pub fn mfcc_check(seed: u64) -> MfccReport {
    let mut r = rng(seed);
    let mut rep = MfccReport::default();

    for i in 0..=2000 {
        let f = i as f64 * 11.025;
        let back = mel_to_hz(hz_to_mel(f));
        rep.mel_round_trip = rep.mel_round_trip.max((back - f).abs() / f.max(1.0));
        rep.mel_vs_oracle = rep
            .mel_vs_oracle
            .max((hz_to_mel(f) - mel_oracle(f)).abs() / mel_oracle(f).max(1.0));
    }

    for m in [1usize, 2, 5, 13, 26, 40] {
        let x = uniform_vec(&mut r, m, -10.0, 10.0);
        let back = dct_iii_orthonormal(&dct_ii_orthonormal(&x));
        let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (a, b) in back.iter().zip(&x) {
            rep.dct_round_trip = rep.dct_round_trip.max((a - b).abs() / scale);
        }
    }

    for &(n_filters, frame_len, sr, fmin, fmax) in &[
        (26usize, 2048usize, 22050u32, 0.0, 11025.0),
        (40, 2048, 22050, 0.0, 11025.0),
        (20, 1024, 16000, 100.0, 7000.0),
        (10, 512, 8000, 0.0, 4000.0),
    ] {
        let bank = mel_filterbank(n_filters, frame_len, sr, fmin, fmax).unwrap();
        let oracle = filterbank_oracle(n_filters, frame_len, sr, fmin, fmax);
        for (row, orow) in bank.weights.iter().zip(&oracle) {
            for (a, b) in row.iter().zip(orow) {
                rep.filterbank = rep.filterbank.max((a - b).abs());
            }
        }

        // Scaling the power spectrum by c² shifts every log energy by 2 ln c.
        let width = frame_len / 2 + 1;
        let power: Vec<Vec<f64>> = (0..4).map(|_| uniform_vec(&mut r, width, 0.1, 10.0)).collect();
        for c in [0.5, 2.0, 10.0] {
            let base = mfcc(
                &PowerSpectra {
                    power: power.clone(),
                    bin_hz: sr as f64 / frame_len as f64,
                },
                &bank,
                n_filters,
            )
            .unwrap();
            let scaled = mfcc(
                &PowerSpectra {
                    power: power.iter().map(|row| row.iter().map(|p| p * c * c).collect()).collect(),
                    bin_hz: sr as f64 / frame_len as f64,
                },
                &bank,
                n_filters,
            )
            .unwrap();
            let expected = 2.0 * f64::ln(c) * (n_filters as f64).sqrt();
            for (b, s) in base.iter().zip(&scaled) {
                rep.scale_shift_c0 = rep.scale_shift_c0.max((s[0] - b[0] - expected).abs());
                for k in 1..n_filters {
                    rep.scale_shift_rest = rep.scale_shift_rest.max((s[k] - b[k]).abs());
                }
            }
        }
    }
    rep
}

// ---------------------------------------------------------------- Statistics

/// Textbook formulas, each moment summed in its own loop.
pub fn stats_oracle(x: &[f64]) -> [f64; 7] {
    let n = x.len() as f64;
    let mut sum = 0.0;
    for v in x {
        sum += v;
    }
    let mean = sum / n;
    let mut energy = 0.0;
    for v in x {
        energy += v.powi(2);
    }
    let central = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    [
        energy / n,
        mean,
        m2.sqrt(),
        sorted[sorted.len() - 1],
        sorted[0],
        m3 / (m2 * m2.sqrt()),
        m4 / (m2 * m2) - 3.0,
    ]
}

/// Worst relative error of [`signal_stats`] against [`stats_oracle`] on seeded signals.
pub fn stats_check(n_signals: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..n_signals {
        let len = r.random_range(2..5000);
        let offset = r.random_range(-1.0..1.0);
        let x: Vec<f64> = (0..len)
            .map(|_| {
                let u: f64 = r.random_range(-1.0..1.0);
                // Mix in skew so the odd moments are not all near zero.
                offset + if i % 2 == 0 { u } else { u * u * u.signum() + 0.3 * u.abs() }
            })
            .collect();
        let got: SignalStats = signal_stats(&x).unwrap();
        for (a, b) in got.to_array().iter().zip(stats_oracle(&x)) {
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
        }
    }
    worst
}

// ---------------------------------------------------------------- Gradients

pub const FD_STEP: f64 = 1e-5;

/// `‖a − n‖₂ / (‖a‖₂ + ‖n‖₂)`, or 0 when both are exactly zero.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let denom = norm(analytic) + norm(numeric);
    if denom == 0.0 {
        0.0
    } else {
        diff / denom
    }
}

/// Central differences of `f` with respect to every entry of `x`.
pub fn numeric_grad(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + FD_STEP;
            let plus = f(&probe);
            probe[i] = orig - FD_STEP;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * FD_STEP)
        })
        .collect()
}

fn project(y: &[f64], r: &[f64]) -> f64 {
    y.iter().zip(r).map(|(a, b)| a * b).sum()
}

fn tensor(shape: &[usize], data: &[f64]) -> Tensor {
    Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
}

fn rand_tensor(r: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    tensor(shape, &uniform_vec(r, n, -1.0, 1.0))
}

/// Per-layer worst relative errors, each layer probed with `L = Σ y ⊙ R`.
#[derive(Debug, Clone, Default)]
pub struct GradReport {
    pub layers: Vec<(&'static str, f64)>,
}

impl GradReport {
    pub fn worst(&self) -> f64 {
        self.layers.iter().map(|(_, e)| *e).fold(0.0, f64::max)
    }
}

pub fn conv_grad_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (t, cin, cout, k) = (7, 3, 4, 5);
    let x = rand_tensor(&mut r, &[t, cin]);
    let kern = rand_tensor(&mut r, &[cout, k, cin]);
    let bias = rand_tensor(&mut r, &[cout]);
    let proj = uniform_vec(&mut r, t * cout, -1.0, 1.0);
    let (gx, gk, gb) = conv1d_backward(&tensor(&[t, cout], &proj), &x, &kern).unwrap();
    let f = |x: &Tensor, k: &Tensor, b: &Tensor| project(conv1d_forward(x, k, b).unwrap().data(), &proj);
    let nx = numeric_grad(x.data(), |d| f(&tensor(&[t, cin], d), &kern, &bias));
    let nk = numeric_grad(kern.data(), |d| f(&x, &tensor(&[cout, k, cin], d), &bias));
    let nb = numeric_grad(bias.data(), |d| f(&x, &kern, &tensor(&[cout], d)));
    rel_error(gx.data(), &nx)
        .max(rel_error(gk.data(), &nk))
        .max(rel_error(gb.data(), &nb))
}

pub fn maxpool_grad_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (t, c) = (9, 3);
    // Well-separated distinct values so a step of h never changes the winner.
    let mut vals: Vec<f64> = (0..t * c).map(|i| i as f64 * 0.1).collect();
    for i in (1..vals.len()).rev() {
        let j = r.random_range(0..=i);
        vals.swap(i, j);
    }
    let x = tensor(&[t, c], &vals);
    let (y, argmax) = maxpool_forward(&x).unwrap();
    let proj = uniform_vec(&mut r, y.len(), -1.0, 1.0);
    let gx = maxpool_backward(&tensor(y.shape(), &proj), &argmax, t).unwrap();
    let nx = numeric_grad(x.data(), |d| project(maxpool_forward(&tensor(&[t, c], d)).unwrap().0.data(), &proj));
    rel_error(gx.data(), &nx)
}

pub fn dense_grad_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (din, dout) = (6, 4);
    let x = uniform_vec(&mut r, din, -1.0, 1.0);
    let w = rand_tensor(&mut r, &[dout, din]);
    let b = rand_tensor(&mut r, &[dout]);
    let proj = uniform_vec(&mut r, dout, -1.0, 1.0);
    let (gx, gw, gb) = dense_backward(&proj, &x, &w).unwrap();
    let f = |x: &[f64], w: &Tensor, b: &Tensor| project(&dense_forward(x, w, b).unwrap(), &proj);
    let nx = numeric_grad(&x, |d| f(d, &w, &b));
    let nw = numeric_grad(w.data(), |d| f(&x, &tensor(&[dout, din], d), &b));
    let nb = numeric_grad(b.data(), |d| f(&x, &w, &tensor(&[dout], d)));
    rel_error(&gx, &nx).max(rel_error(gw.data(), &nw)).max(rel_error(gb.data(), &nb))
}

pub fn lstm_grad_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (t, c, h) = (3, 4, 3);
    let x = rand_tensor(&mut r, &[t, c]);
    let p = LstmParams {
        w: rand_tensor(&mut r, &[4 * h, c]),
        u: rand_tensor(&mut r, &[4 * h, h]),
        b: rand_tensor(&mut r, &[4 * h]),
    };
    let proj = uniform_vec(&mut r, t * h, -1.0, 1.0);
    let (_, cache) = lstm_forward(&x, &p).unwrap();
    let (gx, gp) = lstm_backward(&tensor(&[t, h], &proj), &cache, &p).unwrap();
    let f = |x: &Tensor, p: &LstmParams| project(lstm_forward(x, p).unwrap().0.data(), &proj);
    let nx = numeric_grad(x.data(), |d| f(&tensor(&[t, c], d), &p));
    let nw = numeric_grad(p.w.data(), |d| f(&x, &LstmParams { w: tensor(&[4 * h, c], d), ..p.clone() }));
    let nu = numeric_grad(p.u.data(), |d| f(&x, &LstmParams { u: tensor(&[4 * h, h], d), ..p.clone() }));
    let nb = numeric_grad(p.b.data(), |d| f(&x, &LstmParams { b: tensor(&[4 * h], d), ..p.clone() }));
    rel_error(gx.data(), &nx)
        .max(rel_error(gp.w.data(), &nw))
        .max(rel_error(gp.u.data(), &nu))
        .max(rel_error(gp.b.data(), &nb))
}

pub fn softmax_ce_grad_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let logits = uniform_vec(&mut r, 7, -3.0, 3.0);
    let target = r.random_range(0..7);
    let g = softmax_cross_entropy_backward(&softmax(&logits), target);
    let n = numeric_grad(&logits, |z| cross_entropy(&softmax(z), target));
    rel_error(&g, &n)
}

pub fn layer_gradients(seed: u64) -> GradReport {
    GradReport {
        layers: vec![
            ("conv1d", conv_grad_error(seed)),
            ("maxpool", maxpool_grad_error(seed + 1)),
            ("dense", dense_grad_error(seed + 2)),
            ("lstm(T=3)", lstm_grad_error(seed + 3)),
            ("softmax+ce", softmax_ce_grad_error(seed + 4)),
        ],
    }
}

pub fn random_input(cfg: &ModelConfig, r: &mut impl Rng) -> ModelInput {
    ModelInput {
        sequence: Tensor::from_fn(&[cfg.seq_len, cfg.input_channels], |_| r.random_range(-1.0..1.0)),
        globals: uniform_vec(r, cfg.n_globals, -1.0, 1.0),
    }
}

/// End-to-end check on a sampled `fraction` of all parameters (at least one
/// per tensor). Dropout runs in train mode with the same mask for every
/// evaluation. Returns (relative error, parameters probed).
pub fn model_grad_error(cfg: &ModelConfig, fraction: f64, seed: u64) -> (f64, usize) {
    let mut r = rng(seed);
    let model = Model::new(cfg.clone()).unwrap();
    let input = random_input(cfg, &mut r);
    let target = r.random_range(0..cfg.n_classes);
    let mask_seed = r.next_u64();
    let loss = |m: &Model| {
        let mut mr = rng(mask_seed);
        m.loss_and_grad(&input, target, Some(&mut mr)).unwrap()
    };
    let (_, grads) = loss(&model);
    let analytic_tensors = grads.tensors();

    let mut picks = Vec::new();
    for (ti, t) in model.params.tensors().iter().enumerate() {
        let n = ((t.len() as f64 * fraction).ceil() as usize).max(1);
        for _ in 0..n {
            picks.push((ti, r.random_range(0..t.len())));
        }
    }
    let probe = |ti: usize, j: usize, delta: f64| {
        let mut m = model.clone();
        m.params.tensors_mut()[ti].data_mut()[j] += delta;
        loss(&m).0
    };
    let numeric: Vec<f64> = ser_core::Execution::Parallel.map(&picks, |&(ti, j)| {
        (probe(ti, j, FD_STEP) - probe(ti, j, -FD_STEP)) / (2.0 * FD_STEP)
    });
    let analytic: Vec<f64> = picks.iter().map(|&(ti, j)| analytic_tensors[ti].data()[j]).collect();
    (rel_error(&analytic, &numeric), picks.len())
}

// ---------------------------------------------------------------- Audio fixtures

/// Minimal mono PCM16 RIFF/WAVE writer, independent of the crate's own.
pub fn wav_bytes(samples: &[f64], rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut b = Vec::with_capacity(44 + data_len as usize);
    b.extend_from_slice(b"RIFF");
    b.extend_from_slice(&(36 + data_len).to_le_bytes());
    b.extend_from_slice(b"WAVEfmt ");
    b.extend_from_slice(&16u32.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&1u16.to_le_bytes());
    b.extend_from_slice(&rate.to_le_bytes());
    b.extend_from_slice(&(rate * 2).to_le_bytes());
    b.extend_from_slice(&2u16.to_le_bytes());
    b.extend_from_slice(&16u16.to_le_bytes());
    b.extend_from_slice(b"data");
    b.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

pub fn write_wav(path: &Path, samples: &[f64], rate: u32) {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).unwrap();
    }
    std::fs::write(path, wav_bytes(samples, rate)).unwrap();
}

/// A sine at `freq` with seeded low-level noise and amplitude jitter.
pub fn tone(freq: f64, seconds: f64, rate: u32, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let amp = r.random_range(0.25..0.35);
    let phase = r.random_range(0.0..2.0 * PI);
    (0..(seconds * rate as f64) as usize)
        .map(|i| amp * (2.0 * PI * freq * i as f64 / rate as f64 + phase).sin() + r.random_range(-0.01..0.01))
        .collect()
}

/// Tone frequency used for class `code` in the synthetic corpora.
pub fn class_freq(code: usize) -> f64 {
    220.0 * 1.5f64.powi(code as i32)
}

/// RAVDESS emotion code for each class code (alphabetical class order).
pub const RAVDESS_CODE: [u32; 7] = [5, 7, 6, 3, 1, 4, 8];

/// Writes `per_class` RAVDESS-named tone clips per emotion for each actor.
pub fn write_ravdess_corpus(root: &Path, actors: &[u32], per_class: u32, seconds: f64) -> Vec<std::path::PathBuf> {
    let mut paths = Vec::new();
    for (code, &emo) in RAVDESS_CODE.iter().enumerate() {
        for &actor in actors {
            for rep in 1..=per_class {
                let p = root
                    .join(format!("Actor_{actor:02}"))
                    .join(format!("03-01-{emo:02}-01-01-{rep:02}-{actor:02}.wav"));
                let seed = (code as u64) << 32 | (actor as u64) << 16 | rep as u64;
                write_wav(&p, &tone(class_freq(code), seconds, 22050, seed), 22050);
                paths.push(p);
            }
        }
    }
    paths
}
