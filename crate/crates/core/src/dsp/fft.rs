use std::f64::consts::PI;

use num_complex::Complex64;

use super::{DspError, Result};

/// In-place iterative radix-2 decimation-in-time FFT (unnormalized, forward sign).
pub fn fft_in_place(buf: &mut [Complex64]) -> Result<()> {
    let n = buf.len();
    if !n.is_power_of_two() {
        return Err(DspError::BadFrameParams(format!("FFT length {n} is not a power of two")));
    }
    if n == 1 {
        return Ok(());
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    // Twiddles are evaluated directly rather than by recurrence to keep
    // rounding error flat across large transforms.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let t = twiddles[k * stride] * buf[start + k + half];
                let u = buf[start + k];
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        len *= 2;
    }
    Ok(())
}

/// Forward FFT of a real frame zero-padded to `n` points.
pub fn fft(frame: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if !n.is_power_of_two() {
        return Err(DspError::BadFrameParams(format!("FFT length {n} is not a power of two")));
    }
    if frame.len() > n {
        return Err(DspError::BadFrameParams(format!(
            "frame of {} samples does not fit in {n}-point FFT",
            frame.len()
        )));
    }
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft_in_place(&mut buf)?;
    Ok(buf)
}
