use super::{DspError, Result};

/// Whole-clip amplitude statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    pub avg_energy: f64,
    pub mean: f64,
    /// Population standard deviation (divisor N).
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

impl SignalStats {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.avg_energy,
            self.mean,
            self.std,
            self.max,
            self.min,
            self.skewness,
            self.kurtosis,
        ]
    }
}

/// Moments use divisor N; skewness is `m3 / m2^1.5` and kurtosis `m4 / m2² - 3`.
///
/// Fails with [`DspError::DegenerateSignal`] when fewer than two samples are
/// given or the variance is exactly zero.
pub fn signal_stats(samples: &[f64]) -> Result<SignalStats> {
    if samples.len() < 2 {
        return Err(DspError::DegenerateSignal);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let avg_energy = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        max = max.max(x);
        min = min.min(x);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(DspError::DegenerateSignal);
    }
    Ok(SignalStats {
        avg_energy,
        mean,
        std: m2.sqrt(),
        max,
        min,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_data() {
        let s = signal_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.skewness, 0.0);
        assert_eq!(s.max, 3.0);
        assert_eq!(s.min, 1.0);
        assert!((s.avg_energy - 14.0 / 3.0).abs() < 1e-15);
        assert!((s.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        // m4/m2² = (2/3)/(4/9) = 1.5
        assert!((s.kurtosis + 1.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate() {
        assert_eq!(signal_stats(&[2.0, 2.0, 2.0]), Err(DspError::DegenerateSignal));
        assert_eq!(signal_stats(&[1.0]), Err(DspError::DegenerateSignal));
    }
}
