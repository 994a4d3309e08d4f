use rand::Rng;

use super::{NnError, Result, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else `1 / (1 − rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::BadRate(rate));
    }
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    Ok((0..len)
        .map(|_| if rng.random::<f64>() < keep { scale } else { 0.0 })
        .collect())
}

/// Applies inverted dropout in train mode; identity in eval mode.
pub fn dropout<R: Rng + ?Sized>(x: &Tensor, rate: f64, mode: DropoutMode, rng: &mut R) -> Result<Tensor> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::BadRate(rate));
    }
    if mode == DropoutMode::Eval || rate == 0.0 {
        return Ok(x.clone());
    }
    let mask = dropout_mask(x.len(), rate, rng)?;
    Tensor::new(
        x.shape().to_vec(),
        x.data().iter().zip(&mask).map(|(a, m)| a * m).collect(),
    )
}
