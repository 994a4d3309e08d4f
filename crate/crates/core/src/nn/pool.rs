use super::{mismatch, Result, Tensor};

/// Width-2 stride-2 max pooling along time. An odd final step forms its own window.
///
/// Returns the pooled `[ceil(T/2) × C]` tensor and, per output cell, the input
/// time index that won (first on ties).
pub fn maxpool_forward(x: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    x.expect_rank(2, "maxpool input")?;
    let (t_len, c) = (x.dim(0), x.dim(1));
    if t_len == 0 {
        return Err(mismatch("maxpool needs at least one time step"));
    }
    let out_len = t_len.div_ceil(2);
    let mut y = Tensor::zeros(&[out_len, c]);
    let mut argmax = vec![0; out_len * c];
    for t in 0..out_len {
        let a = 2 * t;
        let b = (a + 1).min(t_len - 1);
        let (ra, rb) = (x.row(a), x.row(b));
        let out = y.row_mut(t);
        for ch in 0..c {
            let (idx, v) = if rb[ch] > ra[ch] { (b, rb[ch]) } else { (a, ra[ch]) };
            out[ch] = v;
            argmax[t * c + ch] = idx;
        }
    }
    Ok((y, argmax))
}

/// Routes each output gradient to the input position that produced the maximum.
pub fn maxpool_backward(grad_y: &Tensor, argmax: &[usize], input_len: usize) -> Result<Tensor> {
    grad_y.expect_rank(2, "maxpool grad")?;
    if grad_y.len() != argmax.len() {
        return Err(mismatch("argmax cache does not match gradient"));
    }
    let c = grad_y.dim(1);
    let mut gx = Tensor::zeros(&[input_len, c]);
    let gd = gx.data_mut();
    for (i, (&g, &src)) in grad_y.data().iter().zip(argmax).enumerate() {
        gd[src * c + i % c] += g;
    }
    Ok(gx)
}
