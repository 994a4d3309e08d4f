use super::{mismatch, Result, Tensor};

fn check(x: &Tensor, kernels: &Tensor) -> Result<(usize, usize, usize, usize)> {
    x.expect_rank(2, "conv1d input")?;
    kernels.expect_rank(3, "conv1d kernels")?;
    let (t_len, c_in) = (x.dim(0), x.dim(1));
    let (c_out, k, kc) = (kernels.dim(0), kernels.dim(1), kernels.dim(2));
    if kc != c_in {
        return Err(mismatch(format!("kernels expect {kc} input channels, input has {c_in}")));
    }
    if k % 2 == 0 {
        return Err(mismatch(format!("kernel width {k} must be odd for same padding")));
    }
    Ok((t_len, c_in, c_out, k))
}

/// Same-padded stride-1 1-D convolution (cross-correlation).
///
/// `x` is `[T × C_in]`, `kernels` is `[C_out × K × C_in]`, `bias` is `[C_out]`;
/// the output is `[T × C_out]` with `(K − 1) / 2` implicit zero rows on each side.
pub fn conv1d_forward(x: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (t_len, c_in, c_out, k) = check(x, kernels)?;
    if bias.len() != c_out {
        return Err(mismatch(format!("bias has {} entries for {c_out} filters", bias.len())));
    }
    let pad = (k - 1) / 2;
    let kd = kernels.data();
    let mut y = Tensor::zeros(&[t_len, c_out]);
    for t in 0..t_len {
        let out = y.row_mut(t);
        out.copy_from_slice(bias.data());
        for j in 0..k {
            let src = t + j;
            if src < pad || src - pad >= t_len {
                continue;
            }
            let xr = x.row(src - pad);
            for (o, acc) in out.iter_mut().enumerate() {
                let w = &kd[(o * k + j) * c_in..(o * k + j + 1) * c_in];
                *acc += w.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    Ok(y)
}

/// Gradients of [`conv1d_forward`]: `(grad_x, grad_kernels, grad_bias)`.
pub fn conv1d_backward(grad_y: &Tensor, x: &Tensor, kernels: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let (t_len, c_in, c_out, k) = check(x, kernels)?;
    if grad_y.shape() != [t_len, c_out] {
        return Err(mismatch(format!(
            "grad_y shape {:?}, expected [{t_len}, {c_out}]",
            grad_y.shape()
        )));
    }
    let pad = (k - 1) / 2;
    let kd = kernels.data();
    let mut gx = Tensor::zeros(&[t_len, c_in]);
    let mut gk = Tensor::zeros(kernels.shape());
    let mut gb = Tensor::zeros(&[c_out]);
    for t in 0..t_len {
        let gy = grad_y.row(t);
        for (b, g) in gb.data_mut().iter_mut().zip(gy) {
            *b += g;
        }
        for j in 0..k {
            let src = t + j;
            if src < pad || src - pad >= t_len {
                continue;
            }
            let s = src - pad;
            for (o, &g) in gy.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                let off = (o * k + j) * c_in;
                let xr = x.row(s);
                for (w, xv) in gk.data_mut()[off..off + c_in].iter_mut().zip(xr) {
                    *w += g * xv;
                }
                let gxr = gx.row_mut(s);
                for (d, w) in gxr.iter_mut().zip(&kd[off..off + c_in]) {
                    *d += g * w;
                }
            }
        }
    }
    Ok((gx, gk, gb))
}
