use super::{mismatch, Result, Tensor};

/// `y = W x + b` with `W` of shape `[out × D]`.
pub fn dense_forward(x: &[f64], w: &Tensor, b: &Tensor) -> Result<Vec<f64>> {
    w.expect_rank(2, "dense weights")?;
    let (out, d) = (w.dim(0), w.dim(1));
    if x.len() != d || b.len() != out {
        return Err(mismatch(format!(
            "dense: W is [{out} x {d}], x has {}, b has {}",
            x.len(),
            b.len()
        )));
    }
    Ok((0..out)
        .map(|o| b.data()[o] + w.row(o).iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
        .collect())
}

/// Returns `(grad_x, grad_w, grad_b)`.
pub fn dense_backward(grad_y: &[f64], x: &[f64], w: &Tensor) -> Result<(Vec<f64>, Tensor, Tensor)> {
    w.expect_rank(2, "dense weights")?;
    let (out, d) = (w.dim(0), w.dim(1));
    if grad_y.len() != out || x.len() != d {
        return Err(mismatch("dense backward shapes"));
    }
    let mut gx = vec![0.0; d];
    let mut gw = Tensor::zeros(&[out, d]);
    for (o, &g) in grad_y.iter().enumerate() {
        for ((gwv, &xv), (gxv, &wv)) in gw.row_mut(o).iter_mut().zip(x).zip(gx.iter_mut().zip(w.row(o))) {
            *gwv = g * xv;
            *gxv += g * wv;
        }
    }
    let gb = Tensor::new(vec![out], grad_y.to_vec())?;
    Ok((gx, gw, gb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bias_only_and_identity() {
        let b = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        assert_eq!(dense_forward(&[5.0, -1.0, 3.0], &Tensor::zeros(&[2, 3]), &b).unwrap(), vec![1.0, 2.0]);
        let eye = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(dense_forward(&[4.0, -7.0], &eye, &Tensor::zeros(&[2])).unwrap(), vec![4.0, -7.0]);
    }

    #[test]
    fn shape_mismatch() {
        assert!(dense_forward(&[1.0], &Tensor::zeros(&[2, 3]), &Tensor::zeros(&[2])).is_err());
        assert!(dense_backward(&[1.0], &[1.0, 2.0, 3.0], &Tensor::zeros(&[2, 3])).is_err());
    }
}
