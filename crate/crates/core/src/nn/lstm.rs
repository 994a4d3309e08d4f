use super::{mismatch, Result, Tensor};

/// Stacked gate parameters in the order input, forget, output, candidate.
///
/// `w` is `[4H × C]`, `u` is `[4H × H]`, `b` is `[4H]`; rows `0..H` belong to
/// the input gate, `H..2H` to the forget gate, `2H..3H` to the output gate and
/// `3H..4H` to the candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Tensor::zeros(&[4 * hidden, input]),
            u: Tensor::zeros(&[4 * hidden, hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.dim(1)
    }

    pub fn input(&self) -> usize {
        self.w.dim(1)
    }

    fn check(&self) -> Result<()> {
        self.w.expect_rank(2, "lstm w")?;
        self.u.expect_rank(2, "lstm u")?;
        let h = self.u.dim(1);
        if self.u.dim(0) != 4 * h || self.w.dim(0) != 4 * h || self.b.len() != 4 * h {
            return Err(mismatch(format!(
                "lstm parameter shapes w {:?}, u {:?}, b {:?}",
                self.w.shape(),
                self.u.shape(),
                self.b.shape()
            )));
        }
        Ok(())
    }
}

/// Per-step activations kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache {
    x: Tensor,
    /// `[T × 4H]` post-activation gates (i, f, o, g).
    gates: Vec<f64>,
    /// `[T × H]` cell states.
    cells: Vec<f64>,
    /// `[T × H]` hidden states.
    hidden: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn matvec_acc(m: &Tensor, v: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o += m.row(r).iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Runs the cell over `x` (`[T × C]`) from zero state and returns every hidden
/// state as `[T × H]`.
pub fn lstm_forward(x: &Tensor, p: &LstmParams) -> Result<(Tensor, LstmCache)> {
    p.check()?;
    x.expect_rank(2, "lstm input")?;
    if x.dim(1) != p.input() {
        return Err(mismatch(format!(
            "lstm expects {} input channels, got {}",
            p.input(),
            x.dim(1)
        )));
    }
    let (t_len, h) = (x.dim(0), p.hidden());
    let mut gates = vec![0.0; t_len * 4 * h];
    let mut cells = vec![0.0; t_len * h];
    let mut hidden = vec![0.0; t_len * h];
    let zero = vec![0.0; h];
    for t in 0..t_len {
        let z = &mut gates[t * 4 * h..(t + 1) * 4 * h];
        z.copy_from_slice(p.b.data());
        matvec_acc(&p.w, x.row(t), z);
        let h_prev = if t == 0 { &zero[..] } else { &hidden[(t - 1) * h..t * h] };
        matvec_acc(&p.u, h_prev, z);
        for v in &mut z[..3 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut z[3 * h..] {
            *v = v.tanh();
        }
        for j in 0..h {
            let c_prev = if t == 0 { 0.0 } else { cells[(t - 1) * h + j] };
            let (i, f, o, g) = (z[j], z[h + j], z[2 * h + j], z[3 * h + j]);
            let c = f * c_prev + i * g;
            cells[t * h + j] = c;
            hidden[t * h + j] = o * c.tanh();
        }
    }
    let out = Tensor::new(vec![t_len, h], hidden.clone())?;
    Ok((
        out,
        LstmCache {
            x: x.clone(),
            gates,
            cells,
            hidden,
        },
    ))
}

/// Backpropagation through time.
///
/// `grad_h` is the loss gradient for every hidden state (`[T × H]`). Returns the
/// input gradient and parameter gradients.
pub fn lstm_backward(grad_h: &Tensor, cache: &LstmCache, p: &LstmParams) -> Result<(Tensor, LstmParams)> {
    let (t_len, c_in, h) = (cache.x.dim(0), p.input(), p.hidden());
    if grad_h.shape() != [t_len, h] {
        return Err(mismatch(format!(
            "lstm grad shape {:?}, expected [{t_len}, {h}]",
            grad_h.shape()
        )));
    }
    let mut gx = Tensor::zeros(&[t_len, c_in]);
    let mut grads = LstmParams::zeros(c_in, h);
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for t in (0..t_len).rev() {
        let z = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        let gh = grad_h.row(t);
        for j in 0..h {
            let (i, f, o, g) = (z[j], z[h + j], z[2 * h + j], z[3 * h + j]);
            let c = cache.cells[t * h + j];
            let c_prev = if t == 0 { 0.0 } else { cache.cells[(t - 1) * h + j] };
            let tc = c.tanh();
            let dh = gh[j] + dh_next[j];
            let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
            dz[j] = dc * g * i * (1.0 - i);
            dz[h + j] = dc * c_prev * f * (1.0 - f);
            dz[2 * h + j] = dh * tc * o * (1.0 - o);
            dz[3 * h + j] = dc * i * (1.0 - g * g);
            dc_next[j] = dc * f;
        }
        let x_t = cache.x.row(t);
        let gxr = gx.row_mut(t);
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grads.b.data_mut()[r] += d;
            for (gw, (&xv, (gxv, &wv))) in grads
                .w
                .row_mut(r)
                .iter_mut()
                .zip(x_t.iter().zip(gxr.iter_mut().zip(p.w.row(r))))
            {
                *gw += d * xv;
                *gxv += d * wv;
            }
            for (k, &uv) in p.u.row(r).iter().enumerate() {
                dh_next[k] += d * uv;
            }
            if t > 0 {
                let h_prev = &cache.hidden[(t - 1) * h..t * h];
                for (gu, &hv) in grads.u.row_mut(r).iter_mut().zip(h_prev) {
                    *gu += d * hv;
                }
            }
        }
    }
    Ok((gx, grads))
}
