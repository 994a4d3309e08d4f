use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    conv1d_backward, conv1d_forward, cross_entropy, dense_backward, dense_forward, dropout_mask, lstm_backward,
    lstm_forward, maxpool_backward, maxpool_forward, mismatch, relu_backward, softmax, softmax_cross_entropy_backward,
    Checkpoint, LstmCache, LstmParams, NnError, Result, Tensor,
};

/// Layer sizes and regularization of the CNN-LSTM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub input_channels: usize,
    pub seq_len: usize,
    pub n_globals: usize,
    pub n_classes: usize,
    /// Output channels of each convolution, in order.
    pub conv_filters: Vec<usize>,
    /// Odd kernel width shared by every convolution.
    pub kernel: usize,
    /// A max pool follows every `pool_every` convolutions.
    pub pool_every: usize,
    /// Hidden width of each stacked LSTM.
    pub lstm_units: Vec<usize>,
    pub dropout_cnn: f64,
    pub dropout_lstm: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_channels: 21,
            seq_len: 70,
            n_globals: 10,
            n_classes: 7,
            conv_filters: vec![64, 64, 128, 128],
            kernel: 5,
            pool_every: 2,
            lstm_units: vec![128, 64, 32],
            dropout_cnn: 0.1,
            dropout_lstm: 0.2,
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Same topology with every conv and LSTM width divided by `divisor` (minimum 1).
    pub fn with_widths_divided(&self, divisor: usize) -> Self {
        let shrink = |v: &Vec<usize>| v.iter().map(|w| (w / divisor).max(1)).collect();
        Self {
            conv_filters: shrink(&self.conv_filters),
            lstm_units: shrink(&self.lstm_units),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NnError::Config(m));
        if self.input_channels == 0 || self.seq_len == 0 {
            return bad("input_channels and seq_len must be positive".into());
        }
        if self.n_classes < 2 {
            return bad(format!("n_classes = {} (need at least 2)", self.n_classes));
        }
        if self.kernel.is_multiple_of(2) {
            return bad(format!("kernel = {} must be odd", self.kernel));
        }
        if self.pool_every == 0 {
            return bad("pool_every must be at least 1".into());
        }
        if self.lstm_units.is_empty() {
            return bad("at least one LSTM layer is required".into());
        }
        if self.conv_filters.contains(&0) || self.lstm_units.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        for (name, r) in [("dropout_cnn", self.dropout_cnn), ("dropout_lstm", self.dropout_lstm)] {
            if !(0.0..1.0).contains(&r) {
                return bad(format!("{name} = {r} outside [0, 1)"));
            }
        }
        Ok(())
    }

    fn pools_after(&self, conv_index: usize) -> bool {
        (conv_index + 1).is_multiple_of(self.pool_every)
    }

    /// Sequence length reaching the LSTM stack.
    pub fn lstm_steps(&self) -> usize {
        (0..self.conv_filters.len())
            .filter(|&i| self.pools_after(i))
            .fold(self.seq_len, |t, _| t.div_ceil(2))
    }

    pub fn dense_inputs(&self) -> usize {
        self.lstm_units.last().copied().unwrap_or(0) + self.n_globals
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    /// `[C_out × K × C_in]`.
    pub kernels: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `[n_classes × dense_inputs]`.
    pub w: Tensor,
    pub b: Tensor,
}

/// All trainable tensors. Gradients use the same structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub convs: Vec<ConvParams>,
    pub lstms: Vec<LstmParams>,
    pub dense: DenseParams,
}

impl Params {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let mut c_in = cfg.input_channels;
        let convs = cfg
            .conv_filters
            .iter()
            .map(|&c_out| {
                let p = ConvParams {
                    kernels: Tensor::zeros(&[c_out, cfg.kernel, c_in]),
                    bias: Tensor::zeros(&[c_out]),
                };
                c_in = c_out;
                p
            })
            .collect();
        let lstms = cfg
            .lstm_units
            .iter()
            .map(|&h| {
                let p = LstmParams::zeros(c_in, h);
                c_in = h;
                p
            })
            .collect();
        let dense = DenseParams {
            w: Tensor::zeros(&[cfg.n_classes, cfg.dense_inputs()]),
            b: Tensor::zeros(&[cfg.n_classes]),
        };
        Self { convs, lstms, dense }
    }

    /// Tensors with stable names, in optimizer order.
    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, c) in self.convs.iter().enumerate() {
            out.push((format!("conv{i}.kernels"), &c.kernels));
            out.push((format!("conv{i}.bias"), &c.bias));
        }
        for (i, l) in self.lstms.iter().enumerate() {
            out.push((format!("lstm{i}.w"), &l.w));
            out.push((format!("lstm{i}.u"), &l.u));
            out.push((format!("lstm{i}.b"), &l.b));
        }
        out.push(("dense.w".into(), &self.dense.w));
        out.push(("dense.b".into(), &self.dense.b));
        out
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        self.named().into_iter().map(|(_, t)| t).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.kernels);
            out.push(&mut c.bias);
        }
        for l in &mut self.lstms {
            out.push(&mut l.w);
            out.push(&mut l.u);
            out.push(&mut l.b);
        }
        out.push(&mut self.dense.w);
        out.push(&mut self.dense.b);
        out
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn add_assign(&mut self, other: &Params) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            t.scale(s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }
}

/// One network input: a `[seq_len × input_channels]` sequence plus globals.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInput {
    pub sequence: Tensor,
    pub globals: Vec<f64>,
}

impl ModelInput {
    /// Splits a flattened row (sequence then globals).
    pub fn from_flat(row: &[f64], cfg: &ModelConfig) -> Result<Self> {
        let seq = cfg.seq_len * cfg.input_channels;
        if row.len() != seq + cfg.n_globals {
            return Err(mismatch(format!(
                "row of {} values, model expects {seq} + {}",
                row.len(),
                cfg.n_globals
            )));
        }
        Ok(Self {
            sequence: Tensor::new(vec![cfg.seq_len, cfg.input_channels], row[..seq].to_vec())?,
            globals: row[seq..].to_vec(),
        })
    }
}

/// Activations retained by a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    conv_inputs: Vec<Tensor>,
    conv_pre: Vec<Tensor>,
    conv_masks: Vec<Option<Vec<f64>>>,
    pools: Vec<Option<(Vec<usize>, usize)>>,
    lstm_caches: Vec<LstmCache>,
    lstm_masks: Vec<Option<Vec<f64>>>,
    lstm_steps: usize,
    dense_input: Vec<f64>,
    pub logits: Vec<f64>,
}

fn apply_mask(t: &mut Tensor, mask: &Option<Vec<f64>>) {
    if let Some(m) = mask {
        for (v, k) in t.data_mut().iter_mut().zip(m) {
            *v *= k;
        }
    }
}

fn glorot<R: Rng>(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Tensor::from_fn(shape, |_| rng.random_range(-limit..limit))
}

/// CNN-LSTM classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Params,
}

impl Model {
    /// All weights and biases zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let params = Params::zeros(&config);
        Ok(Self { config, params })
    }

    /// Glorot-uniform weights from `config.seed`, zero biases except forget-gate biases of 1.
    pub fn new(config: ModelConfig) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
        let k = model.config.kernel;
        for c in &mut model.params.convs {
            let (c_out, c_in) = (c.kernels.dim(0), c.kernels.dim(2));
            c.kernels = glorot(c.kernels.shape(), k * c_in, k * c_out, &mut rng);
        }
        for l in &mut model.params.lstms {
            let (h, c_in) = (l.hidden(), l.input());
            l.w = glorot(l.w.shape(), c_in, 4 * h, &mut rng);
            l.u = glorot(l.u.shape(), h, 4 * h, &mut rng);
            l.b.data_mut()[h..2 * h].iter_mut().for_each(|v| *v = 1.0);
        }
        let (out, d) = (model.params.dense.w.dim(0), model.params.dense.w.dim(1));
        model.params.dense.w = glorot(&[out, d], d, out, &mut rng);
        Ok(model)
    }

    /// Forward pass. With `rng` present dropout is active (train mode);
    /// without it every dropout layer is the identity.
    pub fn forward(&self, input: &ModelInput, mut rng: Option<&mut dyn RngCore>) -> Result<ForwardCache> {
        let cfg = &self.config;
        if input.sequence.shape() != [cfg.seq_len, cfg.input_channels] || input.globals.len() != cfg.n_globals {
            return Err(mismatch(format!(
                "input sequence {:?} with {} globals, model expects [{}, {}] with {}",
                input.sequence.shape(),
                input.globals.len(),
                cfg.seq_len,
                cfg.input_channels,
                cfg.n_globals
            )));
        }
        let n_conv = self.params.convs.len();
        let mut cache = ForwardCache {
            conv_inputs: Vec::with_capacity(n_conv),
            conv_pre: Vec::with_capacity(n_conv),
            conv_masks: Vec::with_capacity(n_conv),
            pools: Vec::with_capacity(n_conv),
            lstm_caches: Vec::new(),
            lstm_masks: Vec::new(),
            lstm_steps: 0,
            dense_input: Vec::new(),
            logits: Vec::new(),
        };

        let mut h = input.sequence.clone();
        for (i, conv) in self.params.convs.iter().enumerate() {
            let pre = conv1d_forward(&h, &conv.kernels, &conv.bias)?;
            let mut act = super::relu(&pre);
            let mask = match rng.as_deref_mut() {
                Some(r) if cfg.dropout_cnn > 0.0 => Some(dropout_mask(act.len(), cfg.dropout_cnn, r)?),
                _ => None,
            };
            apply_mask(&mut act, &mask);
            cache.conv_inputs.push(std::mem::replace(&mut h, act));
            cache.conv_pre.push(pre);
            cache.conv_masks.push(mask);
            if cfg.pools_after(i) {
                let (pooled, argmax) = maxpool_forward(&h)?;
                cache.pools.push(Some((argmax, h.dim(0))));
                h = pooled;
            } else {
                cache.pools.push(None);
            }
        }

        for lstm in &self.params.lstms {
            let (mut out, lc) = lstm_forward(&h, lstm)?;
            let mask = match rng.as_deref_mut() {
                Some(r) if cfg.dropout_lstm > 0.0 => Some(dropout_mask(out.len(), cfg.dropout_lstm, r)?),
                _ => None,
            };
            apply_mask(&mut out, &mask);
            cache.lstm_caches.push(lc);
            cache.lstm_masks.push(mask);
            h = out;
        }

        cache.lstm_steps = h.dim(0);
        let mut dense_input = h.row(h.dim(0) - 1).to_vec();
        dense_input.extend_from_slice(&input.globals);
        cache.logits = dense_forward(&dense_input, &self.params.dense.w, &self.params.dense.b)?;
        cache.dense_input = dense_input;
        Ok(cache)
    }

    /// Parameter gradients given the loss gradient with respect to the logits.
    pub fn backward(&self, cache: &ForwardCache, grad_logits: &[f64]) -> Result<Params> {
        let mut grads = Params::zeros(&self.config);
        let (gx, gw, gb) = dense_backward(grad_logits, &cache.dense_input, &self.params.dense.w)?;
        grads.dense = DenseParams { w: gw, b: gb };

        let last_h = self.params.lstms.last().map_or(0, LstmParams::hidden);
        let mut gh = Tensor::zeros(&[cache.lstm_steps, last_h]);
        gh.row_mut(cache.lstm_steps - 1).copy_from_slice(&gx[..last_h]);
        for j in (0..self.params.lstms.len()).rev() {
            apply_mask(&mut gh, &cache.lstm_masks[j]);
            let (g_in, g) = lstm_backward(&gh, &cache.lstm_caches[j], &self.params.lstms[j])?;
            grads.lstms[j] = g;
            gh = g_in;
        }

        for i in (0..self.params.convs.len()).rev() {
            if let Some((argmax, len)) = &cache.pools[i] {
                gh = maxpool_backward(&gh, argmax, *len)?;
            }
            apply_mask(&mut gh, &cache.conv_masks[i]);
            let g_pre = relu_backward(&gh, &cache.conv_pre[i]);
            let (g_in, gk, gb) = conv1d_backward(&g_pre, &cache.conv_inputs[i], &self.params.convs[i].kernels)?;
            grads.convs[i] = ConvParams { kernels: gk, bias: gb };
            gh = g_in;
        }
        Ok(grads)
    }

    pub fn logits(&self, input: &ModelInput) -> Result<Vec<f64>> {
        Ok(self.forward(input, None)?.logits)
    }

    pub fn predict_proba(&self, input: &ModelInput) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(input)?))
    }

    /// Cross-entropy loss and its parameter gradients for one labelled input.
    pub fn loss_and_grad(&self, input: &ModelInput, target: usize, rng: Option<&mut dyn RngCore>) -> Result<(f64, Params)> {
        if target >= self.config.n_classes {
            return Err(mismatch(format!("target {target} for {} classes", self.config.n_classes)));
        }
        let cache = self.forward(input, rng)?;
        let probs = softmax(&cache.logits);
        let loss = cross_entropy(&probs, target);
        let grads = self.backward(&cache, &softmax_cross_entropy_backward(&probs, target))?;
        Ok((loss, grads))
    }

    pub fn to_checkpoint(&self, config_json: String, extra: Vec<(String, Tensor)>) -> Checkpoint {
        let mut tensors: Vec<(String, Tensor)> = self
            .params
            .named()
            .into_iter()
            .map(|(n, t)| (n, t.clone()))
            .collect();
        tensors.extend(extra);
        Checkpoint {
            config: config_json,
            tensors,
        }
    }

    /// Rebuilds a model from named tensors, checking every shape.
    pub fn from_checkpoint(config: ModelConfig, ckpt: &Checkpoint) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let names: Vec<String> = model.params.named().into_iter().map(|(n, _)| n).collect();
        for (name, slot) in names.iter().zip(model.params.tensors_mut()) {
            let t = ckpt
                .get(name)
                .ok_or_else(|| NnError::Checkpoint(format!("missing tensor {name}")))?;
            if t.shape() != slot.shape() {
                return Err(NnError::Checkpoint(format!(
                    "tensor {name} has shape {:?}, config implies {:?}",
                    t.shape(),
                    slot.shape()
                )));
            }
            *slot = t.clone();
        }
        Ok(model)
    }
}
