use serde::{Deserialize, Serialize};

use super::{mismatch, Result, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmsPropConfig {
    /// Initial learning rate.
    pub lr: f64,
    /// Per-update learning-rate decay: `lr_t = lr / (1 + decay * t)`.
    pub decay: f64,
    /// Smoothing constant of the squared-gradient average.
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            lr: 1e-5,
            decay: 1e-6,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

/// RMSprop with time-based learning-rate decay.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    /// Number of updates applied so far.
    pub t: u64,
    pub cache: Vec<Tensor>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig) -> Self {
        Self {
            config,
            t: 0,
            cache: Vec::new(),
        }
    }

    pub fn current_lr(&self) -> f64 {
        self.config.lr / (1.0 + self.config.decay * self.t as f64)
    }

    /// One update: `cache ← ρ·cache + (1−ρ)·g²`, `p ← p − lr_t·g / (√cache + ε)`.
    pub fn step(&mut self, params: Vec<&mut Tensor>, grads: Vec<&Tensor>) -> Result<()> {
        if params.len() != grads.len() {
            return Err(mismatch(format!("{} parameters but {} gradients", params.len(), grads.len())));
        }
        if self.cache.is_empty() {
            self.cache = params.iter().map(|p| Tensor::zeros_like(p)).collect();
        }
        if self.cache.len() != params.len() {
            return Err(mismatch("optimizer state was built for a different parameter set"));
        }
        for ((p, g), c) in params.iter().zip(&grads).zip(&self.cache) {
            if p.shape() != g.shape() || p.shape() != c.shape() {
                return Err(mismatch(format!(
                    "parameter {:?}, gradient {:?}, cache {:?}",
                    p.shape(),
                    g.shape(),
                    c.shape()
                )));
            }
        }
        let lr = self.current_lr();
        let RmsPropConfig { rho, epsilon, .. } = self.config;
        for ((p, g), c) in params.into_iter().zip(grads).zip(&mut self.cache) {
            for ((pv, &gv), cv) in p.data_mut().iter_mut().zip(g.data()).zip(c.data_mut()) {
                *cv = rho * *cv + (1.0 - rho) * gv * gv;
                *pv -= lr * gv / (cv.sqrt() + epsilon);
            }
        }
        self.t += 1;
        Ok(())
    }
}
