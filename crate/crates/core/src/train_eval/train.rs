use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, ConfusionMatrix, Result, TrainError};
use crate::exec::Execution;
use crate::nn::{cross_entropy, softmax, Model, ModelInput, Params, RmsProp, RmsPropConfig};

/// Optimizer and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub decay: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub split_ratio: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let opt = RmsPropConfig::default();
        Self {
            lr: opt.lr,
            decay: opt.decay,
            rho: opt.rho,
            epsilon: opt.epsilon,
            epochs: 370,
            batch: 16,
            seed: 0,
            split_ratio: 0.8,
        }
    }
}

impl TrainConfig {
    pub fn rmsprop(&self) -> RmsPropConfig {
        RmsPropConfig {
            lr: self.lr,
            decay: self.decay,
            rho: self.rho,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(TrainError::Config("batch must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config(format!("lr = {} must be positive", self.lr)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(TrainError::Config(format!("rho = {} outside [0, 1)", self.rho)));
        }
        if self.decay < 0.0 || self.epsilon < 0.0 {
            return Err(TrainError::Config("decay and epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// A normalized network input with its class code.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: ModelInput,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    /// Sample-weighted mean of the training batches' loss (dropout active).
    pub train_loss: f64,
    /// Mean loss over the held-out set in eval mode; `None` without a test set.
    pub test_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub loss_history: Vec<EpochLoss>,
    pub config: TrainConfig,
    pub seed: u64,
    pub wall_time_s: f64,
    /// 1-based epoch of the lowest test loss.
    pub best_epoch: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub run: TrainRun,
    pub final_model: Model,
    /// Lowest-test-loss model, or the final one when there was no test set.
    pub best_model: Model,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample dropout stream, independent of which thread runs the sample.
fn sample_seed(seed: u64, epoch: usize, batch: usize, pos: usize) -> u64 {
    mix(mix(mix(seed ^ 0xD1B5_4A32_D192_ED03).wrapping_add(epoch as u64)).wrapping_add(batch as u64))
        .wrapping_add(pos as u64)
}

/// Mean eval-mode cross-entropy over `samples`.
pub fn mean_loss(model: &Model, samples: &[Sample], exec: Execution) -> Result<f64> {
    let losses = exec.map(samples, |s| {
        model
            .logits(&s.input)
            .map(|z| cross_entropy(&softmax(&z), s.target))
    });
    let mut sum = 0.0;
    for l in losses {
        sum += l?;
    }
    Ok(sum / samples.len().max(1) as f64)
}

/// Epoch-at-a-time training driver.
pub struct Trainer<'a> {
    pub model: Model,
    optimizer: RmsProp,
    config: TrainConfig,
    train: &'a [Sample],
    test: &'a [Sample],
    exec: Execution,
    order_rng: ChaCha8Rng,
    history: Vec<EpochLoss>,
    best: Option<(f64, usize, Model)>,
    started: Instant,
}

impl<'a> Trainer<'a> {
    pub fn new(model: Model, config: TrainConfig, train: &'a [Sample], test: &'a [Sample], exec: Execution) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(TrainError::InsufficientClassSamples("training set is empty".into()));
        }
        Ok(Self {
            model,
            optimizer: RmsProp::new(config.rmsprop()),
            order_rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            train,
            test,
            exec,
            history: Vec::new(),
            best: None,
            started: Instant::now(),
        })
    }

    pub fn epochs_done(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[EpochLoss] {
        &self.history
    }

    /// Shuffles, runs every batch (the last one may be partial) and records losses.
    pub fn step_epoch(&mut self) -> Result<EpochLoss> {
        let epoch = self.history.len();
        let mut order: Vec<usize> = (0..self.train.len()).collect();
        order.shuffle(&mut self.order_rng);

        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(self.config.batch).enumerate() {
            let seed = self.config.seed;
            let model = &self.model;
            let train = self.train;
            let results = self.exec.map_indexed(batch, |pos, &i| {
                let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, epoch, b, pos));
                model.loss_and_grad(&train[i].input, train[i].target, Some(&mut rng))
            });

            // Reduce in batch order so the sum does not depend on scheduling.
            let mut total: Option<Params> = None;
            let mut batch_loss = 0.0;
            for r in results {
                let (loss, grads) = r?;
                batch_loss += loss;
                match total.as_mut() {
                    Some(t) => t.add_assign(&grads),
                    None => total = Some(grads),
                }
            }
            let mut grads = total.expect("non-empty batch");
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: b,
                    samples: batch.to_vec(),
                });
            }
            grads.scale(1.0 / batch.len() as f64);
            self.optimizer
                .step(self.model.params.tensors_mut(), grads.tensors())?;
            loss_sum += batch_loss;
        }

        let train_loss = loss_sum / self.train.len() as f64;
        let test_loss = if self.test.is_empty() {
            None
        } else {
            let l = mean_loss(&self.model, self.test, self.exec)?;
            if !l.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: usize::MAX,
                    samples: Vec::new(),
                });
            }
            Some(l)
        };
        if let Some(l) = test_loss {
            if self.best.as_ref().is_none_or(|(best, _, _)| l < *best) {
                self.best = Some((l, epoch + 1, self.model.clone()));
            }
        }
        let entry = EpochLoss { train_loss, test_loss };
        self.history.push(entry);
        Ok(entry)
    }

    pub fn finish(self) -> TrainOutcome {
        let (best_epoch, best_model) = match self.best {
            Some((_, e, m)) => (Some(e), m),
            None => (None, self.model.clone()),
        };
        TrainOutcome {
            run: TrainRun {
                loss_history: self.history,
                seed: self.config.seed,
                config: self.config,
                wall_time_s: self.started.elapsed().as_secs_f64(),
                best_epoch,
            },
            final_model: self.model,
            best_model,
        }
    }
}

/// Runs `config.epochs` epochs.
pub fn train(model: Model, train: &[Sample], test: &[Sample], config: &TrainConfig, exec: Execution) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(model, config.clone(), train, test, exec)?;
    for _ in 0..config.epochs {
        trainer.step_epoch()?;
    }
    Ok(trainer.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub matrix: ConfusionMatrix,
    pub predictions: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Eval-mode predictions (argmax, lowest class on ties) and their confusion matrix.
pub fn evaluate(model: &Model, samples: &[Sample], exec: Execution) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(TrainError::EmptyTestSet);
    }
    let probs = exec
        .map(samples, |s| model.predict_proba(&s.input))
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let predictions: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
    let truth: Vec<usize> = samples.iter().map(|s| s.target).collect();
    Ok(Evaluation {
        matrix: ConfusionMatrix::from_pairs(model.config.n_classes, &truth, &predictions),
        predictions,
        probabilities: probs,
    })
}
