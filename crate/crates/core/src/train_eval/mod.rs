//! Dataset splitting, the training loop, evaluation and report files.

mod metrics;
mod report;
mod split;
mod train;

use thiserror::Error;

pub use metrics::{argmax, ConfusionMatrix};
pub use report::{write_accuracy_csv, write_accuracy_table, write_confusion_csv, write_loss_csv};
pub use split::{split, SplitPlan};
pub use train::{evaluate, mean_loss, train, EpochLoss, Evaluation, Sample, TrainConfig, TrainOutcome, TrainRun, Trainer};

use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("insufficient class samples: {0}")]
    InsufficientClassSamples(String),
    #[error("non-finite loss in epoch {epoch}, batch {batch} (samples {samples:?})")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        samples: Vec<usize>,
    },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

pub type Result<T> = std::result::Result<T, TrainError>;
