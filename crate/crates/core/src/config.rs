//! Run configuration: a JSON document with `data`, `dsp`, `model` and `train`
//! sections. Absent keys take their defaults; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::audio_io::{EmotionLabel, CANONICAL_RATE};
use crate::features::{FeatureExtractor, FeatureParams, N_GLOBALS};
use crate::nn::ModelConfig;
use crate::train_eval::TrainConfig;

#[derive(Debug, Error, PartialEq)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending key, or `<document>` for whole-file problems.
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub roots: Vec<PathBuf>,
    pub canonical_rate: u32,
    /// Train one model per gender instead of a pooled one.
    pub per_gender: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            roots: Vec::new(),
            canonical_rate: CANONICAL_RATE,
            per_gender: true,
        }
    }
}

/// The overridable subset of [`ModelConfig`]; input shape and class count
/// follow from the feature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub conv_filters: Vec<usize>,
    pub lstm_units: Vec<usize>,
    pub kernel: usize,
    pub pool_every: usize,
    pub dropout_cnn: f64,
    pub dropout_lstm: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        Self {
            conv_filters: m.conv_filters,
            lstm_units: m.lstm_units,
            kernel: m.kernel,
            pool_every: m.pool_every,
            dropout_cnn: m.dropout_cnn,
            dropout_lstm: m.dropout_lstm,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub dsp: FeatureParams,
    pub model: ModelSection,
    pub train: TrainConfig,
}

fn serde_key(err: &serde_json::Error) -> String {
    // serde reports unknown fields as "unknown field `x`, expected ..."
    let msg = err.to_string();
    msg.split('`').nth(1).map(str::to_owned).unwrap_or_else(|| "<document>".into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
        Self::from_value(value)
    }

    fn from_value(value: Value) -> Result<Self, ConfigError> {
        serde_json::from_value(value).map_err(|e| ConfigError::new(serde_key(&e), e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Applies `section.key=value` overrides. The value is parsed as JSON and
    /// falls back to a plain string; the key must already exist.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut doc = self.to_json();
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::new(item, "expected key=value"))?;
            let key = key.trim();
            let mut slot = &mut doc;
            for part in key.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|o| o.get_mut(part))
                    .ok_or_else(|| ConfigError::new(key, "unknown key"))?;
            }
            if slot.is_object() {
                return Err(ConfigError::new(key, "is a section, not a value"));
            }
            *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
            Self::from_value(doc.clone()).map_err(|e| ConfigError::new(key, e.message))?;
        }
        Self::from_value(doc)
    }

    /// Every leaf key with its default, one `key = value` per line.
    pub fn keys_with_defaults() -> Vec<String> {
        fn walk(prefix: &str, v: &Value, out: &mut Vec<String>) {
            match v {
                Value::Object(map) => {
                    for (k, child) in map {
                        let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                        walk(&p, child, out);
                    }
                }
                leaf => out.push(format!("{prefix} = {leaf}")),
            }
        }
        let mut out = Vec::new();
        walk("", &Self::default().to_json(), &mut out);
        out
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            input_channels: self.dsp.n_channels(),
            seq_len: self.dsp.max_frames,
            n_globals: N_GLOBALS,
            n_classes: EmotionLabel::COUNT,
            conv_filters: self.model.conv_filters.clone(),
            kernel: self.model.kernel,
            pool_every: self.model.pool_every,
            lstm_units: self.model.lstm_units.clone(),
            dropout_cnn: self.model.dropout_cnn,
            dropout_lstm: self.model.dropout_lstm,
            seed: self.train.seed,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.data.canonical_rate == 0 {
            return Err(ConfigError::new("data.canonical_rate", "must be positive"));
        }
        let d = &self.dsp;
        if d.frame_len < 2 || !d.frame_len.is_power_of_two() {
            return Err(ConfigError::new("dsp.frame_len", format!("{} is not a power of two", d.frame_len)));
        }
        if d.hop == 0 {
            return Err(ConfigError::new("dsp.hop", "must be at least 1"));
        }
        if d.n_mfcc == 0 || d.n_mfcc > d.n_filters {
            return Err(ConfigError::new("dsp.n_mfcc", format!("must be between 1 and n_filters = {}", d.n_filters)));
        }
        if !(d.fmin >= 0.0 && d.fmin < d.fmax) {
            return Err(ConfigError::new("dsp.fmin", "must satisfy 0 <= fmin < fmax"));
        }
        if d.fmax > self.data.canonical_rate as f64 / 2.0 {
            return Err(ConfigError::new("dsp.fmax", "exceeds the Nyquist frequency of data.canonical_rate"));
        }
        if d.max_frames == 0 {
            return Err(ConfigError::new("dsp.max_frames", "must be positive"));
        }
        FeatureExtractor::new(d.clone(), self.data.canonical_rate)
            .map_err(|e| ConfigError::new("dsp.n_filters", e.to_string()))?;
        let m = &self.model;
        if m.kernel.is_multiple_of(2) {
            return Err(ConfigError::new("model.kernel", format!("{} must be odd", m.kernel)));
        }
        if m.pool_every == 0 {
            return Err(ConfigError::new("model.pool_every", "must be at least 1"));
        }
        if m.conv_filters.contains(&0) {
            return Err(ConfigError::new("model.conv_filters", "widths must be positive"));
        }
        if m.lstm_units.is_empty() || m.lstm_units.contains(&0) {
            return Err(ConfigError::new("model.lstm_units", "needs at least one positive width"));
        }
        for (key, rate) in [("model.dropout_cnn", m.dropout_cnn), ("model.dropout_lstm", m.dropout_lstm)] {
            if !(0.0..1.0).contains(&rate) {
                return Err(ConfigError::new(key, format!("{rate} outside [0, 1)")));
            }
        }
        let t = &self.train;
        if !(t.lr > 0.0 && t.lr.is_finite()) {
            return Err(ConfigError::new("train.lr", format!("{} must be positive", t.lr)));
        }
        if t.decay.is_nan() || t.decay < 0.0 {
            return Err(ConfigError::new("train.decay", "must be non-negative"));
        }
        if !(0.0..1.0).contains(&t.rho) {
            return Err(ConfigError::new("train.rho", format!("{} outside [0, 1)", t.rho)));
        }
        if t.epsilon.is_nan() || t.epsilon < 0.0 {
            return Err(ConfigError::new("train.epsilon", "must be non-negative"));
        }
        if t.batch == 0 {
            return Err(ConfigError::new("train.batch", "must be at least 1"));
        }
        if !(t.split_ratio > 0.0 && t.split_ratio < 1.0) {
            return Err(ConfigError::new("train.split_ratio", format!("{} outside (0, 1)", t.split_ratio)));
        }
        self.model_config()
            .validate()
            .map_err(|e| ConfigError::new("model", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.train.epochs, 370);
        assert_eq!(cfg.train.batch, 16);
        assert_eq!(cfg.train.lr, 1e-5);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json(r#"{"train": {"learning_rate": 0.1}}"#).unwrap_err();
        assert_eq!(err.key, "learning_rate");
        let err = RunConfig::from_json(r#"{"extra": 1}"#).unwrap_err();
        assert_eq!(err.key, "extra");
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::default()
            .with_overrides(&["train.epochs=3", "model.conv_filters=[8,8]", "data.per_gender=false"])
            .unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.model.conv_filters, vec![8, 8]);
        assert!(!cfg.data.per_gender);

        assert_eq!(RunConfig::default().with_overrides(&["train.nope=1"]).unwrap_err().key, "train.nope");
        assert_eq!(RunConfig::default().with_overrides(&["train=1"]).unwrap_err().key, "train");
        assert_eq!(RunConfig::default().with_overrides(&["train.epochs=abc"]).unwrap_err().key, "train.epochs");
    }

    #[test]
    fn validation_names_the_key() {
        let bad = |o: &str| RunConfig::default().with_overrides(&[o]).unwrap().validate().unwrap_err().key;
        assert_eq!(bad("train.lr=0"), "train.lr");
        assert_eq!(bad("train.batch=0"), "train.batch");
        assert_eq!(bad("train.split_ratio=1.0"), "train.split_ratio");
        assert_eq!(bad("model.kernel=4"), "model.kernel");
        assert_eq!(bad("dsp.frame_len=1000"), "dsp.frame_len");
        assert_eq!(bad("dsp.fmax=20000"), "dsp.fmax");
    }

    #[test]
    fn every_key_listed() {
        let keys = RunConfig::keys_with_defaults();
        assert!(keys.contains(&"train.epochs = 370".to_string()));
        assert!(keys.contains(&"data.per_gender = true".to_string()));
        assert!(keys.iter().any(|k| k.starts_with("dsp.n_mfcc")));
        assert_eq!(keys.len(), 3 + 8 + 6 + 8);
    }

    #[test]
    fn model_config_matches_feature_layout() {
        let m = RunConfig::default().model_config();
        assert_eq!(m.input_channels, 21);
        assert_eq!(m.seq_len, 70);
        assert_eq!(m.dense_inputs(), 42);
    }
}
