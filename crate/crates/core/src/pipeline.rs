//! End-to-end operations behind the command-line tool: feature extraction over
//! a manifest, training into a run directory, evaluation and prediction.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::audio_io::{load_wav, manifest_from_paths, resample_linear, AudioClip, AudioError, EmotionLabel, Gender, Manifest};
use crate::config::{ConfigError, RunConfig};
use crate::dsp::{write_spectrogram_csv, write_waveplot_csv};
use crate::exec::Execution;
use crate::features::{fisher_score, format_sig9, FeatureError, FeatureExtractor, FeatureMatrix, Normalizer};
use crate::nn::{read_checkpoint, write_checkpoint, Checkpoint, Model, ModelConfig, ModelInput, NnError, Tensor};
use crate::train_eval::{
    argmax, split, train, write_accuracy_csv, write_accuracy_table, write_confusion_csv, write_loss_csv, ConfusionMatrix,
    EpochLoss, Sample, TrainError, TrainOutcome,
};

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_) => 2,
            PipelineError::Numeric(_) => 3,
        }
    }

    fn data(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        PipelineError::Data(format!("{context}: {err}"))
    }
}

impl From<TrainError> for PipelineError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => PipelineError::Numeric(e.to_string()),
            TrainError::Config(m) => PipelineError::Config(ConfigError {
                key: "train".into(),
                message: m,
            }),
            TrainError::Nn(NnError::Config(m)) => PipelineError::Config(ConfigError {
                key: "model".into(),
                message: m,
            }),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::data(path.display(), e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| PipelineError::data(path.display(), e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::data(dir.display(), e))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let f = File::open(path).map_err(|e| PipelineError::data(path.display(), e))?;
    Manifest::read_csv(BufReader::new(f)).map_err(|e| PipelineError::data(path.display(), e))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let f = File::open(path).map_err(|e| PipelineError::data(path.display(), e))?;
    FeatureMatrix::read_csv(BufReader::new(f)).map_err(|e| PipelineError::data(path.display(), e))
}

fn load_clip(path: &str, rate: u32) -> std::result::Result<AudioClip, AudioError> {
    resample_linear(&load_wav(path)?, rate)
}

fn debug_stem(index: usize, path: &str) -> String {
    let stem = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!("{index:05}_{stem}")
}

/// Extracts one feature row per manifest entry, in manifest order.
///
/// With `debug_dir`, each clip also gets `<nnnnn>_<stem>_spectrogram.csv` and
/// `<nnnnn>_<stem>_waveplot.csv` there.
pub fn extract_features(manifest: &Manifest, cfg: &RunConfig, exec: Execution, debug_dir: Option<&Path>) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let extractor = FeatureExtractor::new(cfg.dsp.clone(), cfg.data.canonical_rate)
        .map_err(|e| PipelineError::data("dsp", e))?;
    if let Some(d) = debug_dir {
        ensure_dir(d)?;
    }
    let clips = exec.map_indexed(&manifest.entries, |i, entry| -> Result<_> {
        let clip = load_clip(&entry.path, cfg.data.canonical_rate).map_err(|e| PipelineError::data(&entry.path, e))?;
        let analysis = extractor.analyze(&clip).map_err(|e| PipelineError::data(&entry.path, e))?;
        if let Some(d) = debug_dir {
            let stem = debug_stem(i, &entry.path);
            write_with(&d.join(format!("{stem}_spectrogram.csv")), |w| write_spectrogram_csv(&analysis.power, w))?;
            write_with(&d.join(format!("{stem}_waveplot.csv")), |w| write_waveplot_csv(&clip, w))?;
        }
        Ok(crate::features::assemble(&analysis, &cfg.dsp, entry.emotion, entry.gender))
    });
    let clips = clips.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix::from_clips(&clips, &cfg.dsp))
}

/// Writes `features.csv` and, when at least two classes with two samples each
/// are present, `fisher.csv` (`column,score,rank`). Returns a warning otherwise.
pub fn write_feature_outputs(out_dir: &Path, matrix: &FeatureMatrix) -> Result<Option<String>> {
    ensure_dir(out_dir)?;
    let path = out_dir.join("features.csv");
    let f = create(&path)?;
    matrix.write_csv(f).map_err(|e| PipelineError::data(path.display(), e))?;
    match fisher_score(matrix) {
        Ok(scores) => {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let mut rank = vec![0; scores.len()];
            for (r, &j) in order.iter().enumerate() {
                rank[j] = r + 1;
            }
            write_with(&out_dir.join("fisher.csv"), |w| {
                writeln!(w, "column,score,rank")?;
                for (j, name) in matrix.column_names.iter().enumerate() {
                    writeln!(w, "{name},{},{}", format_sig9(scores[j]), rank[j])?;
                }
                Ok(())
            })?;
            Ok(None)
        }
        Err(FeatureError::InsufficientClasses(m)) => Ok(Some(format!("fisher.csv not written: {m}"))),
        Err(e) => Err(PipelineError::data("fisher score", e)),
    }
}

/// Row indices trained together: one group per gender present, or a single `all` group.
pub fn groups(matrix: &FeatureMatrix, per_gender: bool) -> Vec<(String, Vec<usize>)> {
    if !per_gender {
        return vec![("all".into(), (0..matrix.n_rows()).collect())];
    }
    [Gender::Female, Gender::Male]
        .into_iter()
        .map(|g| {
            let idx: Vec<usize> = (0..matrix.n_rows()).filter(|&i| matrix.genders[i] == g).collect();
            (g.name().to_owned(), idx)
        })
        .filter(|(_, idx)| !idx.is_empty())
        .collect()
}

fn samples(rows: &[Vec<f64>], labels: &[EmotionLabel], norm: &Normalizer, cfg: &ModelConfig) -> Result<Vec<Sample>> {
    rows.iter()
        .zip(labels)
        .map(|(r, l)| {
            let input = ModelInput::from_flat(&norm.apply_row(r), cfg).map_err(|e| PipelineError::data("feature row", e))?;
            Ok(Sample { input, target: l.code() })
        })
        .collect()
}

/// A trained network with the normalization fitted on its training split.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    pub name: String,
    pub model: Model,
    pub normalizer: Normalizer,
}

impl GroupModel {
    pub fn predict_proba(&self, raw_row: &[f64]) -> Result<Vec<f64>> {
        let input = ModelInput::from_flat(&self.normalizer.apply_row(raw_row), &self.model.config)
            .map_err(|e| PipelineError::data("feature row", e))?;
        self.model
            .predict_proba(&input)
            .map_err(|e| PipelineError::data("forward", e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointEcho {
    run: RunConfig,
    model: ModelConfig,
    groups: Vec<String>,
}

/// All group models of a run plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: RunConfig,
    pub members: Vec<GroupModel>,
}

impl TrainedModel {
    /// Tensors are stored as `<group>/<param>` plus `<group>/norm.means` and `<group>/norm.stds`.
    pub fn to_checkpoint(&self) -> Checkpoint {
        let echo = CheckpointEcho {
            run: self.config.clone(),
            model: self.config.model_config(),
            groups: self.members.iter().map(|m| m.name.clone()).collect(),
        };
        let mut tensors = Vec::new();
        for m in &self.members {
            let d = m.normalizer.means.len();
            let norm = vec![
                ("norm.means".to_owned(), Tensor::new(vec![d], m.normalizer.means.clone()).expect("1-D")),
                ("norm.stds".to_owned(), Tensor::new(vec![d], m.normalizer.stds.clone()).expect("1-D")),
            ];
            let ck = m.model.to_checkpoint(String::new(), norm);
            tensors.extend(ck.tensors.into_iter().map(|(n, t)| (format!("{}/{n}", m.name), t)));
        }
        Checkpoint {
            config: serde_json::to_string(&echo).expect("echo serializes"),
            tensors,
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let echo: CheckpointEcho =
            serde_json::from_str(&ckpt.config).map_err(|e| PipelineError::data("checkpoint config", e))?;
        let mut members = Vec::new();
        for name in &echo.groups {
            let prefix = format!("{name}/");
            let sub = Checkpoint {
                config: String::new(),
                tensors: ckpt
                    .tensors
                    .iter()
                    .filter_map(|(n, t)| n.strip_prefix(&prefix).map(|s| (s.to_owned(), t.clone())))
                    .collect(),
            };
            let model = Model::from_checkpoint(echo.model.clone(), &sub).map_err(|e| PipelineError::data("checkpoint", e))?;
            let get = |k: &str| {
                sub.get(k)
                    .map(|t| t.data().to_vec())
                    .ok_or_else(|| PipelineError::Data(format!("checkpoint: missing tensor {prefix}{k}")))
            };
            members.push(GroupModel {
                name: name.clone(),
                model,
                normalizer: Normalizer {
                    means: get("norm.means")?,
                    stds: get("norm.stds")?,
                },
            });
        }
        Ok(Self {
            config: echo.run,
            members,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let w = create(path)?;
        write_checkpoint(w, &self.to_checkpoint()).map_err(|e| PipelineError::data(path.display(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| PipelineError::data(path.display(), e))?;
        let ckpt = read_checkpoint(BufReader::new(f)).map_err(|e| PipelineError::data(path.display(), e))?;
        Self::from_checkpoint(&ckpt)
    }

    pub fn member(&self, name: &str) -> Option<&GroupModel> {
        self.members.iter().find(|m| m.name == name)
    }

    /// Routes to the member for `gender` (or the pooled `all` member); without
    /// a usable member, averages every member's probabilities.
    pub fn predict_proba(&self, raw_row: &[f64], gender: Option<Gender>) -> Result<Vec<f64>> {
        let routed = gender
            .and_then(|g| self.member(g.name()))
            .or_else(|| self.member("all"));
        if let Some(m) = routed {
            return m.predict_proba(raw_row);
        }
        let mut acc = vec![0.0; EmotionLabel::COUNT];
        for m in &self.members {
            for (a, p) in acc.iter_mut().zip(m.predict_proba(raw_row)?) {
                *a += p;
            }
        }
        let n = self.members.len().max(1) as f64;
        Ok(acc.into_iter().map(|a| a / n).collect())
    }
}

/// Result of training one group.
#[derive(Debug, Clone)]
pub struct GroupRun {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub outcome: TrainOutcome,
    pub normalizer: Normalizer,
    /// Final model on the held-out split.
    pub confusion: ConfusionMatrix,
}

/// Seeded stratified split of one group, returned as matrix row indices.
fn split_group(matrix: &FeatureMatrix, idx: &[usize], cfg: &RunConfig, name: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let labels: Vec<EmotionLabel> = idx.iter().map(|&i| matrix.labels[i]).collect();
    let plan = split(&labels, cfg.train.split_ratio, cfg.train.seed, true)
        .map_err(|e| PipelineError::Data(format!("group {name}: {e}")))?;
    Ok((
        plan.train_indices.iter().map(|&k| idx[k]).collect(),
        plan.test_indices.iter().map(|&k| idx[k]).collect(),
    ))
}

fn predictions(members: &[(Vec<usize>, &GroupModel)], matrix: &FeatureMatrix, exec: Execution) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(EmotionLabel::COUNT);
    for (rows, member) in members {
        let preds = exec.map(rows, |&i| member.predict_proba(&matrix.rows[i]).map(|p| argmax(&p)));
        for (&i, p) in rows.iter().zip(preds) {
            cm.record(matrix.labels[i].code(), p?);
        }
    }
    Ok(cm)
}

/// Trains every group on its split of `matrix`.
pub fn train_groups(matrix: &FeatureMatrix, cfg: &RunConfig, exec: Execution) -> Result<Vec<GroupRun>> {
    cfg.validate()?;
    if matrix.n_cols() != cfg.dsp.n_columns() {
        return Err(PipelineError::Data(format!(
            "feature file has {} columns, dsp settings imply {}",
            matrix.n_cols(),
            cfg.dsp.n_columns()
        )));
    }
    let model_cfg = cfg.model_config();
    let mut runs = Vec::new();
    for (name, idx) in groups(matrix, cfg.data.per_gender) {
        let (train_idx, test_idx) = split_group(matrix, &idx, cfg, &name)?;
        let train_m = matrix.subset(&train_idx);
        let test_m = matrix.subset(&test_idx);
        let normalizer = Normalizer::fit(&train_m.rows);
        let train_s = samples(&train_m.rows, &train_m.labels, &normalizer, &model_cfg)?;
        let test_s = samples(&test_m.rows, &test_m.labels, &normalizer, &model_cfg)?;
        let model = Model::new(model_cfg.clone()).map_err(TrainError::from)?;
        let outcome = train(model, &train_s, &test_s, &cfg.train, exec).map_err(|e| match e {
            TrainError::NonFiniteLoss { epoch, batch, samples } => PipelineError::Numeric(format!(
                "group {name}: non-finite loss in epoch {epoch}, batch {batch}, rows {:?}",
                samples.iter().map(|&k| train_idx[k]).collect::<Vec<_>>()
            )),
            other => other.into(),
        })?;
        let member = GroupModel {
            name: name.clone(),
            model: outcome.final_model.clone(),
            normalizer: normalizer.clone(),
        };
        let confusion = predictions(&[(test_idx.clone(), &member)], matrix, exec)?;
        runs.push(GroupRun {
            name,
            n_train: train_idx.len(),
            n_test: test_idx.len(),
            outcome,
            normalizer,
            confusion,
        });
    }
    Ok(runs)
}

/// Sample-weighted mean of the groups' per-epoch losses.
fn combined_history(runs: &[GroupRun]) -> Vec<EpochLoss> {
    let epochs = runs.first().map_or(0, |r| r.outcome.run.loss_history.len());
    let n_train: usize = runs.iter().map(|r| r.n_train).sum();
    let n_test: usize = runs.iter().map(|r| r.n_test).sum();
    (0..epochs)
        .map(|e| {
            let train_loss = runs
                .iter()
                .map(|r| r.outcome.run.loss_history[e].train_loss * r.n_train as f64)
                .sum::<f64>()
                / n_train as f64;
            let test_loss = runs
                .iter()
                .map(|r| r.outcome.run.loss_history[e].test_loss.map(|l| l * r.n_test as f64))
                .sum::<Option<f64>>()
                .map(|s| s / n_test as f64);
            EpochLoss { train_loss, test_loss }
        })
        .collect()
}

fn write_reports(dir: &Path, cm: &ConfusionMatrix) -> Result<()> {
    write_with(&dir.join("confusion.csv"), |w| write_confusion_csv(cm, w))?;
    write_with(&dir.join("accuracy.csv"), |w| write_accuracy_csv(cm, w))?;
    write_with(&dir.join("accuracy.txt"), |w| write_accuracy_table(cm, w))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v)?;
        writeln!(w)
    })
}

/// Summary of a finished training run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub groups: Vec<GroupRun>,
    pub confusion: ConfusionMatrix,
    pub wall_time_s: f64,
}

/// Trains on `matrix` and writes the run directory:
/// `loss.csv`, `confusion.csv`, `accuracy.csv`, `accuracy.txt`, `model.ckpt`,
/// `best.ckpt` and `run.json`, plus one subdirectory of per-group reports when
/// training per gender. Top-level losses are sample-weighted across groups.
pub fn train_to_dir(matrix: &FeatureMatrix, cfg: &RunConfig, out_dir: &Path, exec: Execution) -> Result<RunSummary> {
    let runs = train_groups(matrix, cfg, exec)?;
    ensure_dir(out_dir)?;

    let mut total = ConfusionMatrix::new(EmotionLabel::COUNT);
    for r in &runs {
        total.merge(&r.confusion);
        if cfg.data.per_gender {
            let dir = out_dir.join(&r.name);
            ensure_dir(&dir)?;
            write_with(&dir.join("loss.csv"), |w| write_loss_csv(&r.outcome.run.loss_history, w))?;
            write_reports(&dir, &r.confusion)?;
        }
    }
    write_with(&out_dir.join("loss.csv"), |w| write_loss_csv(&combined_history(&runs), w))?;
    write_reports(out_dir, &total)?;

    let bundle = |best: bool| TrainedModel {
        config: cfg.clone(),
        members: runs
            .iter()
            .map(|r| GroupModel {
                name: r.name.clone(),
                model: if best { r.outcome.best_model.clone() } else { r.outcome.final_model.clone() },
                normalizer: r.normalizer.clone(),
            })
            .collect(),
    };
    bundle(false).save(&out_dir.join("model.ckpt"))?;
    bundle(true).save(&out_dir.join("best.ckpt"))?;

    let wall_time_s: f64 = runs.iter().map(|r| r.outcome.run.wall_time_s).sum();
    let group_json: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "n_train": r.n_train,
                "n_test": r.n_test,
                "best_epoch": r.outcome.run.best_epoch,
                "overall_accuracy": r.confusion.overall_accuracy(),
                "loss_history": r.outcome.run.loss_history,
                "wall_time_s": r.outcome.run.wall_time_s,
            })
        })
        .collect();
    let run_json = json!({
        "config": cfg.to_json(),
        "seed": cfg.train.seed,
        "wall_time_s": wall_time_s,
        "overall_accuracy": total.overall_accuracy(),
        "groups": group_json,
    });
    write_json(&out_dir.join("run.json"), &run_json)?;

    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        groups: runs,
        confusion: total,
        wall_time_s,
    })
}

/// Which rows of a feature file `evaluate_to_dir` scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalRows {
    /// The held-out rows, re-derived from the checkpoint's seed and ratio.
    Test,
    All,
}

/// Scores `matrix` with a trained model and writes `confusion.csv`,
/// `accuracy.csv` and `accuracy.txt` (per group in subdirectories when the
/// model has gender members).
pub fn evaluate_to_dir(trained: &TrainedModel, matrix: &FeatureMatrix, rows: EvalRows, out_dir: &Path, exec: Execution) -> Result<ConfusionMatrix> {
    let cfg = &trained.config;
    if matrix.n_cols() != cfg.dsp.n_columns() {
        return Err(PipelineError::Data(format!(
            "feature file has {} columns, checkpoint expects {}",
            matrix.n_cols(),
            cfg.dsp.n_columns()
        )));
    }
    ensure_dir(out_dir)?;
    let mut total = ConfusionMatrix::new(EmotionLabel::COUNT);
    for (name, idx) in groups(matrix, cfg.data.per_gender) {
        let member = trained
            .member(&name)
            .ok_or_else(|| PipelineError::Data(format!("checkpoint has no model for group {name}")))?;
        let selected = match rows {
            EvalRows::All => idx,
            EvalRows::Test => split_group(matrix, &idx, cfg, &name)?.1,
        };
        let cm = predictions(&[(selected, member)], matrix, exec)?;
        if cfg.data.per_gender {
            let dir = out_dir.join(&name);
            ensure_dir(&dir)?;
            write_reports(&dir, &cm)?;
        }
        total.merge(&cm);
    }
    write_reports(out_dir, &total)?;
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub path: String,
    pub emotion: EmotionLabel,
    pub probability: f64,
    pub probabilities: Vec<f64>,
}

/// Classifies WAV files end to end. Gender routing uses `gender` when given,
/// otherwise whatever the file name encodes.
pub fn predict_files<P: AsRef<Path> + Sync>(trained: &TrainedModel, paths: &[P], gender: Option<Gender>, exec: Execution) -> Result<Vec<Prediction>> {
    let cfg = &trained.config;
    let extractor = FeatureExtractor::new(cfg.dsp.clone(), cfg.data.canonical_rate)
        .map_err(|e| PipelineError::data("dsp", e))?;
    exec.map(paths, |p| {
        let path = p.as_ref().to_string_lossy().into_owned();
        let clip = load_clip(&path, cfg.data.canonical_rate).map_err(|e| PipelineError::data(&path, e))?;
        let g = gender.or_else(|| {
            manifest_from_paths(&[p.as_ref()])
                .ok()
                .and_then(|m| m.entries.first().map(|e| e.gender))
        });
        // The label is a placeholder; only the feature row is used.
        let row = extractor
            .extract(&clip, EmotionLabel::Neutral, g.unwrap_or(Gender::Male))
            .map_err(|e| PipelineError::data(&path, e))?
            .flatten();
        let probabilities = trained.predict_proba(&row, g)?;
        let k = argmax(&probabilities);
        Ok(Prediction {
            path,
            emotion: EmotionLabel::from_code(k).expect("class index in range"),
            probability: probabilities[k],
            probabilities,
        })
    })
    .into_iter()
    .collect()
}
