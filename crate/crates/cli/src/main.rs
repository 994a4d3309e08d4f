//! `ser`: manifest building, feature extraction, training, evaluation and
//! prediction from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use ser_core::audio_io::build_manifest;
use ser_core::config::ConfigError;
use ser_core::exec::with_jobs;
use ser_core::pipeline::{
    evaluate_to_dir, extract_features, predict_files, read_features, read_manifest, train_to_dir,
    write_feature_outputs, EvalRows, PipelineError, TrainedModel,
};
use ser_core::{Execution, Gender, RunConfig};

/// Number of clips in the combined SAVEE + RAVDESS (calm removed) corpus.
const EXPECTED_ENTRIES: usize = 2459;

#[derive(Debug, Parser)]
#[command(name = "ser", version, about = "Speech emotion recognition pipeline")]
struct Cli {
    /// JSON run configuration; absent keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set train.epochs=10`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for data-parallel work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan dataset directories and write the manifest CSV.
    Manifest {
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Dataset roots; defaults to `data.roots`.
        roots: Vec<PathBuf>,
    },
    /// Extract per-clip features for every manifest entry.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for features.csv and fisher.csv.
        #[arg(long)]
        out: PathBuf,
        /// Also dump per-clip spectrogram and waveform CSVs under <out>/debug.
        #[arg(long)]
        debug_spectrogram: bool,
    },
    /// Train on a features file and write a run directory.
    Train {
        #[arg(long)]
        features: PathBuf,
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
        /// Shorthand for `--set train.epochs=N`.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Score a features file with a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Score every row instead of the held-out split.
        #[arg(long)]
        all: bool,
    },
    /// Print `path,emotion,probability` for each WAV file.
    Predict {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Route to this gender's model instead of parsing the file name.
        #[arg(long)]
        gender: Option<String>,
        #[arg(required = true)]
        wavs: Vec<PathBuf>,
    },
}

fn config_help() -> String {
    let mut s = String::from("Config keys (defaults):\n");
    for line in RunConfig::keys_with_defaults() {
        s.push_str("  ");
        s.push_str(&line);
        s.push('\n');
    }
    s
}

fn load_config(cli: &Cli, extra: &[String]) -> Result<RunConfig, PipelineError> {
    let base = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| ConfigError {
                key: "<document>".into(),
                message: format!("{}: {e}", path.display()),
            })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let mut overrides = cli.overrides.clone();
    overrides.extend_from_slice(extra);
    let cfg = base.with_overrides(&overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(out: &Path, roots: &[PathBuf]) -> Result<(), PipelineError> {
    let manifest = build_manifest(roots).map_err(|e| PipelineError::Data(e.to_string()))?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| PipelineError::Data(format!("{}: {e}", dir.display())))?;
    }
    let f = fs::File::create(out).map_err(|e| PipelineError::Data(format!("{}: {e}", out.display())))?;
    manifest
        .write_csv(std::io::BufWriter::new(f))
        .map_err(|e| PipelineError::Data(format!("{}: {e}", out.display())))?;
    for (label, n) in &manifest.class_counts {
        println!("{label}: {n}");
    }
    println!("calm skipped: {}", manifest.calm_skipped);
    println!("entries: {} (expected {EXPECTED_ENTRIES})", manifest.len());
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let exec = Execution::Parallel;
    match &cli.command {
        Command::Manifest { out, roots } => {
            let cfg = load_config(&cli, &[])?;
            let roots = if roots.is_empty() { cfg.data.roots.clone() } else { roots.clone() };
            if roots.is_empty() {
                return Err(ConfigError {
                    key: "data.roots".into(),
                    message: "no dataset roots given".into(),
                }
                .into());
            }
            write_manifest(out, &roots)
        }
        Command::Extract {
            manifest,
            out,
            debug_spectrogram,
        } => {
            let cfg = load_config(&cli, &[])?;
            let manifest = read_manifest(manifest)?;
            let debug = debug_spectrogram.then(|| out.join("debug"));
            let matrix = extract_features(&manifest, &cfg, exec, debug.as_deref())?;
            if let Some(w) = write_feature_outputs(out, &matrix)? {
                eprintln!("warning: {w}");
            }
            println!("rows: {}, columns: {}", matrix.n_rows(), matrix.n_cols());
            Ok(())
        }
        Command::Train { features, out, epochs } => {
            let extra: Vec<String> = epochs.iter().map(|e| format!("train.epochs={e}")).collect();
            let cfg = load_config(&cli, &extra)?;
            let matrix = read_features(features)?;
            let summary = train_to_dir(&matrix, &cfg, out, exec)?;
            for g in &summary.groups {
                println!(
                    "{}: train {} test {} accuracy {:.4}",
                    g.name,
                    g.n_train,
                    g.n_test,
                    g.confusion.overall_accuracy().unwrap_or(f64::NAN)
                );
            }
            println!("overall accuracy: {:.4}", summary.confusion.overall_accuracy().unwrap_or(f64::NAN));
            Ok(())
        }
        Command::Eval {
            checkpoint,
            features,
            out,
            all,
        } => {
            let trained = TrainedModel::load(checkpoint)?;
            let matrix = read_features(features)?;
            let rows = if *all { EvalRows::All } else { EvalRows::Test };
            let cm = evaluate_to_dir(&trained, &matrix, rows, out, exec)?;
            println!("overall accuracy: {:.4}", cm.overall_accuracy().unwrap_or(f64::NAN));
            Ok(())
        }
        Command::Predict {
            checkpoint,
            gender,
            wavs,
        } => {
            let gender = gender
                .as_deref()
                .map(str::parse::<Gender>)
                .transpose()
                .map_err(|e| PipelineError::Data(e.to_string()))?;
            let trained = TrainedModel::load(checkpoint)?;
            println!("path,emotion,probability");
            for p in predict_files(&trained, wavs, gender, exec)? {
                println!("{},{},{:.6}", p.path, p.emotion, p.probability);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let help = config_help();
    let cmd = Cli::command().mut_subcommands(|s| s.after_help(help.clone()));
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let jobs = cli.jobs;
    match with_jobs(jobs, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
