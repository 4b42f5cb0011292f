//! Batch experiments: XML configuration, training and prediction runs,
//! cross-validation, reports, model files and the command line entry point.

mod model;
mod report;
mod runner;
mod spec;

use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

pub use model::{deserialize_model, serialize_model, MODEL_FORMAT, MODEL_VERSION};
pub use report::{coverage_line, rule_line, write_training_report};
pub use runner::{load_data, run, RunOptions};
pub use spec::{
    parse_experiment, CrossValidation, DatasetSpec, ExperimentSpec, ParameterSet, PredictEntry, PredictionPhase,
    TrainEntry, TrainingPhase,
};

use crate::data::DataError;
use crate::induction::InductionError;
use crate::knowledge::KnowledgeError;
use crate::prediction::PredictionError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {message}")]
    Xml { path: String, message: String },
    #[error("model line {line}: {message}")]
    Model { line: usize, message: String },
    #[error("model format version {found} is not supported (expected {supported})")]
    ModelVersion { found: u32, supported: u32 },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Data { path: PathBuf, source: DataError },
    #[error(transparent)]
    Induction(#[from] InductionError),
    #[error(transparent)]
    Prediction(#[from] PredictionError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rulekit", about = "Run a batch rule induction experiment")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for fold assignment when the experiment does not give one.
    #[arg(long)]
    seed: Option<u64>,
    /// Parse the experiment file and exit.
    #[arg(long)]
    validate: bool,
    /// Experiment XML file.
    experiment: PathBuf,
}

/// Parses `args` (program name first) and runs the experiment. Returns the
/// process exit status.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let xml = match std::fs::read_to_string(&cli.experiment) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {}", ExperimentError::io(&cli.experiment, e));
            return 1;
        }
    };
    let base = cli.experiment.parent().map(Path::to_path_buf).unwrap_or_default();
    let spec = match parse_experiment(&xml, &base) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.experiment.display());
            return 1;
        }
    };
    if cli.validate {
        println!(
            "{}: {} parameter set(s), {} dataset(s)",
            cli.experiment.display(),
            spec.parameter_sets.len(),
            spec.datasets.len()
        );
        return 0;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let options = RunOptions { seed: cli.seed };
    pool.install(|| run(&spec, &options))
}
