use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::report::write_training_report;
use super::spec::{DatasetSpec, ExperimentSpec, ParameterSet, PredictEntry, TrainEntry};
use super::{deserialize_model, serialize_model, ExperimentError};
use crate::data::{parse_arff, parse_csv, set_roles, stratified_folds, write_arff, DataSet, Task};
use crate::induction::{induce, RuleSet};
use crate::prediction::{
    evaluate, model_characteristics, predict, survival_curves_csv, with_predictions, PerformanceReport,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Fold seed used when the experiment file does not set one.
    pub seed: Option<u64>,
}

/// Reads ARFF, or CSV with a header row when the extension is `.csv`.
pub fn load_data(path: &Path) -> Result<DataSet, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv { parse_csv(&text, true) } else { parse_arff(&text) };
    parsed.map_err(|source| ExperimentError::Data {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| ExperimentError::io(path, e))
}

struct PerformanceRow {
    parameter_set: String,
    model_file: String,
    test_file: String,
    metrics: PerformanceReport,
}

struct Outcome {
    rows: Vec<(PathBuf, PerformanceRow)>,
    failed: bool,
}

struct Job<'a> {
    set: &'a ParameterSet,
    dataset: &'a DatasetSpec,
    base_dir: &'a Path,
    out_dir: PathBuf,
    report: String,
    rows: Vec<(PathBuf, PerformanceRow)>,
    failed: bool,
}

fn dir_name(set: &str) -> String {
    set.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.=".contains(c) { c } else { '_' })
        .collect()
}

impl Job<'_> {
    fn fail(&mut self, context: &str, e: &ExperimentError) {
        self.failed = true;
        if !self.report.is_empty() && !self.report.ends_with("\n\n") {
            self.report.push('\n');
        }
        let _ = writeln!(self.report, "Error ({context}): {e}");
        eprintln!("error [{}] {context}: {e}", self.set.name);
    }

    fn load_with_roles(&self, file: &Path) -> Result<DataSet, ExperimentError> {
        let raw = load_data(file)?;
        set_roles(
            raw,
            self.dataset.label.as_deref(),
            self.dataset.survival_time.as_deref(),
            self.dataset.survival_status.as_deref(),
        )
        .map_err(|source| ExperimentError::Data {
            path: file.to_path_buf(),
            source,
        })
    }

    fn fit(&self, ds: &DataSet) -> Result<(RuleSet, String), ExperimentError> {
        let knowledge = (!self.set.knowledge.is_empty()).then_some(&self.set.knowledge);
        let rs = induce(ds, &self.set.params, knowledge)?;
        let characteristics = model_characteristics(&rs).unwrap_or_else(|_| {
            let mut r = PerformanceReport::default();
            r.insert("#rules", 0.0);
            r
        });
        let train_metrics = evaluate(&rs, ds, &predict(&rs, ds)?)?;
        let text = write_training_report(&rs, &characteristics, &train_metrics);
        Ok((rs, text))
    }

    fn train(&mut self, entry: &TrainEntry, several: bool) -> Result<(), ExperimentError> {
        let in_file = self.base_dir.join(&entry.in_file);
        let ds = self.load_with_roles(&in_file)?;
        let (rs, text) = self.fit(&ds)?;
        if several {
            let _ = writeln!(self.report, "Training file: {}\n", entry.in_file.display());
        }
        self.report.push_str(&text);
        self.report.push('\n');
        write_file(&self.out_dir.join(&entry.model_file), &serialize_model(&rs)?)
    }

    fn model_path(&self, model_file: &Path) -> PathBuf {
        let in_out = self.out_dir.join(model_file);
        if in_out.exists() {
            return in_out;
        }
        let in_base = self.base_dir.join(model_file);
        if in_base.exists() {
            in_base
        } else {
            in_out
        }
    }

    fn predict(&mut self, entry: &PredictEntry, performance: &Path) -> Result<(), ExperimentError> {
        let model_path = self.model_path(&entry.model_file);
        let text = std::fs::read_to_string(&model_path).map_err(|e| ExperimentError::io(&model_path, e))?;
        let rs = deserialize_model(&text)?;
        let test_file = self.base_dir.join(&entry.test_file);
        let ds = load_data(&test_file)?;
        let result = predict(&rs, &ds)?;
        let metrics = evaluate(&rs, &ds, &result)?;
        if let Some(pred) = &entry.predictions_file {
            let path = self.out_dir.join(pred);
            let relation = test_file
                .file_stem()
                .map_or_else(|| "predictions".to_string(), |s| s.to_string_lossy().into_owned());
            write_file(&path, &write_arff(&with_predictions(&rs, &ds, &result)?, &relation))?;
            if rs.task == Task::Survival {
                let mut curves = path.clone();
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                curves.set_file_name(format!("{stem}-curves.csv"));
                write_file(&curves, &survival_curves_csv(&rs, &result))?;
            }
        }
        self.rows.push((
            performance.to_path_buf(),
            PerformanceRow {
                parameter_set: self.set.name.clone(),
                model_file: entry.model_file.display().to_string(),
                test_file: entry.test_file.display().to_string(),
                metrics,
            },
        ));
        Ok(())
    }

    fn cross_validate(
        &mut self,
        entry: &TrainEntry,
        folds: usize,
        seed: u64,
        performance: &Path,
    ) -> Result<(), ExperimentError> {
        let in_file = self.base_dir.join(&entry.in_file);
        let ds = self.load_with_roles(&in_file)?;
        let split = stratified_folds(&ds, folds, seed).map_err(|source| ExperimentError::Data {
            path: in_file.clone(),
            source,
        })?;
        let mut per_fold = Vec::with_capacity(folds);
        for (f, test_rows) in split.iter().enumerate() {
            let train_rows: Vec<usize> = (0..ds.len()).filter(|r| test_rows.binary_search(r).is_err()).collect();
            let train = ds.subset(&train_rows);
            let test = ds.subset(test_rows);
            let (rs, text) = self.fit(&train)?;
            let metrics = evaluate(&rs, &test, &predict(&rs, &test)?)?;
            let _ = writeln!(self.report, "Fold {} of {}: {}\n", f + 1, folds, entry.in_file.display());
            self.report.push_str(&text);
            self.report.push('\n');
            per_fold.push(metrics);
        }
        let mut mean = PerformanceReport::default();
        for fold in &per_fold {
            for (name, _) in &fold.metrics {
                if mean.get(name).is_none() {
                    let values: Vec<f64> = per_fold.iter().filter_map(|m| m.get(name)).collect();
                    mean.insert(name.clone(), values.iter().sum::<f64>() / values.len() as f64);
                }
            }
        }
        let tags = (1..=folds).map(|f| format!("fold{f}")).chain(std::iter::once("mean".to_string()));
        for (tag, metrics) in tags.zip(per_fold.into_iter().chain(std::iter::once(mean))) {
            self.rows.push((
                performance.to_path_buf(),
                PerformanceRow {
                    parameter_set: self.set.name.clone(),
                    model_file: tag,
                    test_file: entry.in_file.display().to_string(),
                    metrics,
                },
            ));
        }
        Ok(())
    }

    fn execute(mut self, cv: Option<(usize, u64)>) -> Outcome {
        if let Err(e) = std::fs::create_dir_all(&self.out_dir) {
            let e = ExperimentError::io(&self.out_dir, e);
            self.fail("output directory", &e);
            return Outcome {
                rows: self.rows,
                failed: true,
            };
        }
        let training = self.dataset.training.clone().unwrap_or_default();
        let prediction = self.dataset.prediction.clone().unwrap_or_default();
        let performance = self
            .out_dir
            .join(prediction.performance_file.as_deref().unwrap_or(Path::new("performance.csv")));
        match cv {
            Some((folds, seed)) => {
                for entry in &training.train {
                    if let Err(e) = self.cross_validate(entry, folds, seed, &performance) {
                        self.fail(&format!("cross-validation on {}", entry.in_file.display()), &e);
                    }
                }
            }
            None => {
                let several = training.train.len() > 1;
                for entry in &training.train {
                    if let Err(e) = self.train(entry, several) {
                        self.fail(&format!("training on {}", entry.in_file.display()), &e);
                    }
                }
                for entry in &prediction.predict {
                    if let Err(e) = self.predict(entry, &performance) {
                        self.fail(&format!("prediction on {}", entry.test_file.display()), &e);
                    }
                }
            }
        }
        if let Some(report_file) = &training.report_file {
            let path = self.out_dir.join(report_file);
            let text = self.report.trim_end().to_string() + "\n";
            if let Err(e) = write_file(&path, &text) {
                self.failed = true;
                eprintln!("error [{}] report: {e}", self.set.name);
            }
        }
        Outcome {
            rows: self.rows,
            failed: self.failed,
        }
    }
}

fn write_performance(path: &Path, rows: &[&PerformanceRow]) -> Result<(), ExperimentError> {
    let mut names: Vec<&str> = Vec::new();
    for row in rows {
        for (n, _) in &row.metrics.metrics {
            if !names.contains(&n.as_str()) {
                names.push(n);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["parameter_set", "model_file", "test_file"].into_iter().chain(names.iter().copied());
    let csv_err = |e: csv::Error| ExperimentError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        let fixed = [row.parameter_set.clone(), row.model_file.clone(), row.test_file.clone()];
        let values = names
            .iter()
            .map(|n| row.metrics.get(n).map_or_else(String::new, crate::format::double_string));
        w.write_record(fixed.into_iter().chain(values)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_file(path, &String::from_utf8_lossy(&bytes))
}

/// Runs every parameter set on every dataset and returns the exit status:
/// 0 when all entries succeed, 1 otherwise.
pub fn run(spec: &ExperimentSpec, options: &RunOptions) -> i32 {
    let cv = spec
        .cross_validation
        .map(|c| (c.folds, c.seed.or(options.seed).unwrap_or(0)));
    let nested = spec.parameter_sets.len() > 1;
    let jobs: Vec<Job> = spec
        .datasets
        .iter()
        .flat_map(|dataset| {
            spec.parameter_sets.iter().map(move |set| {
                let mut out_dir = spec.base_dir.join(&dataset.out_directory);
                if nested {
                    out_dir.push(dir_name(&set.name));
                }
                Job {
                    set,
                    dataset,
                    base_dir: &spec.base_dir,
                    out_dir,
                    report: String::new(),
                    rows: Vec::new(),
                    failed: false,
                }
            })
        })
        .collect();
    let outcomes: Vec<Outcome> = jobs.into_par_iter().map(|job| job.execute(cv)).collect();

    let mut failed = outcomes.iter().any(|o| o.failed);
    let mut files: BTreeMap<&Path, Vec<&PerformanceRow>> = BTreeMap::new();
    for (path, row) in outcomes.iter().flat_map(|o| &o.rows) {
        files.entry(path.as_path()).or_default().push(row);
    }
    for (path, rows) in files {
        if let Err(e) = write_performance(path, &rows) {
            eprintln!("error: {e}");
            failed = true;
        }
    }
    i32::from(failed)
}
