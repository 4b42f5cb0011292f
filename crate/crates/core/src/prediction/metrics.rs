use crate::data::{DataSet, Role, Task};
use crate::format::double_string;
use crate::induction::{DefaultResponse, RuleSet};
use crate::measures::totalized_div;
use crate::stats::SurvivalEstimate;

use super::{align, Prediction, PredictionError, PredictionResult};

/// Named metrics in insertion order, plus free-text notes on degenerate cases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerformanceReport {
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl PerformanceReport {
    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        let name = name.into();
        match self.metrics.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.metrics.push((name, value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|m| m.1)
    }

    pub fn extend(&mut self, other: PerformanceReport) {
        for (n, v) in other.metrics {
            self.insert(n, v);
        }
        self.notes.extend(other.notes);
    }

    /// `name: value` lines as shown in reports.
    pub fn lines(&self) -> Vec<String> {
        self.metrics
            .iter()
            .map(|(n, v)| format!("{n}: {}", double_string(*v)))
            .collect()
    }
}

fn known_rows(truth: &[f64]) -> Vec<usize> {
    (0..truth.len()).filter(|&r| !truth[r].is_nan()).collect()
}

fn rules_per_example(result: &PredictionResult, rows: &[usize]) -> f64 {
    rows.iter().map(|&r| result.covering[r].len()).sum::<usize>() as f64 / rows.len() as f64
}

/// Accuracy, error, Cohen's kappa, balanced accuracy, mean number of covering
/// rules, then precision, recall and F1 per class. Rows with missing truth
/// are skipped.
pub fn evaluate_classification(
    result: &PredictionResult,
    truth: &[f64],
    levels: &[String],
) -> Result<PerformanceReport, PredictionError> {
    let rows = known_rows(truth);
    if rows.is_empty() {
        return Err(PredictionError::Empty);
    }
    let k = levels.len().max(1);
    let mut confusion = vec![vec![0usize; k]; k];
    for &r in &rows {
        let Prediction::Class(p) = result.predictions[r] else {
            return Err(PredictionError::NoTruth("class predictions"));
        };
        confusion[truth[r] as usize][p] += 1;
    }
    let n = rows.len() as f64;
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    let row_sum = |c: usize| confusion[c].iter().sum::<usize>() as f64;
    let col_sum = |c: usize| (0..k).map(|t| confusion[t][c]).sum::<usize>() as f64;
    let p_o = correct as f64 / n;
    let p_e: f64 = (0..k).map(|c| row_sum(c) * col_sum(c)).sum::<f64>() / (n * n);
    let kappa = if p_e >= 1.0 {
        if p_o >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };
    let present: Vec<usize> = (0..k).filter(|&c| row_sum(c) > 0.0).collect();
    let balanced = present.iter().map(|&c| confusion[c][c] as f64 / row_sum(c)).sum::<f64>() / present.len() as f64;

    let mut report = PerformanceReport::default();
    report.insert("accuracy", p_o);
    report.insert("classification_error", 1.0 - p_o);
    report.insert("kappa", kappa);
    report.insert("balanced_accuracy", balanced);
    report.insert("#rules_per_example", rules_per_example(result, &rows));
    for (c, level) in levels.iter().enumerate() {
        let tp = confusion[c][c] as f64;
        let precision = if col_sum(c) > 0.0 { tp / col_sum(c) } else { 0.0 };
        let recall = if row_sum(c) > 0.0 { tp / row_sum(c) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        report.insert(format!("precision_{level}"), precision);
        report.insert(format!("recall_{level}"), recall);
        report.insert(format!("f1_{level}"), f1);
    }
    Ok(report)
}

/// RMSE, MAE, relative absolute error (against predicting the mean) and the
/// Pearson correlation of predictions with truth.
pub fn evaluate_regression(result: &PredictionResult, truth: &[f64]) -> Result<PerformanceReport, PredictionError> {
    let rows = known_rows(truth);
    if rows.is_empty() {
        return Err(PredictionError::Empty);
    }
    let mut pairs = Vec::with_capacity(rows.len());
    for &r in &rows {
        let Prediction::Value(v) = result.predictions[r] else {
            return Err(PredictionError::NoTruth("numeric predictions"));
        };
        pairs.push((v, truth[r]));
    }
    let n = pairs.len() as f64;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_p = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let abs_err: f64 = pairs.iter().map(|(p, y)| (p - y).abs()).sum();
    let sq_err: f64 = pairs.iter().map(|(p, y)| (p - y) * (p - y)).sum();
    let abs_dev: f64 = pairs.iter().map(|(_, y)| (y - mean_y).abs()).sum();
    let cov: f64 = pairs.iter().map(|(p, y)| (p - mean_p) * (y - mean_y)).sum();
    let var_y: f64 = pairs.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let var_p: f64 = pairs.iter().map(|(p, _)| (p - mean_p) * (p - mean_p)).sum();

    let mut report = PerformanceReport::default();
    report.insert("rmse", (sq_err / n).sqrt());
    report.insert("mae", abs_err / n);
    report.insert("relative_absolute_error", totalized_div(abs_err, abs_dev));
    let correlation = if var_y > 0.0 && var_p > 0.0 {
        cov / (var_y * var_p).sqrt()
    } else {
        report
            .notes
            .push("correlation is undefined for constant truth or predictions; reported as 0".into());
        0.0
    };
    report.insert("correlation", correlation);
    report.insert("#rules_per_example", rules_per_example(result, &rows));
    Ok(report)
}

/// Integrated Brier score over `[0, max time]`, with inverse probability of
/// censoring weights from `censoring` (the Kaplan-Meier estimate of the
/// censoring distribution). Terms whose weight would divide by zero are
/// dropped.
pub fn integrated_brier_score(
    curves: &[&SurvivalEstimate],
    times: &[f64],
    events: &[u8],
    censoring: &SurvivalEstimate,
) -> f64 {
    let n = times.len() as f64;
    let t_max = times.iter().copied().fold(0.0, f64::max);
    if t_max <= 0.0 {
        return 0.0;
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.times())
        .chain(times.iter().copied())
        .chain(censoring.times())
        .filter(|&t| t < t_max)
        .collect();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let weight_before: Vec<f64> = times.iter().map(|&t| censoring.before(t)).collect();
    let mut integral = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        let next = grid.get(i + 1).copied().unwrap_or(t_max);
        let g_t = censoring.at(t);
        let mut bs = 0.0;
        for (j, curve) in curves.iter().enumerate() {
            let s = curve.at(t);
            if times[j] <= t {
                if events[j] == 1 && weight_before[j] > 0.0 {
                    bs += s * s / weight_before[j];
                }
            } else if g_t > 0.0 {
                bs += (1.0 - s) * (1.0 - s) / g_t;
            }
        }
        integral += bs / n * (next - t);
    }
    integral / t_max
}

pub fn evaluate_survival(
    result: &PredictionResult,
    times: &[f64],
    events: &[u8],
    censoring: &SurvivalEstimate,
) -> Result<PerformanceReport, PredictionError> {
    let rows: Vec<usize> = (0..times.len()).filter(|&r| !times[r].is_nan()).collect();
    if rows.is_empty() {
        return Err(PredictionError::Empty);
    }
    let mut curves = Vec::with_capacity(rows.len());
    for &r in &rows {
        let Prediction::Survival(s) = &result.predictions[r] else {
            return Err(PredictionError::NoTruth("survival predictions"));
        };
        curves.push(s);
    }
    let t: Vec<f64> = rows.iter().map(|&r| times[r]).collect();
    let e: Vec<u8> = rows.iter().map(|&r| events[r]).collect();
    let mut report = PerformanceReport::default();
    report.insert("integrated_brier_score", integrated_brier_score(&curves, &t, &e, censoring));
    report.insert("#rules_per_example", rules_per_example(result, &rows));
    Ok(report)
}

/// Metrics of `result` against the targets stored in `ds`.
pub fn evaluate(rs: &RuleSet, ds: &DataSet, result: &PredictionResult) -> Result<PerformanceReport, PredictionError> {
    let aligned = align(rs, ds)?;
    let column = |role: Role, what: &'static str| -> Result<&[f64], PredictionError> {
        let idx = rs
            .schema
            .iter()
            .position(|a| a.role == role)
            .ok_or(PredictionError::NoTruth(what))?;
        Ok(aligned.column(idx))
    };
    match (rs.task, &rs.default_response) {
        (Task::Classification, _) => evaluate_classification(result, column(Role::Label, "label")?, rs.class_levels()),
        (Task::Regression, _) => evaluate_regression(result, column(Role::Label, "label")?),
        (Task::Survival, DefaultResponse::Survival { censoring, .. }) => {
            let times = column(Role::SurvivalTime, "survival time")?;
            let status = column(Role::SurvivalStatus, "survival status")?;
            let rows: Vec<usize> = (0..times.len())
                .filter(|&r| !times[r].is_nan() && !status[r].is_nan())
                .collect();
            let sub = PredictionResult {
                predictions: rows.iter().map(|&r| result.predictions[r].clone()).collect(),
                covering: rows.iter().map(|&r| result.covering[r].clone()).collect(),
                default_used: rows.iter().map(|&r| result.default_used[r]).collect(),
            };
            let t: Vec<f64> = rows.iter().map(|&r| times[r]).collect();
            let e: Vec<u8> = rows.iter().map(|&r| (status[r] == 1.0) as u8).collect();
            evaluate_survival(&sub, &t, &e, censoring)
        }
        (Task::Survival, _) => Err(PredictionError::NoTruth("censoring estimate")),
    }
}

/// Rule count, premise sizes, coverage, precision and timings.
pub fn model_characteristics(rs: &RuleSet) -> Result<PerformanceReport, PredictionError> {
    if rs.rules.is_empty() {
        return Err(PredictionError::EmptyRuleSet);
    }
    let k = rs.rules.len() as f64;
    let mean = |f: &dyn Fn(&crate::induction::Rule) -> f64| rs.rules.iter().map(f).sum::<f64>() / k;
    let mut report = PerformanceReport::default();
    report.insert("time_total_s", rs.timing.total_s);
    report.insert("time_growing_s", rs.timing.growing_s);
    report.insert("time_pruning_s", rs.timing.pruning_s);
    report.insert("#rules", k);
    report.insert("#conditions_per_rule", mean(&|r| r.premise.len() as f64));
    report.insert("#induced_conditions_per_rule", mean(&|r| r.grown_condition_count as f64));
    report.insert("avg_rule_coverage", mean(&|r| r.stats.covered() / r.stats.total()));
    report.insert("avg_rule_precision", mean(&|r| r.stats.precision()));
    report.insert("avg_rule_quality", mean(&|r| r.weight));
    report.insert("avg_pvalue", mean(&|r| r.p_value));
    Ok(report)
}
