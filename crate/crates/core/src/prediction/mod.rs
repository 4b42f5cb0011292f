//! Applying rule sets to new data, and the metrics reported for models and
//! their predictions.

mod metrics;

use rayon::prelude::*;
use thiserror::Error;

pub use metrics::{
    evaluate, evaluate_classification, evaluate_regression, evaluate_survival, integrated_brier_score,
    model_characteristics, PerformanceReport,
};

use crate::data::{Attribute, AttributeKind, DataError, DataSet, Role, Task};
use crate::format::double_string;
use crate::induction::{Consequence, DefaultResponse, RuleSet};
use crate::stats::SurvivalEstimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictionError {
    #[error("attribute '{0}' used by the model is missing from the data")]
    MissingAttribute(String),
    #[error("attribute '{0}' has a different type than in the training data")]
    KindMismatch(String),
    #[error("no examples to evaluate")]
    Empty,
    #[error("data has no {0} to compare predictions with")]
    NoTruth(&'static str),
    #[error("rule set has no rules")]
    EmptyRuleSet,
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Class(usize),
    Value(f64),
    Survival(SurvivalEstimate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    pub predictions: Vec<Prediction>,
    /// Indices into the rule set of the rules covering each example.
    pub covering: Vec<Vec<usize>>,
    pub default_used: Vec<bool>,
}

impl PredictionResult {
    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn rules_per_example(&self) -> f64 {
        if self.covering.is_empty() {
            return 0.0;
        }
        self.covering.iter().map(Vec::len).sum::<usize>() as f64 / self.covering.len() as f64
    }
}

/// Re-expresses `ds` in the training schema so rule conditions can index it.
/// Columns are matched by name; nominal levels by their text, with unseen
/// levels treated as missing. Target columns absent from `ds` become missing.
pub fn align(rs: &RuleSet, ds: &DataSet) -> Result<DataSet, PredictionError> {
    let mut columns = Vec::with_capacity(rs.schema.len());
    for train in &rs.schema {
        let Some(idx) = ds.attribute_index(&train.name) else {
            if train.role == Role::Regular {
                return Err(PredictionError::MissingAttribute(train.name.clone()));
            }
            columns.push(vec![f64::NAN; ds.len()]);
            continue;
        };
        let test = ds.attribute(idx);
        let column = ds.column(idx);
        match (&train.kind, &test.kind) {
            (AttributeKind::Numeric, AttributeKind::Numeric) => columns.push(column.to_vec()),
            (AttributeKind::Nominal(_), AttributeKind::Nominal(levels)) => {
                let map: Vec<f64> = levels
                    .iter()
                    .map(|l| train.level_index(l).map_or(f64::NAN, |i| i as f64))
                    .collect();
                columns.push(
                    column
                        .iter()
                        .map(|&v| if v.is_nan() { v } else { map[v as usize] })
                        .collect(),
                );
            }
            // survival status may be read as numeric or as {0,1}
            (AttributeKind::Numeric, AttributeKind::Nominal(levels)) if train.role == Role::SurvivalStatus => {
                columns.push(
                    column
                        .iter()
                        .map(|&v| if v.is_nan() { v } else { levels[v as usize].parse().unwrap_or(f64::NAN) })
                        .collect(),
                );
            }
            _ => return Err(PredictionError::KindMismatch(train.name.clone())),
        }
    }
    let aligned = DataSet::from_columns(regular_only(&rs.schema), columns)?;
    Ok(aligned)
}

/// Schema with roles dropped so missing targets pass validation; rule
/// conditions only read regular columns.
fn regular_only(schema: &[Attribute]) -> Vec<Attribute> {
    schema
        .iter()
        .map(|a| Attribute {
            role: Role::Regular,
            ..a.clone()
        })
        .collect()
}

fn vote(rs: &RuleSet, covering: &[usize]) -> Option<usize> {
    let levels = rs.class_levels().len().max(
        rs.rules
            .iter()
            .filter_map(|r| match r.consequence {
                Consequence::Class(c) => Some(c + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0),
    );
    let mut votes: Vec<Option<f64>> = vec![None; levels];
    for &i in covering {
        if let Consequence::Class(c) = rs.rules[i].consequence {
            let w = rs.rules[i].weight;
            let w = if w.is_nan() { 0.0 } else { w };
            *votes[c].get_or_insert(0.0) += w;
        }
    }
    let mut best: Option<(usize, f64)> = None;
    for (c, v) in votes.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
    }
    best.map(|(c, _)| c)
}

fn weighted_value(rs: &RuleSet, covering: &[usize]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = covering
        .iter()
        .filter_map(|&i| match rs.rules[i].consequence {
            Consequence::Value { value, .. } => Some((value, rs.rules[i].weight)),
            _ => None,
        })
        .collect();
    if pairs.is_empty() {
        return None;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total > 0.0 && total.is_finite() {
        Some(pairs.iter().map(|(v, w)| v * w).sum::<f64>() / total)
    } else {
        Some(pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64)
    }
}

/// Applies the rule set to every example of `ds`.
pub fn predict(rs: &RuleSet, ds: &DataSet) -> Result<PredictionResult, PredictionError> {
    let aligned = align(rs, ds)?;
    let masks: Vec<_> = rs.rules.iter().map(|r| r.coverage(&aligned)).collect();
    let rows: Vec<(Prediction, Vec<usize>, bool)> = (0..aligned.len())
        .into_par_iter()
        .map(|row| {
            let covering: Vec<usize> = (0..rs.rules.len()).filter(|&i| masks[i].get(row)).collect();
            let prediction = match &rs.default_response {
                DefaultResponse::Class(_) => vote(rs, &covering).map(Prediction::Class),
                DefaultResponse::Value(_) => weighted_value(rs, &covering).map(Prediction::Value),
                DefaultResponse::Survival { .. } => {
                    let curves: Vec<&SurvivalEstimate> = covering
                        .iter()
                        .filter_map(|&i| match &rs.rules[i].consequence {
                            Consequence::Survival(s) => Some(s),
                            _ => None,
                        })
                        .collect();
                    (!curves.is_empty()).then(|| Prediction::Survival(SurvivalEstimate::mean(curves)))
                }
            };
            let default_used = prediction.is_none();
            let prediction = prediction.unwrap_or_else(|| default_prediction(&rs.default_response));
            (prediction, covering, default_used)
        })
        .collect();
    let mut out = PredictionResult {
        predictions: Vec::with_capacity(rows.len()),
        covering: Vec::with_capacity(rows.len()),
        default_used: Vec::with_capacity(rows.len()),
    };
    for (p, c, d) in rows {
        out.predictions.push(p);
        out.covering.push(c);
        out.default_used.push(d);
    }
    Ok(out)
}

fn default_prediction(d: &DefaultResponse) -> Prediction {
    match d {
        DefaultResponse::Class(c) => Prediction::Class(*c),
        DefaultResponse::Value(v) => Prediction::Value(*v),
        DefaultResponse::Survival { estimate, .. } => Prediction::Survival(estimate.clone()),
    }
}

/// Earliest time at which the curve reaches 0.5 or below.
pub fn median_survival_time(s: &SurvivalEstimate) -> Option<f64> {
    s.points().iter().find(|p| p.1 <= 0.5).map(|p| p.0)
}

/// `ds` with the prediction appended as a final attribute named
/// `prediction`. Survival predictions are rendered as median survival time.
pub fn with_predictions(rs: &RuleSet, ds: &DataSet, result: &PredictionResult) -> Result<DataSet, PredictionError> {
    let mut attrs: Vec<Attribute> = ds.attributes().to_vec();
    let mut columns: Vec<Vec<f64>> = (0..attrs.len()).map(|i| ds.column(i).to_vec()).collect();
    let mut name = "prediction".to_string();
    while attrs.iter().any(|a| a.name == name) {
        name.insert(0, '_');
    }
    let attr = match rs.task {
        Task::Classification => Attribute::nominal(name, rs.class_levels().iter().cloned()),
        Task::Regression | Task::Survival => Attribute::numeric(name),
    };
    attrs.push(attr);
    columns.push(
        result
            .predictions
            .iter()
            .map(|p| match p {
                Prediction::Class(c) => *c as f64,
                Prediction::Value(v) => *v,
                Prediction::Survival(s) => median_survival_time(s).unwrap_or(f64::NAN),
            })
            .collect(),
    );
    Ok(DataSet::from_columns(attrs, columns)?)
}

/// CSV with a `time` column over the union grid, one column per rule curve
/// (`r1`, `r2`, ...) and one per example (`e1`, `e2`, ...).
pub fn survival_curves_csv(rs: &RuleSet, result: &PredictionResult) -> String {
    let rule_curves: Vec<&SurvivalEstimate> = rs
        .rules
        .iter()
        .filter_map(|r| match &r.consequence {
            Consequence::Survival(s) => Some(s),
            _ => None,
        })
        .collect();
    let example_curves: Vec<&SurvivalEstimate> = result
        .predictions
        .iter()
        .filter_map(|p| match p {
            Prediction::Survival(s) => Some(s),
            _ => None,
        })
        .collect();
    let all: Vec<&SurvivalEstimate> = rule_curves.iter().chain(&example_curves).copied().collect();
    let mut grid = crate::stats::union_grid(all.iter().copied());
    grid.insert(0, 0.0);
    grid.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("time".to_string())
        .chain((1..=rule_curves.len()).map(|i| format!("r{i}")))
        .chain((1..=example_curves.len()).map(|i| format!("e{i}")));
    w.write_record(header).expect("in-memory write");
    for t in grid {
        let row = std::iter::once(double_string(t)).chain(all.iter().map(|c| double_string(c.at(t))));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests;
