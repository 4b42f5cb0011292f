use crate::data::{Attribute, CoverageMask, DataSet, Task};
use crate::measures::{ContingencyQuad, Measure};
use crate::stats::SurvivalEstimate;

use super::condition::{premise_string, Condition};

#[derive(Debug, Clone, PartialEq)]
pub enum Consequence {
    Class(usize),
    Value { value: f64, spread: f64 },
    Survival(SurvivalEstimate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub premise: Vec<Condition>,
    pub consequence: Consequence,
    pub stats: ContingencyQuad,
    pub weight: f64,
    pub p_value: f64,
    /// Premise length at the end of growing, before pruning.
    pub grown_condition_count: usize,
}

impl Rule {
    pub fn covers(&self, ds: &DataSet, row: usize) -> bool {
        self.premise.iter().all(|c| c.covers(ds, row))
    }

    pub fn coverage(&self, ds: &DataSet) -> CoverageMask {
        premise_coverage(&self.premise, ds)
    }

    pub fn premise_string(&self, schema: &[Attribute]) -> String {
        premise_string(&self.premise, schema)
    }
}

pub fn premise_coverage(premise: &[Condition], ds: &DataSet) -> CoverageMask {
    CoverageMask::from_fn(ds.len(), |r| premise.iter().all(|c| c.covers(ds, r)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductionParams {
    pub min_rule_covered: f64,
    pub induction_measure: Measure,
    pub pruning_measure: Measure,
    pub voting_measure: Measure,
    pub pruning_enabled: bool,
    pub max_growing_conditions: Option<usize>,
}

impl Default for InductionParams {
    fn default() -> Self {
        InductionParams {
            min_rule_covered: 5.0,
            induction_measure: Measure::Correlation,
            pruning_measure: Measure::Correlation,
            voting_measure: Measure::Correlation,
            pruning_enabled: true,
            max_growing_conditions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DefaultResponse {
    Class(usize),
    Value(f64),
    Survival {
        estimate: SurvivalEstimate,
        /// Kaplan-Meier of the censoring distribution, used for IPCW weights.
        censoring: SurvivalEstimate,
    },
}

/// Per training example: indices of covering rules and the heaviest one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingCoverage {
    pub covering: Vec<Vec<usize>>,
    pub best: Vec<Option<usize>>,
}

impl TrainingCoverage {
    /// Ties on weight go to the earlier rule.
    pub fn compute(rules: &[Rule], ds: &DataSet) -> Self {
        let masks: Vec<CoverageMask> = rules.iter().map(|r| r.coverage(ds)).collect();
        let mut covering = Vec::with_capacity(ds.len());
        let mut best = Vec::with_capacity(ds.len());
        for row in 0..ds.len() {
            let idx: Vec<usize> = (0..rules.len()).filter(|&i| masks[i].get(row)).collect();
            let top = idx.iter().copied().fold(None, |acc: Option<usize>, i| match acc {
                Some(b) if rules[b].weight >= rules[i].weight => Some(b),
                _ => Some(i),
            });
            covering.push(idx);
            best.push(top);
        }
        TrainingCoverage { covering, best }
    }

    pub fn rules_per_example(&self) -> f64 {
        if self.covering.is_empty() {
            return 0.0;
        }
        self.covering.iter().map(Vec::len).sum::<usize>() as f64 / self.covering.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub total_s: f64,
    pub growing_s: f64,
    pub pruning_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub task: Task,
    /// Training schema; rule conditions index into it.
    pub schema: Vec<Attribute>,
    pub rules: Vec<Rule>,
    pub default_response: DefaultResponse,
    pub params: InductionParams,
    pub training_coverage: TrainingCoverage,
    pub timing: Timing,
}

impl RuleSet {
    /// Name of the attribute shown as the consequence.
    pub fn target_name(&self) -> &str {
        use crate::data::Role;
        self.schema
            .iter()
            .find(|a| a.role == Role::Label)
            .or_else(|| self.schema.iter().find(|a| a.role == Role::SurvivalStatus))
            .map_or("class", |a| a.name.as_str())
    }

    pub fn class_levels(&self) -> &[String] {
        use crate::data::Role;
        self.schema
            .iter()
            .find(|a| a.role == Role::Label)
            .and_then(Attribute::levels)
            .unwrap_or(&[])
    }
}
