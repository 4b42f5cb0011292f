//! Sequential covering: rules are grown one condition at a time, pruned, and
//! added until the remaining targets are too few to support another rule.
//!
//! Regression has no natural positive class. For a premise whose covered
//! labels have median `v` and standard deviation `s`, an example is positive
//! iff `|y - v| <= s`; the resulting quad feeds the ordinary measures.
//! Survival rules are scored by the log-rank statistic between covered and
//! uncovered examples regardless of the configured measures.

mod candidates;
mod condition;
mod engine;
mod rule;

use std::time::Instant;

use thiserror::Error;

pub use candidates::candidate_conditions;
pub use condition::{premise_string, Condition, ConditionDisplay, Direction, Relation};
pub use rule::{
    premise_coverage, Consequence, DefaultResponse, InductionParams, Rule, RuleSet, Timing, TrainingCoverage,
};

use crate::data::{CoverageMask, DataError, DataSet, Task};
use crate::knowledge::{ExpertKnowledge, KnowledgeBudget, KnowledgeConstraints, KnowledgeError};
use crate::measures::Measure;
use crate::stats::{kaplan_meier, LogRankScorer, StatsError};
use engine::{Grower, Target};

#[derive(Debug, Error)]
pub enum InductionError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("dataset task is {found}, expected {expected}")]
    WrongTask { expected: &'static str, found: &'static str },
    #[error("measure {0} is only defined for survival analysis")]
    SurvivalOnlyMeasure(String),
    #[error("min_rule_covered must be at least 1, got {0}")]
    MinCovered(f64),
    #[error("max_growing_conditions must be positive")]
    MaxGrowing,
}

fn check_params(params: &InductionParams, task: Task) -> Result<(), InductionError> {
    if params.min_rule_covered.is_nan() || params.min_rule_covered < 1.0 {
        return Err(InductionError::MinCovered(params.min_rule_covered));
    }
    if params.max_growing_conditions == Some(0) {
        return Err(InductionError::MaxGrowing);
    }
    if task != Task::Survival {
        for m in [&params.induction_measure, &params.pruning_measure, &params.voting_measure] {
            if m.is_survival_only() {
                return Err(InductionError::SurvivalOnlyMeasure(m.name().to_string()));
            }
        }
    }
    Ok(())
}

fn expect_task(ds: &DataSet, expected: Task) -> Result<(), InductionError> {
    let found = ds.task().ok_or(DataError::NoTask)?;
    if found != expected {
        return Err(InductionError::WrongTask {
            expected: expected.name(),
            found: found.name(),
        });
    }
    Ok(())
}

fn constraints(ds: &DataSet, knowledge: Option<&ExpertKnowledge>) -> Result<KnowledgeConstraints, InductionError> {
    match knowledge {
        Some(k) => Ok(k.resolve(ds)?),
        None => Ok(KnowledgeConstraints::unguided()),
    }
}

/// State of one covering loop over a fixed target.
struct Covering<'a> {
    ds: &'a DataSet,
    params: &'a InductionParams,
    knowledge: &'a KnowledgeConstraints,
    budget: KnowledgeBudget,
    timing: Timing,
    rules: Vec<Rule>,
}

impl<'a> Covering<'a> {
    fn new(ds: &'a DataSet, params: &'a InductionParams, knowledge: &'a KnowledgeConstraints) -> Self {
        Covering {
            ds,
            params,
            knowledge,
            budget: KnowledgeBudget::new(knowledge),
            timing: Timing::default(),
            rules: Vec::new(),
        }
    }

    /// Runs the loop for `target`; `seed_filter` selects the expert seeds
    /// that apply. `uncovered` holds the targets still to explain.
    fn run(&mut self, target: &Target, mut uncovered: CoverageMask, seed_filter: impl Fn(Option<usize>) -> bool) {
        let first = self.rules.len();
        let seeds: Vec<Vec<Condition>> = self
            .knowledge
            .seeds
            .iter()
            .filter(|s| seed_filter(s.class))
            .map(|s| s.premise.clone())
            .collect();
        for seed in &seeds {
            if let Some(rule) = self.one_rule(target, seed, &uncovered, true) {
                if self.rules[first..].iter().any(|r| r.premise == rule.0.premise) {
                    continue;
                }
                uncovered = uncovered.and_not(&rule.1).expect("mask lengths agree");
                self.rules.push(rule.0);
            }
        }
        if !self.knowledge.induce_automatic_rules {
            return;
        }
        while uncovered.count() as f64 >= self.params.min_rule_covered {
            let Some((rule, covered)) = self.one_rule(target, &[], &uncovered, false) else {
                break;
            };
            if self.rules[first..].iter().any(|r| r.premise == rule.premise) {
                break;
            }
            uncovered = uncovered.and_not(&covered).expect("mask lengths agree");
            self.rules.push(rule);
        }
    }

    fn one_rule(
        &mut self,
        target: &Target,
        seed: &[Condition],
        uncovered: &CoverageMask,
        seeded: bool,
    ) -> Option<(Rule, CoverageMask)> {
        let grower = Grower {
            ds: self.ds,
            target,
            params: self.params,
            knowledge: self.knowledge,
            budget: &self.budget,
        };
        let t0 = Instant::now();
        let mut draft = grower.grow(seed, uncovered, seeded);
        self.timing.growing_s += t0.elapsed().as_secs_f64();
        let draft = draft.as_mut()?;
        if self.params.pruning_enabled {
            let t1 = Instant::now();
            grower.prune(draft);
            self.timing.pruning_s += t1.elapsed().as_secs_f64();
        }
        draft.charge(&mut self.budget);
        let rule = target.finalize(draft.premise.clone(), &draft.covered, draft.grown, &self.params.voting_measure);
        Some((rule, draft.covered.clone()))
    }
}

fn finish(
    ds: &DataSet,
    task: Task,
    params: &InductionParams,
    covering: Covering,
    default_response: DefaultResponse,
    start: Instant,
) -> RuleSet {
    let training_coverage = TrainingCoverage::compute(&covering.rules, ds);
    let mut timing = covering.timing;
    timing.total_s = start.elapsed().as_secs_f64();
    RuleSet {
        task,
        schema: ds.attributes().to_vec(),
        rules: covering.rules,
        default_response,
        params: params.clone(),
        training_coverage,
        timing,
    }
}

pub fn induce_classification(
    ds: &DataSet,
    params: &InductionParams,
    knowledge: Option<&ExpertKnowledge>,
) -> Result<RuleSet, InductionError> {
    let start = Instant::now();
    expect_task(ds, Task::Classification)?;
    check_params(params, Task::Classification)?;
    let k = constraints(ds, knowledge)?;
    let label = ds.label_index().ok_or(DataError::NoTask)?;
    let levels = ds.attribute(label).levels().map_or(0, <[String]>::len);
    let mut covering = Covering::new(ds, params, &k);
    let mut counts = vec![0usize; levels];
    for (level, count) in counts.iter_mut().enumerate() {
        let positives = ds.class_mask(level).ok_or(DataError::NoTask)?;
        *count = positives.count();
        if *count == 0 {
            continue;
        }
        let uncovered = positives.clone();
        let target = Target::Class { level, positives };
        covering.run(&target, uncovered, |c| c.is_none_or(|c| c == level));
    }
    let majority = (0..levels).fold(0, |best, l| if counts[l] > counts[best] { l } else { best });
    Ok(finish(ds, Task::Classification, params, covering, DefaultResponse::Class(majority), start))
}

pub fn induce_regression(
    ds: &DataSet,
    params: &InductionParams,
    knowledge: Option<&ExpertKnowledge>,
) -> Result<RuleSet, InductionError> {
    let start = Instant::now();
    expect_task(ds, Task::Regression)?;
    check_params(params, Task::Regression)?;
    let k = constraints(ds, knowledge)?;
    let labels = ds.labels().ok_or(DataError::NoTask)?;
    let known = CoverageMask::from_fn(ds.len(), |r| !labels[r].is_nan());
    let mean = {
        let ys: Vec<f64> = known.iter_ones().map(|r| labels[r]).collect();
        if ys.is_empty() {
            0.0
        } else {
            ys.iter().sum::<f64>() / ys.len() as f64
        }
    };
    let mut covering = Covering::new(ds, params, &k);
    let uncovered = known.clone();
    let target = Target::Regression { labels, known };
    covering.run(&target, uncovered, |_| true);
    Ok(finish(ds, Task::Regression, params, covering, DefaultResponse::Value(mean), start))
}

pub fn induce_survival(
    ds: &DataSet,
    params: &InductionParams,
    knowledge: Option<&ExpertKnowledge>,
) -> Result<RuleSet, InductionError> {
    let start = Instant::now();
    expect_task(ds, Task::Survival)?;
    check_params(params, Task::Survival)?;
    let k = constraints(ds, knowledge)?;
    let times = ds.survival_times().ok_or(DataError::NoTask)?;
    let events = ds.survival_events().ok_or(DataError::NoTask)?;
    let scorer = LogRankScorer::new(times, &events)?;
    let estimate = kaplan_meier(times, &events)?;
    let flipped: Vec<u8> = events.iter().map(|&e| 1 - e).collect();
    let censoring = kaplan_meier(times, &flipped)?;
    let mut covering = Covering::new(ds, params, &k);
    let target = Target::Survival { scorer, times };
    covering.run(&target, CoverageMask::full(ds.len()), |_| true);
    Ok(finish(
        ds,
        Task::Survival,
        params,
        covering,
        DefaultResponse::Survival { estimate, censoring },
        start,
    ))
}

/// Dispatches on the dataset task.
pub fn induce(
    ds: &DataSet,
    params: &InductionParams,
    knowledge: Option<&ExpertKnowledge>,
) -> Result<RuleSet, InductionError> {
    match ds.task().ok_or(DataError::NoTask)? {
        Task::Classification => induce_classification(ds, params, knowledge),
        Task::Regression => induce_regression(ds, params, knowledge),
        Task::Survival => induce_survival(ds, params, knowledge),
    }
}

/// A single classification rule as grown and pruned by the covering loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTrace {
    /// Premise at the end of growing.
    pub grown: Vec<Condition>,
    /// Induction measure value of the empty premise, then after each step.
    pub growth_scores: Vec<f64>,
    /// Premise after pruning; equal to `grown` when pruning is disabled.
    pub pruned: Vec<Condition>,
    /// Pruning measure value before and after pruning.
    pub pruning_scores: (f64, f64),
}

/// Grows and prunes one unguided rule for class `level`, exactly as the first
/// rule of that class would be, given the positives still `uncovered`
/// (all of them when `None`). `None` when no rule reaches `min_rule_covered`.
pub fn trace_rule(
    ds: &DataSet,
    level: usize,
    params: &InductionParams,
    uncovered: Option<&CoverageMask>,
) -> Result<Option<RuleTrace>, InductionError> {
    expect_task(ds, Task::Classification)?;
    check_params(params, Task::Classification)?;
    let positives = ds.class_mask(level).ok_or(DataError::NoTask)?;
    let uncovered = uncovered.cloned().unwrap_or_else(|| positives.clone());
    let target = Target::Class { level, positives };
    let knowledge = KnowledgeConstraints::unguided();
    let budget = KnowledgeBudget::new(&knowledge);
    let grower = Grower {
        ds,
        target: &target,
        params,
        knowledge: &knowledge,
        budget: &budget,
    };
    let Some(mut draft) = grower.grow(&[], &uncovered, false) else {
        return Ok(None);
    };
    let grown = draft.premise.clone();
    let growth_scores = std::mem::take(&mut draft.scores);
    let before = target.evaluate(&params.pruning_measure, &draft.covered).score;
    if params.pruning_enabled {
        grower.prune(&mut draft);
    }
    let after = target.evaluate(&params.pruning_measure, &draft.covered).score;
    Ok(Some(RuleTrace {
        grown,
        growth_scores,
        pruned: draft.premise,
        pruning_scores: (before, after),
    }))
}

/// Measures a survival run actually uses, for reporting.
pub fn effective_measures(task: Task, params: &InductionParams) -> [Measure; 3] {
    if task == Task::Survival {
        [Measure::LogRank, Measure::LogRank, Measure::LogRank]
    } else {
        [
            params.induction_measure.clone(),
            params.pruning_measure.clone(),
            params.voting_measure.clone(),
        ]
    }
}
