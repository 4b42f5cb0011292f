use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;

use crate::data::CoverageMask;
use crate::data::DataSet;
use crate::knowledge::{GrowthStage, KnowledgeBudget, KnowledgeConstraints, Preferred};
use crate::measures::{ContingencyQuad, Measure};
use crate::stats::{chi_square_2x2, fisher_exact_greater, LogRankScorer};

use super::candidates::{attribute_candidates, candidate_conditions};
use super::condition::Condition;
use super::rule::{premise_coverage, Consequence, InductionParams, Rule};

/// What a rule is trying to explain.
pub(crate) enum Target<'a> {
    Class { level: usize, positives: CoverageMask },
    /// Positives are relabeled per premise around the covered median.
    Regression { labels: &'a [f64], known: CoverageMask },
    Survival { scorer: LogRankScorer, times: &'a [f64] },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Evaluation {
    pub score: f64,
    pub quad: ContingencyQuad,
}

fn median_and_spread(labels: &[f64], covered: &CoverageMask, known: &CoverageMask) -> Option<(f64, f64)> {
    let mut ys: Vec<f64> = covered.iter_ones().filter(|&r| known.get(r)).map(|r| labels[r]).collect();
    if ys.is_empty() {
        return None;
    }
    ys.sort_by(f64::total_cmp);
    let k = ys.len();
    let median = if k % 2 == 1 { ys[k / 2] } else { (ys[k / 2 - 1] + ys[k / 2]) / 2.0 };
    let mean = ys.iter().sum::<f64>() / k as f64;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / k as f64;
    Some((median, var.sqrt()))
}

impl Target<'_> {
    pub fn quad(&self, covered: &CoverageMask) -> ContingencyQuad {
        let n_all = covered.len() as f64;
        match self {
            Target::Class { positives, .. } => {
                let p = covered.weighted_count(positives).unwrap_or(0) as f64;
                let total_p = positives.count() as f64;
                ContingencyQuad::unchecked(p, covered.count() as f64 - p, total_p, n_all - total_p)
            }
            Target::Regression { labels, known } => {
                let Some((v, s)) = median_and_spread(labels, covered, known) else {
                    return ContingencyQuad::unchecked(0.0, covered.count() as f64, 0.0, n_all);
                };
                let positives = CoverageMask::from_fn(covered.len(), |r| known.get(r) && (labels[r] - v).abs() <= s);
                let p = covered.weighted_count(&positives).unwrap_or(0) as f64;
                let total_p = positives.count() as f64;
                ContingencyQuad::unchecked(p, covered.count() as f64 - p, total_p, n_all - total_p)
            }
            Target::Survival { .. } => ContingencyQuad::unchecked(covered.count() as f64, 0.0, n_all, 0.0),
        }
    }

    pub fn evaluate(&self, measure: &Measure, covered: &CoverageMask) -> Evaluation {
        let quad = self.quad(covered);
        let score = match self {
            Target::Survival { scorer, .. } => scorer.test(covered).statistic,
            _ => measure.evaluate(&quad),
        };
        Evaluation { score, quad }
    }

    pub fn finalize(
        &self,
        premise: Vec<Condition>,
        covered: &CoverageMask,
        grown: usize,
        voting: &Measure,
    ) -> Rule {
        let quad = self.quad(covered);
        let (consequence, weight, p_value) = match self {
            Target::Class { level, .. } => {
                let p = fisher_exact_greater(&quad).map(|t| t.p_value).unwrap_or(1.0);
                (Consequence::Class(*level), voting.evaluate(&quad), p)
            }
            Target::Regression { labels, known } => {
                let (value, spread) = median_and_spread(labels, covered, known).unwrap_or((f64::NAN, 0.0));
                (
                    Consequence::Value { value, spread },
                    voting.evaluate(&quad),
                    chi_square_2x2(&quad).p_value,
                )
            }
            Target::Survival { scorer, times } => (
                Consequence::Survival(scorer.kaplan_meier(times, covered)),
                1.0,
                scorer.test(covered).p_value,
            ),
        };
        Rule {
            premise,
            consequence,
            stats: quad,
            weight,
            p_value,
            grown_condition_count: grown,
        }
    }
}

/// Where a premise condition came from; decides prunability and budget use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Origin {
    Seed,
    PreferredCondition(usize),
    PreferredAttribute(usize),
    Automatic,
}

#[derive(Debug, Clone)]
pub(crate) struct Draft {
    pub premise: Vec<Condition>,
    pub origins: Vec<Origin>,
    pub covered: CoverageMask,
    pub grown: usize,
    /// Induction measure value before growing and after each step.
    pub scores: Vec<f64>,
}

impl Draft {
    pub fn charge(&self, budget: &mut KnowledgeBudget) {
        for o in &self.origins {
            match *o {
                Origin::PreferredCondition(i) => budget.condition_uses[i] += 1,
                Origin::PreferredAttribute(i) => budget.attribute_uses[i] += 1,
                _ => {}
            }
        }
    }
}

pub(crate) struct Grower<'a> {
    pub ds: &'a DataSet,
    pub target: &'a Target<'a>,
    pub params: &'a InductionParams,
    pub knowledge: &'a KnowledgeConstraints,
    pub budget: &'a KnowledgeBudget,
}

struct Scored {
    eval: Evaluation,
    cond: Condition,
    origin: Origin,
    covered: CoverageMask,
    position: usize,
}

/// Total order used to pick among candidates: higher score, then larger p,
/// then earlier attribute, then `less_than` before `at_least`, then
/// generation order. NaN scores rank lowest.
fn better(a: &Scored, b: &Scored) -> Ordering {
    let score = |s: &Scored| if s.eval.score.is_nan() { f64::NEG_INFINITY } else { s.eval.score };
    score(a)
        .total_cmp(&score(b))
        .then(a.eval.quad.p.total_cmp(&b.eval.quad.p))
        .then(b.cond.attribute.cmp(&a.cond.attribute))
        .then(b.cond.relation.rank().cmp(&a.cond.relation.rank()))
        .then(b.position.cmp(&a.position))
}

impl Grower<'_> {
    /// Number of examples in `covered` not yet explained.
    fn fresh(covered: &CoverageMask, uncovered: &CoverageMask) -> f64 {
        covered.weighted_count(uncovered).unwrap_or(0) as f64
    }

    /// Grows from `seed`; `None` when the seed covers too few fresh targets.
    pub fn grow(&self, seed: &[Condition], uncovered: &CoverageMask, seeded: bool) -> Option<Draft> {
        let mincov = self.params.min_rule_covered;
        let covered = premise_coverage(seed, self.ds);
        if Self::fresh(&covered, uncovered) < mincov {
            return None;
        }
        let mut draft = Draft {
            premise: seed.to_vec(),
            origins: vec![Origin::Seed; seed.len()],
            covered,
            grown: 0,
            scores: Vec::new(),
        };
        let measure = &self.params.induction_measure;
        let mut current = self.target.evaluate(measure, &draft.covered).score;
        draft.scores.push(current);
        let stages = crate::knowledge::staged_growing_order(self.knowledge, seeded);
        let mut steps = 0usize;
        loop {
            if self.params.max_growing_conditions.is_some_and(|m| steps >= m) {
                break;
            }
            let mut chosen = None;
            for stage in &stages {
                let candidates = self.stage_candidates(*stage, &draft);
                if candidates.is_empty() {
                    continue;
                }
                let best = candidates
                    .into_par_iter()
                    .enumerate()
                    .filter_map(|(position, (cond, origin))| {
                        let covered = self.refined_coverage(&draft, &cond);
                        if Self::fresh(&covered, uncovered) < mincov {
                            return None;
                        }
                        let eval = self.target.evaluate(measure, &covered);
                        Some(Scored {
                            eval,
                            cond,
                            origin,
                            covered,
                            position,
                        })
                    })
                    .reduce_with(|a, b| if better(&a, &b) == Ordering::Less { b } else { a });
                if let Some(best) = best.filter(|b| b.eval.score > current) {
                    chosen = Some(best);
                    break;
                }
            }
            let Some(best) = chosen else { break };
            current = best.eval.score;
            draft.scores.push(current);
            match draft.premise.iter().position(|c| c.same_slot(&best.cond)) {
                Some(i) => {
                    draft.premise[i] = best.cond;
                    draft.origins[i] = best.origin;
                }
                None => {
                    draft.premise.push(best.cond);
                    draft.origins.push(best.origin);
                }
            }
            draft.covered = best.covered;
            steps += 1;
        }
        draft.grown = draft.premise.len();
        Some(draft)
    }

    fn refined_coverage(&self, draft: &Draft, cond: &Condition) -> CoverageMask {
        if draft.premise.iter().any(|c| c.same_slot(cond)) {
            let premise: Vec<Condition> = draft
                .premise
                .iter()
                .map(|c| if c.same_slot(cond) { *cond } else { *c })
                .collect();
            premise_coverage(&premise, self.ds)
        } else {
            let column = self.ds.column(cond.attribute);
            let n = draft.covered.len();
            CoverageMask::from_indices(
                n,
                draft.covered.iter_ones().filter(|&r| {
                    let v = column[r];
                    cond.relation.holds((!v.is_nan()).then_some(v))
                }),
            )
        }
    }

    fn admissible(&self, draft: &Draft, c: &Condition) -> bool {
        !self.knowledge.is_forbidden(c)
            && !draft
                .premise
                .iter()
                .zip(&draft.origins)
                .any(|(p, o)| p == c || (*o == Origin::Seed && p.same_slot(c)))
    }

    fn in_use(draft: &Draft, origin: Origin) -> u32 {
        draft.origins.iter().filter(|&&o| o == origin).count() as u32
    }

    fn stage_candidates(&self, stage: GrowthStage, draft: &Draft) -> Vec<(Condition, Origin)> {
        let k = self.knowledge;
        let mut out = Vec::new();
        match stage {
            GrowthStage::FixedSeed => {}
            GrowthStage::PreferredConditions => {
                for (i, (pref, mult)) in k.preferred_conditions.iter().enumerate() {
                    let origin = Origin::PreferredCondition(i);
                    if !mult.allows(self.budget.condition_uses[i] + Self::in_use(draft, origin)) {
                        continue;
                    }
                    match pref {
                        Preferred::Exact(c) => out.push((*c, origin)),
                        Preferred::Wildcard { attribute, .. } => out.extend(
                            attribute_candidates(self.ds, *attribute, &draft.covered)
                                .into_iter()
                                .filter(|c| pref.matches(c))
                                .map(|c| (c, origin)),
                        ),
                    }
                }
            }
            GrowthStage::PreferredAttributes => {
                for (i, (a, mult)) in k.preferred_attributes.iter().enumerate() {
                    let origin = Origin::PreferredAttribute(i);
                    if !mult.allows(self.budget.attribute_uses[i] + Self::in_use(draft, origin)) {
                        continue;
                    }
                    out.extend(
                        attribute_candidates(self.ds, *a, &draft.covered)
                            .into_iter()
                            .map(|c| (c, origin)),
                    );
                }
            }
            GrowthStage::Automatic => {
                out.extend(
                    candidate_conditions(self.ds, &draft.covered, &HashSet::new())
                        .into_iter()
                        .map(|c| (c, Origin::Automatic)),
                );
            }
        }
        out.retain(|(c, _)| self.admissible(draft, c));
        out
    }

    /// Greedy deletion while the pruning measure does not decrease. Seed
    /// conditions stay; at least one condition remains.
    pub fn prune(&self, draft: &mut Draft) {
        let measure = &self.params.pruning_measure;
        let mut current = self.target.evaluate(measure, &draft.covered).score;
        while draft.premise.len() > 1 {
            let mut best: Option<(usize, f64, CoverageMask)> = None;
            for i in 0..draft.premise.len() {
                if draft.origins[i] == Origin::Seed {
                    continue;
                }
                let rest: Vec<Condition> = draft
                    .premise
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, c)| *c)
                    .collect();
                let covered = premise_coverage(&rest, self.ds);
                let score = self.target.evaluate(measure, &covered).score;
                if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                    best = Some((i, score, covered));
                }
            }
            match best {
                Some((i, score, covered)) if score >= current => {
                    draft.premise.remove(i);
                    draft.origins.remove(i);
                    draft.covered = covered;
                    current = score;
                }
                _ => break,
            }
        }
    }
}
