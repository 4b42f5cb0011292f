//! User-guided induction: expert seed rules plus preferred and forbidden
//! conditions and attributes.
//!
//! Growing a rule under knowledge proceeds in stages:
//!
//! 1. the conditions of an expert seed rule are fixed and never pruned;
//! 2. at every step the preferred conditions with remaining budget are tried
//!    first;
//! 3. then conditions on preferred attributes with remaining budget;
//! 4. then, if `extend_with_automatic` is set (always for rules that do not
//!    start from a seed), the ordinary candidate space.
//!
//! Forbidden attributes and conditions are removed from every stage.
//! Multiplicities are budgets over the whole rule set, charged when a rule is
//! finalized for each preferred condition or preferred-attribute condition it
//! still contains after pruning. Once the seeds are exhausted, automatic rules
//! are induced only if `induce_automatic_rules` is set.

mod syntax;

use thiserror::Error;

pub use syntax::{parse_condition, parse_expert_rule, parse_premise, split_multiplicity};

use crate::data::{AttributeKind, DataSet, Role};
use crate::induction::{Condition, Direction, Relation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KnowledgeError {
    #[error("cannot parse '{input}': {message}")]
    Syntax { input: String, message: String },
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("attribute '{0}' cannot appear in conditions")]
    NotRegular(String),
    #[error("'{level}' is not a level of '{attribute}'")]
    UnknownLevel { attribute: String, level: String },
    #[error("condition on '{0}' does not match the attribute type")]
    KindMismatch(String),
    #[error("conflicting knowledge: {0}")]
    Conflict(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Exact(f64),
    /// Refined by the search.
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelationSpec {
    Equals(String),
    LessThan(Threshold),
    AtLeast(Threshold),
    InInterval(f64, f64),
}

/// A condition that refers to its attribute by name.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpec {
    pub attribute: String,
    pub relation: RelationSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertRule {
    pub premise: Vec<ConditionSpec>,
    /// Class level; `None` lets the class under induction apply.
    pub consequence: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Limited(u32),
    Unlimited,
}

impl Multiplicity {
    pub fn allows(self, used: u32) -> bool {
        match self {
            Multiplicity::Limited(n) => used < n,
            Multiplicity::Unlimited => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertKnowledge {
    pub initial_rules: Vec<ExpertRule>,
    pub preferred_conditions: Vec<(ConditionSpec, Multiplicity)>,
    pub preferred_attributes: Vec<(String, Multiplicity)>,
    pub forbidden_conditions: Vec<ConditionSpec>,
    pub forbidden_attributes: Vec<String>,
    pub extend_with_automatic: bool,
    pub induce_automatic_rules: bool,
}

impl Default for ExpertKnowledge {
    fn default() -> Self {
        ExpertKnowledge {
            initial_rules: Vec::new(),
            preferred_conditions: Vec::new(),
            preferred_attributes: Vec::new(),
            forbidden_conditions: Vec::new(),
            forbidden_attributes: Vec::new(),
            extend_with_automatic: true,
            induce_automatic_rules: true,
        }
    }
}

impl ExpertKnowledge {
    pub fn is_empty(&self) -> bool {
        self.initial_rules.is_empty()
            && self.preferred_conditions.is_empty()
            && self.preferred_attributes.is_empty()
            && self.forbidden_conditions.is_empty()
            && self.forbidden_attributes.is_empty()
    }

    /// Binds names to the dataset schema and checks consistency.
    pub fn resolve(&self, ds: &DataSet) -> Result<KnowledgeConstraints, KnowledgeError> {
        let attr = |name: &str| -> Result<usize, KnowledgeError> {
            let idx = ds
                .attribute_index(name)
                .ok_or_else(|| KnowledgeError::UnknownAttribute(name.to_string()))?;
            if ds.attribute(idx).role != Role::Regular {
                return Err(KnowledgeError::NotRegular(name.to_string()));
            }
            Ok(idx)
        };
        let exact = |spec: &ConditionSpec| -> Result<Condition, KnowledgeError> {
            match resolve_spec(spec, ds, attr(&spec.attribute)?)? {
                Preferred::Exact(c) => Ok(c),
                Preferred::Wildcard { .. } => Err(KnowledgeError::Syntax {
                    input: spec.attribute.clone(),
                    message: "wildcard thresholds are only allowed in preferred conditions".into(),
                }),
            }
        };

        let target_levels = ds.label_index().and_then(|i| ds.attribute(i).levels());
        let mut seeds = Vec::with_capacity(self.initial_rules.len());
        for rule in &self.initial_rules {
            let premise = rule.premise.iter().map(exact).collect::<Result<Vec<_>, _>>()?;
            for (i, a) in premise.iter().enumerate() {
                if premise[..i].iter().any(|b| a.same_slot(b)) {
                    return Err(KnowledgeError::Conflict(
                        "expert rule constrains the same attribute side twice".into(),
                    ));
                }
            }
            let class = match (&rule.consequence, target_levels) {
                (None, _) => None,
                (Some(level), Some(levels)) => Some(levels.iter().position(|l| l == level).ok_or_else(|| {
                    KnowledgeError::UnknownLevel {
                        attribute: ds.label_index().map(|i| ds.attribute(i).name.clone()).unwrap_or_default(),
                        level: level.clone(),
                    }
                })?),
                // regression and survival consequences are computed from data
                (Some(_), None) => None,
            };
            seeds.push(Seed { premise, class });
        }

        let forbidden_attributes = self
            .forbidden_attributes
            .iter()
            .map(|a| attr(a))
            .collect::<Result<Vec<_>, _>>()?;
        let forbidden_conditions = self.forbidden_conditions.iter().map(exact).collect::<Result<Vec<_>, _>>()?;
        let preferred_conditions = self
            .preferred_conditions
            .iter()
            .map(|(spec, m)| Ok((resolve_spec(spec, ds, attr(&spec.attribute)?)?, *m)))
            .collect::<Result<Vec<_>, KnowledgeError>>()?;
        let preferred_attributes = self
            .preferred_attributes
            .iter()
            .map(|(a, m)| Ok((attr(a)?, *m)))
            .collect::<Result<Vec<_>, KnowledgeError>>()?;

        let constraints = KnowledgeConstraints {
            seeds,
            preferred_conditions,
            preferred_attributes,
            forbidden_conditions,
            forbidden_attributes,
            extend_with_automatic: self.extend_with_automatic,
            induce_automatic_rules: self.induce_automatic_rules,
        };
        constraints.validate(ds)?;
        Ok(constraints)
    }
}

fn resolve_spec(spec: &ConditionSpec, ds: &DataSet, idx: usize) -> Result<Preferred, KnowledgeError> {
    let attribute = ds.attribute(idx);
    let kind_err = || KnowledgeError::KindMismatch(spec.attribute.clone());
    let exact = |relation| Ok(Preferred::Exact(Condition::new(idx, relation)));
    match (&spec.relation, &attribute.kind) {
        (RelationSpec::Equals(level), AttributeKind::Nominal(levels)) => {
            let l = levels
                .iter()
                .position(|x| x == level)
                .ok_or_else(|| KnowledgeError::UnknownLevel {
                    attribute: spec.attribute.clone(),
                    level: level.clone(),
                })?;
            exact(Relation::Equals(l))
        }
        (RelationSpec::Equals(_), AttributeKind::Numeric) => Err(kind_err()),
        (_, AttributeKind::Nominal(_)) => Err(kind_err()),
        (RelationSpec::LessThan(Threshold::Exact(t)), _) => exact(Relation::LessThan(*t)),
        (RelationSpec::AtLeast(Threshold::Exact(t)), _) => exact(Relation::AtLeast(*t)),
        (RelationSpec::InInterval(lo, hi), _) => exact(Relation::InInterval(*lo, *hi)),
        (RelationSpec::LessThan(Threshold::Any), _) => Ok(Preferred::Wildcard {
            attribute: idx,
            direction: Direction::Upper,
        }),
        (RelationSpec::AtLeast(Threshold::Any), _) => Ok(Preferred::Wildcard {
            attribute: idx,
            direction: Direction::Lower,
        }),
    }
}

/// Expert rule bound to the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub premise: Vec<Condition>,
    pub class: Option<usize>,
}

/// Preferred condition bound to the schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preferred {
    Exact(Condition),
    /// Any threshold on this attribute side, chosen by the search.
    Wildcard { attribute: usize, direction: Direction },
}

impl Preferred {
    pub fn matches(&self, c: &Condition) -> bool {
        match self {
            Preferred::Exact(p) => p == c,
            Preferred::Wildcard { attribute, direction } => {
                c.attribute == *attribute && c.relation.direction() == *direction
            }
        }
    }
}

/// Knowledge resolved against a schema; immutable during induction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeConstraints {
    pub seeds: Vec<Seed>,
    pub preferred_conditions: Vec<(Preferred, Multiplicity)>,
    pub preferred_attributes: Vec<(usize, Multiplicity)>,
    pub forbidden_conditions: Vec<Condition>,
    pub forbidden_attributes: Vec<usize>,
    pub extend_with_automatic: bool,
    pub induce_automatic_rules: bool,
}

impl KnowledgeConstraints {
    pub fn unguided() -> Self {
        KnowledgeConstraints {
            extend_with_automatic: true,
            induce_automatic_rules: true,
            ..Default::default()
        }
    }

    pub fn is_forbidden(&self, c: &Condition) -> bool {
        self.forbidden_attributes.contains(&c.attribute)
            || self.forbidden_conditions.iter().any(|f| c.is_subsumed_by(f))
    }

    fn validate(&self, ds: &DataSet) -> Result<(), KnowledgeError> {
        let name = |i: usize| ds.attribute(i).name.clone();
        for seed in &self.seeds {
            for c in &seed.premise {
                if self.is_forbidden(c) {
                    return Err(KnowledgeError::Conflict(format!(
                        "expert rule uses forbidden condition {}",
                        c.display(ds.attributes())
                    )));
                }
            }
        }
        for (p, _) in &self.preferred_conditions {
            let clash = match p {
                Preferred::Exact(c) => self.is_forbidden(c),
                Preferred::Wildcard { attribute, .. } => self.forbidden_attributes.contains(attribute),
            };
            if clash {
                return Err(KnowledgeError::Conflict("a preferred condition is also forbidden".into()));
            }
        }
        for (a, _) in &self.preferred_attributes {
            if self.forbidden_attributes.contains(a) {
                return Err(KnowledgeError::Conflict(format!(
                    "attribute '{}' is both preferred and forbidden",
                    name(*a)
                )));
            }
        }
        Ok(())
    }
}

/// Drops candidates on forbidden attributes and candidates subsumed by a
/// forbidden condition.
pub fn filter_candidates(candidates: &[Condition], k: &KnowledgeConstraints) -> Vec<Condition> {
    candidates.iter().filter(|c| !k.is_forbidden(c)).copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthStage {
    FixedSeed,
    PreferredConditions,
    PreferredAttributes,
    Automatic,
}

/// Stages tried at each growing step for a rule, in priority order.
pub fn staged_growing_order(k: &KnowledgeConstraints, seeded: bool) -> Vec<GrowthStage> {
    let mut stages = Vec::with_capacity(4);
    if seeded {
        stages.push(GrowthStage::FixedSeed);
    }
    if !k.preferred_conditions.is_empty() {
        stages.push(GrowthStage::PreferredConditions);
    }
    if !k.preferred_attributes.is_empty() {
        stages.push(GrowthStage::PreferredAttributes);
    }
    if !seeded || k.extend_with_automatic {
        stages.push(GrowthStage::Automatic);
    }
    stages
}

/// Rule-set-wide usage counters for preferred conditions and attributes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBudget {
    pub condition_uses: Vec<u32>,
    pub attribute_uses: Vec<u32>,
}

impl KnowledgeBudget {
    pub fn new(k: &KnowledgeConstraints) -> Self {
        KnowledgeBudget {
            condition_uses: vec![0; k.preferred_conditions.len()],
            attribute_uses: vec![0; k.preferred_attributes.len()],
        }
    }
}
