use std::fmt;

use crate::data::{Attribute, DataSet};
use crate::format::double_string;

/// Test applied to one attribute. Numeric intervals are half-open `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    Equals(usize),
    LessThan(f64),
    AtLeast(f64),
    InInterval(f64, f64),
}

/// Which side of an attribute a condition constrains. A premise holds at most
/// one condition per (attribute, direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Equal,
    Upper,
    Lower,
    Both,
}

impl Relation {
    pub fn direction(&self) -> Direction {
        match self {
            Relation::Equals(_) => Direction::Equal,
            Relation::LessThan(_) => Direction::Upper,
            Relation::AtLeast(_) => Direction::Lower,
            Relation::InInterval(..) => Direction::Both,
        }
    }

    /// Tie-break rank: `less_than` before `at_least`.
    pub(crate) fn rank(&self) -> u8 {
        match self {
            Relation::Equals(_) | Relation::LessThan(_) => 0,
            Relation::AtLeast(_) => 1,
            Relation::InInterval(..) => 2,
        }
    }

    /// Satisfied numeric set as `[lo, hi)`; `None` for nominal tests.
    pub fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            Relation::Equals(_) => None,
            Relation::LessThan(t) => Some((f64::NEG_INFINITY, t)),
            Relation::AtLeast(t) => Some((t, f64::INFINITY)),
            Relation::InInterval(lo, hi) => Some((lo, hi)),
        }
    }

    /// Missing values are never covered.
    #[inline]
    pub fn holds(&self, value: Option<f64>) -> bool {
        let Some(v) = value else { return false };
        match *self {
            Relation::Equals(level) => v == level as f64,
            Relation::LessThan(t) => v < t,
            Relation::AtLeast(t) => v >= t,
            Relation::InInterval(lo, hi) => v >= lo && v < hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    /// Index into the training schema.
    pub attribute: usize,
    pub relation: Relation,
}

impl Condition {
    pub fn new(attribute: usize, relation: Relation) -> Self {
        Condition { attribute, relation }
    }

    pub fn covers(&self, ds: &DataSet, row: usize) -> bool {
        self.relation.holds(ds.value(row, self.attribute))
    }

    pub fn same_slot(&self, other: &Condition) -> bool {
        self.attribute == other.attribute && self.relation.direction() == other.relation.direction()
    }

    /// Whether every example satisfying `self` satisfies `other`.
    pub fn is_subsumed_by(&self, other: &Condition) -> bool {
        if self.attribute != other.attribute {
            return false;
        }
        match (self.relation, other.relation) {
            (Relation::Equals(a), Relation::Equals(b)) => a == b,
            (a, b) => match (a.interval(), b.interval()) {
                (Some((lo, hi)), Some((flo, fhi))) => lo >= flo && hi <= fhi,
                _ => false,
            },
        }
    }

    pub fn display<'a>(&'a self, schema: &'a [Attribute]) -> ConditionDisplay<'a> {
        ConditionDisplay { cond: self, schema }
    }
}

pub struct ConditionDisplay<'a> {
    cond: &'a Condition,
    schema: &'a [Attribute],
}

impl fmt::Display for ConditionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let attr = &self.schema[self.cond.attribute];
        write!(f, "{} = ", attr.name)?;
        match self.cond.relation {
            Relation::Equals(level) => {
                let name = attr.levels().and_then(|l| l.get(level)).map_or("?", String::as_str);
                write!(f, "{{{name}}}")
            }
            Relation::LessThan(t) => write!(f, "(-inf, {})", double_string(t)),
            Relation::AtLeast(t) => write!(f, "<{}, inf)", double_string(t)),
            Relation::InInterval(lo, hi) => write!(f, "<{}, {})", double_string(lo), double_string(hi)),
        }
    }
}

/// Conjunction rendered as `c1 AND c2`; the empty premise is `TRUE`.
pub fn premise_string(premise: &[Condition], schema: &[Attribute]) -> String {
    if premise.is_empty() {
        return "TRUE".to_string();
    }
    premise
        .iter()
        .map(|c| c.display(schema).to_string())
        .collect::<Vec<_>>()
        .join(" AND ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<Attribute> {
        vec![Attribute::nominal("Gender", ["male", "female"]), Attribute::numeric("Age")]
    }

    #[test]
    fn renders_like_report() {
        let s = schema();
        let premise = [
            Condition::new(0, Relation::Equals(0)),
            Condition::new(1, Relation::LessThan(34.5)),
        ];
        assert_eq!(premise_string(&premise, &s), "Gender = {male} AND Age = (-inf, 34.5)");
        assert_eq!(Condition::new(1, Relation::AtLeast(30.0)).display(&s).to_string(), "Age = <30.0, inf)");
        assert_eq!(
            Condition::new(1, Relation::InInterval(1.0, 2.5)).display(&s).to_string(),
            "Age = <1.0, 2.5)"
        );
        assert_eq!(premise_string(&[], &s), "TRUE");
    }

    #[test]
    fn missing_never_holds() {
        assert!(!Relation::LessThan(1.0).holds(None));
        assert!(!Relation::AtLeast(f64::NEG_INFINITY).holds(None));
        assert!(Relation::AtLeast(1.0).holds(Some(1.0)));
        assert!(!Relation::LessThan(1.0).holds(Some(1.0)));
    }

    #[test]
    fn interval_subsumption() {
        let forbidden = Condition::new(1, Relation::AtLeast(30.0));
        assert!(Condition::new(1, Relation::AtLeast(35.0)).is_subsumed_by(&forbidden));
        assert!(!Condition::new(1, Relation::LessThan(20.0)).is_subsumed_by(&forbidden));
        assert!(Condition::new(1, Relation::InInterval(31.0, 40.0)).is_subsumed_by(&forbidden));
        assert!(!Condition::new(0, Relation::Equals(1)).is_subsumed_by(&Condition::new(0, Relation::Equals(0))));
    }
}
