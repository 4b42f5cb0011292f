//! Rule quality measures over contingency counts.
//!
//! Every measure is a function of the quad `(p, n, P, N)`: positives and
//! negatives covered by a rule, and positives and negatives in the whole
//! training set. Divisions are totalized so that no measure ever fails during
//! a greedy search: `x / 0` is the largest finite value for `x > 0`, its
//! negation for `x < 0`, and `0 / 0` is `0`.
//!
//! | name | formula (`prec = p/(p+n)`) |
//! |------|----------------------------|
//! | Precision | `prec` |
//! | Coverage | `p/P` |
//! | Laplace | `(p+1)/(p+n+2)` |
//! | Lift | `p(P+N)/((p+n)P)` |
//! | Correlation | `(pN - nP)/sqrt(PN(p+n)(P+N-p-n))` |
//! | RSS | `p/P - n/N` |
//! | GeoRSS | `sqrt(p/P * (1 - n/N))` |
//! | C2 | `((P+N)/N * prec - P/N) * (1 + p/P)/2` |
//! | CN2Significance | `2(p ln(p/e_p) + n ln(n/e_n))`, `e_p = (p+n)P/(P+N)`, `e_n = (p+n)N/(P+N)` |
//! | BinaryEntropy | `1 + prec log2(prec) + (1-prec) log2(1-prec)` |
//! | Accuracy | `p - n` |
//! | FullCoverage | `(p+n)/(P+N)` |
//! | OddsRatio | `p(N-n)/(n(P-p))` |
//! | Kappa | `((P+N) prec - P)/((P+N)/2 (1 + prec) - P)` |
//! | WeightedRelativeAccuracy | `(p+n)/(P+N) * (prec - P/(P+N))` |
//! | LogRank | log-rank statistic of covered vs uncovered examples (survival only) |
//!
//! `BinaryEntropy` is the purity form `1 - H(prec)`, so it rewards rules that
//! are pure in either direction.

mod expr;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use expr::{parse_measure_expression, BinaryOp, ExprError, ExprErrorKind, MeasureExpr, Variable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid contingency counts: {0}")]
    InvalidQuad(String),
    #[error("unknown quality measure '{0}'")]
    UnknownMeasure(String),
    #[error("UserDefined measure requires an equation")]
    MissingEquation,
    #[error("invalid measure expression: {0}")]
    Expression(#[from] ExprError),
}

/// Covered positives/negatives and dataset totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContingencyQuad {
    pub p: f64,
    pub n: f64,
    pub total_p: f64,
    pub total_n: f64,
}

impl ContingencyQuad {
    pub fn new(p: f64, n: f64, total_p: f64, total_n: f64) -> Result<Self, MeasureError> {
        let q = ContingencyQuad { p, n, total_p, total_n };
        let finite = [p, n, total_p, total_n].iter().all(|v| v.is_finite());
        if !finite || p < 0.0 || n < 0.0 || p > total_p || n > total_n || total_p <= 0.0 {
            return Err(MeasureError::InvalidQuad(format!(
                "p={p}, n={n}, P={total_p}, N={total_n}"
            )));
        }
        Ok(q)
    }

    /// Builds a quad without validation. Degenerate totals (e.g. `P = 0`) are
    /// still handled by the totalized division rule.
    pub fn unchecked(p: f64, n: f64, total_p: f64, total_n: f64) -> Self {
        ContingencyQuad { p, n, total_p, total_n }
    }

    pub fn covered(&self) -> f64 {
        self.p + self.n
    }

    pub fn total(&self) -> f64 {
        self.total_p + self.total_n
    }

    pub fn precision(&self) -> f64 {
        totalized_div(self.p, self.p + self.n)
    }
}

/// Division with `x/0 = ±f64::MAX` for `x ≠ 0` and `0/0 = 0`.
#[inline]
pub fn totalized_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num > 0.0 {
            f64::MAX
        } else if num < 0.0 {
            -f64::MAX
        } else {
            0.0
        }
    } else {
        num / den
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

type MeasureFn = dyn Fn(&ContingencyQuad) -> f64 + Send + Sync;

/// A measure registered at runtime under its own name.
#[derive(Clone)]
pub struct CustomMeasure {
    name: String,
    func: Arc<MeasureFn>,
}

impl CustomMeasure {
    pub fn new(name: impl Into<String>, func: impl Fn(&ContingencyQuad) -> f64 + Send + Sync + 'static) -> Self {
        CustomMeasure {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMeasure").field("name", &self.name).finish()
    }
}

impl PartialEq for CustomMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Precision,
    Coverage,
    Laplace,
    Lift,
    Correlation,
    Rss,
    GeoRss,
    C2,
    Cn2Significance,
    BinaryEntropy,
    Accuracy,
    FullCoverage,
    OddsRatio,
    Kappa,
    WeightedRelativeAccuracy,
    LogRank,
    UserDefined(MeasureExpr),
    Custom(CustomMeasure),
}

const NAMED: [(&str, Measure); 16] = [
    ("Precision", Measure::Precision),
    ("Coverage", Measure::Coverage),
    ("Laplace", Measure::Laplace),
    ("Lift", Measure::Lift),
    ("Correlation", Measure::Correlation),
    ("RSS", Measure::Rss),
    ("GeoRSS", Measure::GeoRss),
    ("C2", Measure::C2),
    ("CN2Significance", Measure::Cn2Significance),
    ("BinaryEntropy", Measure::BinaryEntropy),
    ("Accuracy", Measure::Accuracy),
    ("FullCoverage", Measure::FullCoverage),
    ("OddsRatio", Measure::OddsRatio),
    ("Kappa", Measure::Kappa),
    ("WeightedRelativeAccuracy", Measure::WeightedRelativeAccuracy),
    ("LogRank", Measure::LogRank),
];

impl Measure {
    /// Built-in measure by its case-sensitive registry name.
    pub fn from_name(name: &str) -> Result<Measure, MeasureError> {
        if name == "UserDefined" {
            return Err(MeasureError::MissingEquation);
        }
        NAMED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| MeasureError::UnknownMeasure(name.to_string()))
    }

    pub fn user_defined(equation: &str) -> Result<Measure, MeasureError> {
        Ok(Measure::UserDefined(parse_measure_expression(equation)?))
    }

    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        NAMED.iter().map(|(n, _)| *n)
    }

    pub fn name(&self) -> &str {
        match self {
            Measure::UserDefined(_) => "UserDefined",
            Measure::Custom(c) => c.name(),
            other => NAMED
                .iter()
                .find(|(_, m)| m == other)
                .map(|(n, _)| *n)
                .unwrap_or("Unknown"),
        }
    }

    /// Only meaningful on survival data, where it is computed from the
    /// survival times of covered and uncovered examples rather than a quad.
    pub fn is_survival_only(&self) -> bool {
        matches!(self, Measure::LogRank)
    }

    /// Value of the measure on `q`. `LogRank` cannot be computed from a quad
    /// and yields 0 here.
    pub fn evaluate(&self, q: &ContingencyQuad) -> f64 {
        let ContingencyQuad { p, n, total_p: big_p, total_n: big_n } = *q;
        let div = totalized_div;
        let prec = q.precision();
        let total = big_p + big_n;
        match self {
            Measure::Precision => prec,
            Measure::Coverage => div(p, big_p),
            Measure::Laplace => (p + 1.0) / (p + n + 2.0),
            Measure::Lift => div(p * total, (p + n) * big_p),
            Measure::Correlation => div(
                p * big_n - n * big_p,
                (big_p * big_n * (p + n) * (total - p - n)).max(0.0).sqrt(),
            ),
            Measure::Rss => div(p, big_p) - div(n, big_n),
            Measure::GeoRss => (div(p, big_p) * (1.0 - div(n, big_n))).max(0.0).sqrt(),
            Measure::C2 => div(total * prec - big_p, big_n) * (1.0 + div(p, big_p)) / 2.0,
            Measure::Cn2Significance => {
                let e_p = div((p + n) * big_p, total);
                let e_n = div((p + n) * big_n, total);
                2.0 * (xlogy(p, div(p, e_p)) + xlogy(n, div(n, e_n)))
            }
            Measure::BinaryEntropy => {
                let plogp = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
                1.0 + plogp(prec) + plogp(1.0 - prec)
            }
            Measure::Accuracy => p - n,
            Measure::FullCoverage => div(p + n, total),
            Measure::OddsRatio => div(p * (big_n - n), n * (big_p - p)),
            Measure::Kappa => div(total * prec - big_p, total / 2.0 * (1.0 + prec) - big_p),
            Measure::WeightedRelativeAccuracy => div(p + n, total) * (prec - div(big_p, total)),
            Measure::LogRank => 0.0,
            Measure::UserDefined(e) => e.evaluate(q),
            Measure::Custom(c) => (c.func)(q),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn evaluate(m: &Measure, q: &ContingencyQuad) -> f64 {
    m.evaluate(q)
}

/// Name lookup over the built-in measures plus runtime registrations.
#[derive(Debug, Clone, Default)]
pub struct MeasureRegistry {
    custom: BTreeMap<String, CustomMeasure>,
}

impl MeasureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a measure; built-in names cannot be shadowed.
    pub fn register(
        &mut self,
        name: &str,
        func: impl Fn(&ContingencyQuad) -> f64 + Send + Sync + 'static,
    ) -> Result<(), MeasureError> {
        if name == "UserDefined" || Measure::builtin_names().any(|n| n == name) {
            return Err(MeasureError::UnknownMeasure(format!("{name} is a built-in name")));
        }
        self.custom.insert(name.to_string(), CustomMeasure::new(name, func));
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<Measure, MeasureError> {
        match Measure::from_name(name) {
            Err(MeasureError::UnknownMeasure(_)) => self
                .custom
                .get(name)
                .cloned()
                .map(Measure::Custom)
                .ok_or_else(|| MeasureError::UnknownMeasure(name.to_string())),
            other => other,
        }
    }
}
