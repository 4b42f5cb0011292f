use std::cmp::Ordering;

use super::{chi_square_upper_tail, StatsError, TestResult};
use crate::data::CoverageMask;

/// Right-continuous step function with S(0) = 1. Each point is a time at
/// which the curve drops, paired with the value from that time on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SurvivalEstimate {
    points: Vec<(f64, f64)>,
}

impl SurvivalEstimate {
    pub fn constant_one() -> Self {
        SurvivalEstimate { points: Vec::new() }
    }

    /// Validates strictly increasing times and non-increasing probabilities in [0, 1].
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self, StatsError> {
        let mut prev_t = f64::NEG_INFINITY;
        let mut prev_s = 1.0;
        for &(t, s) in &points {
            if !t.is_finite() || t < 0.0 || t <= prev_t {
                return Err(StatsError::InvalidSurvival(format!("time {t} is not strictly increasing")));
            }
            if !(0.0..=1.0).contains(&s) || s > prev_s {
                return Err(StatsError::InvalidSurvival(format!("probability {s} at time {t}")));
            }
            prev_t = t;
            prev_s = s;
        }
        Ok(SurvivalEstimate { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// S(t).
    pub fn at(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(pt, _)| pt <= t);
        if idx == 0 {
            1.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// S just before t.
    pub fn before(&self, t: f64) -> f64 {
        let idx = self.points.partition_point(|&(pt, _)| pt < t);
        if idx == 0 {
            1.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Pointwise arithmetic mean on the union of the curves' jump times.
    pub fn mean<'a>(curves: impl IntoIterator<Item = &'a SurvivalEstimate>) -> SurvivalEstimate {
        let curves: Vec<&SurvivalEstimate> = curves.into_iter().collect();
        if curves.is_empty() {
            return Self::constant_one();
        }
        let grid = union_grid(curves.iter().copied());
        let k = curves.len() as f64;
        let mut points = Vec::with_capacity(grid.len());
        let mut last = 1.0;
        for t in grid {
            let s = curves.iter().map(|c| c.at(t)).sum::<f64>() / k;
            // rounding in the sum must not make the mean increase
            let s = s.min(last).clamp(0.0, 1.0);
            points.push((t, s));
            last = s;
        }
        SurvivalEstimate { points }
    }
}

/// Sorted, deduplicated jump times of all curves.
pub fn union_grid<'a>(curves: impl IntoIterator<Item = &'a SurvivalEstimate>) -> Vec<f64> {
    let mut grid: Vec<f64> = curves.into_iter().flat_map(|c| c.times()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn validate(times: &[f64], events: &[u8]) -> Result<(), StatsError> {
    if times.len() != events.len() {
        return Err(StatsError::LengthMismatch(times.len(), events.len()));
    }
    if times.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(StatsError::InvalidSurvival(format!("time {t}")));
    }
    if let Some(e) = events.iter().find(|&&e| e > 1) {
        return Err(StatsError::InvalidSurvival(format!("event flag {e}")));
    }
    Ok(())
}

/// Product-limit estimator. At equal times events are counted before
/// censorings leave the risk set.
pub fn kaplan_meier(times: &[f64], events: &[u8]) -> Result<SurvivalEstimate, StatsError> {
    validate(times, events)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    Ok(km_sorted(order.iter().map(|&i| (times[i], events[i]))))
}

pub(crate) fn km_sorted(sorted: impl Iterator<Item = (f64, u8)> + Clone) -> SurvivalEstimate {
    let mut at_risk = sorted.clone().count() as f64;
    let mut s = 1.0;
    let mut points = Vec::new();
    let mut iter = sorted.peekable();
    while let Some((t, e)) = iter.next() {
        let mut deaths = e as f64;
        let mut leaving = 1.0;
        while let Some(&(t2, e2)) = iter.peek() {
            if t2 != t {
                break;
            }
            deaths += e2 as f64;
            leaving += 1.0;
            iter.next();
        }
        if deaths > 0.0 {
            s *= 1.0 - deaths / at_risk;
            points.push((t, s.max(0.0)));
        }
        at_risk -= leaving;
    }
    SurvivalEstimate { points }
}

/// Accumulates observed-minus-expected and variance over time groups given in
/// ascending order as `(events_a, events_b, leaving_a, leaving_b)`.
fn log_rank_sweep(groups: impl Iterator<Item = (f64, f64, f64, f64)>, mut at_risk_a: f64, mut at_risk_b: f64) -> TestResult {
    let mut o_minus_e = 0.0;
    let mut variance = 0.0;
    for (d_a, d_b, c_a, c_b) in groups {
        let d = d_a + d_b;
        let n = at_risk_a + at_risk_b;
        if d > 0.0 && n > 0.0 {
            o_minus_e += (d_a * at_risk_b - d_b * at_risk_a) / n;
            if n > 1.0 {
                variance += d * at_risk_a * at_risk_b * (n - d) / (n * n * (n - 1.0));
            }
        }
        at_risk_a -= c_a;
        at_risk_b -= c_b;
    }
    if variance <= 0.0 {
        return TestResult::degenerate();
    }
    let statistic = o_minus_e * o_minus_e / variance;
    TestResult::new(statistic, chi_square_upper_tail(statistic))
}

/// Two-group log-rank test with a chi-square(1) p-value.
pub fn log_rank(times_a: &[f64], events_a: &[u8], times_b: &[f64], events_b: &[u8]) -> Result<TestResult, StatsError> {
    validate(times_a, events_a)?;
    validate(times_b, events_b)?;
    let mut pooled: Vec<(f64, u8, bool)> = times_a
        .iter()
        .zip(events_a)
        .map(|(&t, &e)| (t, e, true))
        .chain(times_b.iter().zip(events_b).map(|(&t, &e)| (t, e, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let groups = time_groups(&pooled);
    Ok(log_rank_sweep(groups.into_iter(), times_a.len() as f64, times_b.len() as f64))
}

fn time_groups(sorted: &[(f64, u8, bool)]) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        let mut g = (0.0, 0.0, 0.0, 0.0);
        while i < sorted.len() && sorted[i].0 == t {
            let (_, e, in_a) = sorted[i];
            if in_a {
                g.0 += e as f64;
                g.2 += 1.0;
            } else {
                g.1 += e as f64;
                g.3 += 1.0;
            }
            i += 1;
        }
        out.push(g);
    }
    out
}

/// Log-rank of covered versus uncovered examples for many masks over one
/// fixed sample; the time ordering is computed once.
#[derive(Debug, Clone)]
pub struct LogRankScorer {
    /// example indices grouped by equal time, ascending
    groups: Vec<Vec<usize>>,
    events: Vec<u8>,
}

impl LogRankScorer {
    pub fn new(times: &[f64], events: &[u8]) -> Result<Self, StatsError> {
        validate(times, events)?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap_or(Ordering::Equal));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NAN;
        for i in order {
            if times[i] == last {
                if let Some(g) = groups.last_mut() {
                    g.push(i);
                }
            } else {
                groups.push(vec![i]);
                last = times[i];
            }
        }
        Ok(LogRankScorer {
            groups,
            events: events.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Covered (group A) versus the rest; an empty group gives (0, 1).
    pub fn test(&self, covered: &CoverageMask) -> TestResult {
        let n_a = covered.count() as f64;
        let n_b = self.len() as f64 - n_a;
        if n_a == 0.0 || n_b == 0.0 {
            return TestResult::degenerate();
        }
        let groups = self.groups.iter().map(|g| {
            let mut acc = (0.0, 0.0, 0.0, 0.0);
            for &i in g {
                let e = self.events[i] as f64;
                if covered.get(i) {
                    acc.0 += e;
                    acc.2 += 1.0;
                } else {
                    acc.1 += e;
                    acc.3 += 1.0;
                }
            }
            acc
        });
        log_rank_sweep(groups, n_a, n_b)
    }

    /// Kaplan-Meier of the examples in `subset`.
    pub fn kaplan_meier(&self, times: &[f64], subset: &CoverageMask) -> SurvivalEstimate {
        let sorted = self
            .groups
            .iter()
            .flatten()
            .filter(|&&i| subset.get(i))
            .map(|&i| (times[i], self.events[i]));
        km_sorted(sorted)
    }
}
