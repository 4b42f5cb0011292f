use std::collections::HashSet;

use crate::data::{AttributeKind, CoverageMask, DataSet};

use super::condition::{Condition, Relation};

/// Conditions that can refine a rule covering `covered`, in attribute order.
/// Nominal attributes contribute `equals` for each level seen among covered
/// examples; numeric ones `less_than(m)` then `at_least(m)` for every midpoint
/// between consecutive distinct covered values.
pub fn candidate_conditions(ds: &DataSet, covered: &CoverageMask, excluded: &HashSet<String>) -> Vec<Condition> {
    let mut out = Vec::new();
    for a in ds.regular_indices() {
        if excluded.contains(&ds.attribute(a).name) {
            continue;
        }
        out.extend(attribute_candidates(ds, a, covered));
    }
    out
}

pub(crate) fn attribute_candidates(ds: &DataSet, a: usize, covered: &CoverageMask) -> Vec<Condition> {
    let column = ds.column(a);
    match &ds.attribute(a).kind {
        AttributeKind::Nominal(levels) => {
            let mut seen = vec![false; levels.len()];
            for r in covered.iter_ones() {
                let v = column[r];
                if !v.is_nan() {
                    seen[v as usize] = true;
                }
            }
            seen.iter()
                .enumerate()
                .filter(|(_, &s)| s)
                .map(|(l, _)| Condition::new(a, Relation::Equals(l)))
                .collect()
        }
        AttributeKind::Numeric => {
            let mut values: Vec<f64> = covered.iter_ones().map(|r| column[r]).filter(|v| !v.is_nan()).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let mut out = Vec::with_capacity(2 * values.len().saturating_sub(1));
            for w in values.windows(2) {
                let m = w[0] + (w[1] - w[0]) / 2.0;
                if m <= w[0] || m > w[1] {
                    continue;
                }
                out.push(Condition::new(a, Relation::LessThan(m)));
                out.push(Condition::new(a, Relation::AtLeast(m)));
            }
            out
        }
    }
}
