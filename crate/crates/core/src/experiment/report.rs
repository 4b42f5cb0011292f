use crate::format::{double_string, p_value_string};
use crate::induction::{Consequence, Rule, RuleSet, TrainingCoverage};
use crate::prediction::PerformanceReport;

/// `r1: IF ... THEN Label = {yes} (p=176.0, n=0.0, P=473.0, N=527.0, weight=0.69, pval=3.8E-67)`
pub fn rule_line(index: usize, rule: &Rule, rs: &RuleSet) -> String {
    let target = rs.target_name();
    let then = match &rule.consequence {
        Consequence::Class(c) => {
            let level = rs.class_levels().get(*c).map_or("?", String::as_str);
            format!("{target} = {{{level}}}")
        }
        Consequence::Value { value, spread } => format!(
            "{target} = {{{} [{}, {}]}}",
            double_string(*value),
            double_string(value - spread),
            double_string(value + spread)
        ),
        Consequence::Survival(_) => format!("{target} = (survival estimate attached)"),
    };
    let q = &rule.stats;
    format!(
        "r{index}: IF {} THEN {then} (p={:.1}, n={:.1}, P={:.1}, N={:.1}, weight={:.2}, pval={})",
        rule.premise_string(&rs.schema),
        q.p,
        q.n,
        q.total_p,
        q.total_n,
        rule.weight,
        p_value_string(rule.p_value)
    )
}

/// One token per example, `;`-separated: 1-based covering rule indices with
/// `*` on the heaviest, or `-` when no rule covers the example.
pub fn coverage_line(coverage: &TrainingCoverage) -> String {
    coverage
        .covering
        .iter()
        .zip(&coverage.best)
        .map(|(rules, best)| {
            if rules.is_empty() {
                return "-".to_string();
            }
            rules
                .iter()
                .map(|&r| {
                    if Some(r) == *best {
                        format!("{}*", r + 1)
                    } else {
                        (r + 1).to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_training_report(
    rs: &RuleSet,
    characteristics: &PerformanceReport,
    train_metrics: &PerformanceReport,
) -> String {
    let mut out = String::from("Rules:\n");
    for (i, r) in rs.rules.iter().enumerate() {
        out.push_str(&rule_line(i + 1, r, rs));
        out.push('\n');
    }
    out.push_str("\nBest rules covering examples from training set (1-based):\n");
    out.push_str(&coverage_line(&rs.training_coverage));
    out.push_str("\n\nModel characteristics:\n");
    for line in characteristics.lines() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("\nTraining set performance:\n");
    for line in train_metrics.lines() {
        out.push_str(&line);
        out.push('\n');
    }
    for note in characteristics.notes.iter().chain(&train_metrics.notes) {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Attribute, Role, Task};
    use crate::induction::{Condition, DefaultResponse, InductionParams, Relation, Timing};
    use crate::measures::ContingencyQuad;

    fn deals_rule_set(rules: Vec<Rule>) -> RuleSet {
        RuleSet {
            task: Task::Classification,
            schema: vec![
                Attribute::nominal("Gender", ["male", "female"]),
                Attribute::numeric("Age"),
                Attribute {
                    role: Role::Label,
                    ..Attribute::nominal("Future Customer", ["no", "yes"])
                },
            ],
            rules,
            default_response: DefaultResponse::Class(0),
            params: InductionParams::default(),
            training_coverage: TrainingCoverage::default(),
            timing: Timing::default(),
        }
    }

    #[test]
    fn first_rule_line_of_the_deals_report() {
        let rule = Rule {
            premise: vec![Condition::new(0, Relation::Equals(0)), Condition::new(1, Relation::LessThan(34.5))],
            consequence: Consequence::Class(1),
            stats: ContingencyQuad::new(176.0, 0.0, 473.0, 527.0).unwrap(),
            weight: 0.686,
            p_value: 3.8e-67,
            grown_condition_count: 2,
        };
        let rs = deals_rule_set(vec![rule.clone()]);
        assert_eq!(
            rule_line(1, &rule, &rs),
            "r1: IF Gender = {male} AND Age = (-inf, 34.5) THEN Future Customer = {yes} \
             (p=176.0, n=0.0, P=473.0, N=527.0, weight=0.69, pval=3.8E-67)"
        );
    }

    #[test]
    fn coverage_tokens() {
        let cov = TrainingCoverage {
            covering: vec![vec![4, 11], vec![2, 11], vec![1, 13, 14], vec![]],
            best: vec![Some(4), Some(2), Some(1), None],
        };
        assert_eq!(coverage_line(&cov), "5*,12;3*,12;2*,14,15;-");
    }

    #[test]
    fn regression_consequence() {
        let mut rs = deals_rule_set(vec![]);
        rs.schema[2] = Attribute {
            role: Role::Label,
            ..Attribute::numeric("y")
        };
        let rule = Rule {
            premise: vec![],
            consequence: Consequence::Value { value: 12.5, spread: 2.5 },
            stats: ContingencyQuad::unchecked(3.0, 1.0, 5.0, 5.0),
            weight: 0.5,
            p_value: 0.01,
            grown_condition_count: 0,
        };
        assert_eq!(
            rule_line(2, &rule, &rs),
            "r2: IF TRUE THEN y = {12.5 [10.0, 15.0]} (p=3.0, n=1.0, P=5.0, N=5.0, weight=0.50, pval=1.0E-2)"
        );
    }

    #[test]
    fn section_order() {
        let rs = deals_rule_set(vec![]);
        let mut m = PerformanceReport::default();
        m.insert("#rules", 0.0);
        let mut t = PerformanceReport::default();
        t.insert("accuracy", 0.954);
        let text = write_training_report(&rs, &m, &t);
        assert_eq!(
            text,
            "Rules:\n\nBest rules covering examples from training set (1-based):\n\n\n\
             Model characteristics:\n#rules: 0.0\n\nTraining set performance:\naccuracy: 0.954\n"
        );
    }
}
