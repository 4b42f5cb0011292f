use proptest::prelude::*;

use super::*;
use crate::data::set_roles;
use crate::induction::{
    induce, Condition, InductionParams, Relation, Rule, Timing, TrainingCoverage,
};
use crate::measures::ContingencyQuad;

fn schema() -> Vec<Attribute> {
    vec![
        Attribute::numeric("x"),
        Attribute {
            role: Role::Label,
            ..Attribute::nominal("class", ["a", "b"])
        },
    ]
}

fn rule(premise: Vec<Condition>, consequence: Consequence, weight: f64, quad: (f64, f64, f64, f64)) -> Rule {
    Rule {
        premise,
        consequence,
        stats: ContingencyQuad::unchecked(quad.0, quad.1, quad.2, quad.3),
        weight,
        p_value: 0.01,
        grown_condition_count: 3,
    }
}

fn rule_set(task: Task, schema: Vec<Attribute>, rules: Vec<Rule>, default_response: DefaultResponse) -> RuleSet {
    RuleSet {
        task,
        schema,
        rules,
        default_response,
        params: InductionParams::default(),
        training_coverage: TrainingCoverage::default(),
        timing: Timing::default(),
    }
}

fn data(xs: &[f64]) -> DataSet {
    DataSet::from_rows(vec![Attribute::numeric("x")], xs.iter().map(|&x| vec![Some(x)]).collect()).unwrap()
}

#[test]
fn pure_rule_and_weighted_vote() {
    let rs = rule_set(
        Task::Classification,
        schema(),
        vec![
            rule(vec![Condition::new(0, Relation::LessThan(5.0))], Consequence::Class(1), 0.7, (1.0, 0.0, 1.0, 1.0)),
            rule(vec![Condition::new(0, Relation::LessThan(3.0))], Consequence::Class(0), 0.3, (1.0, 0.0, 1.0, 1.0)),
        ],
        DefaultResponse::Class(0),
    );
    let res = predict(&rs, &data(&[4.0, 1.0, 9.0])).unwrap();
    assert_eq!(res.predictions, vec![Prediction::Class(1), Prediction::Class(1), Prediction::Class(0)]);
    assert_eq!(res.covering, vec![vec![0], vec![0, 1], vec![]]);
    assert_eq!(res.default_used, vec![false, false, true]);
}

#[test]
fn vote_ties_go_to_lower_level() {
    let rs = rule_set(
        Task::Classification,
        schema(),
        vec![
            rule(vec![], Consequence::Class(1), 0.5, (1.0, 0.0, 1.0, 1.0)),
            rule(vec![], Consequence::Class(0), 0.5, (1.0, 0.0, 1.0, 1.0)),
        ],
        DefaultResponse::Class(1),
    );
    assert_eq!(predict(&rs, &data(&[0.0])).unwrap().predictions, vec![Prediction::Class(0)]);
}

#[test]
fn regression_weighted_mean() {
    let s = vec![
        Attribute::numeric("x"),
        Attribute {
            role: Role::Label,
            ..Attribute::numeric("y")
        },
    ];
    let rs = rule_set(
        Task::Regression,
        s,
        vec![
            rule(vec![], Consequence::Value { value: 10.0, spread: 1.0 }, 1.0, (1.0, 0.0, 1.0, 1.0)),
            rule(
                vec![Condition::new(0, Relation::AtLeast(0.0))],
                Consequence::Value { value: 20.0, spread: 1.0 },
                3.0,
                (1.0, 0.0, 1.0, 1.0),
            ),
        ],
        DefaultResponse::Value(0.0),
    );
    let res = predict(&rs, &data(&[1.0, -1.0])).unwrap();
    assert_eq!(res.predictions, vec![Prediction::Value(17.5), Prediction::Value(10.0)]);
}

#[test]
fn alignment_by_name_and_level_text() {
    let rs = rule_set(
        Task::Classification,
        vec![
            Attribute::nominal("g", ["m", "f"]),
            Attribute {
                role: Role::Label,
                ..Attribute::nominal("class", ["a", "b"])
            },
        ],
        vec![rule(vec![Condition::new(0, Relation::Equals(1))], Consequence::Class(1), 1.0, (1.0, 0.0, 1.0, 1.0))],
        DefaultResponse::Class(0),
    );
    let test = DataSet::from_rows(
        vec![Attribute::nominal("class", ["b", "a"]), Attribute::nominal("g", ["f", "m", "x"])],
        vec![
            vec![Some(0.0), Some(0.0)],
            vec![Some(1.0), Some(1.0)],
            vec![Some(1.0), Some(2.0)],
        ],
    )
    .unwrap();
    let res = predict(&rs, &test).unwrap();
    assert_eq!(res.predictions, vec![Prediction::Class(1), Prediction::Class(0), Prediction::Class(0)]);
    let test = set_roles(test, Some("class"), None, None).unwrap();
    let report = evaluate(&rs, &test, &res).unwrap();
    assert_eq!(report.get("accuracy"), Some(1.0));

    let missing = data(&[1.0]);
    assert_eq!(predict(&rs, &missing).unwrap_err(), PredictionError::MissingAttribute("g".into()));
    let wrong = DataSet::from_rows(vec![Attribute::numeric("g")], vec![vec![Some(1.0)]]).unwrap();
    assert_eq!(predict(&rs, &wrong).unwrap_err(), PredictionError::KindMismatch("g".into()));
}

fn class_result(pred: &[usize]) -> PredictionResult {
    PredictionResult {
        predictions: pred.iter().map(|&c| Prediction::Class(c)).collect(),
        covering: pred.iter().map(|_| vec![0]).collect(),
        default_used: vec![false; pred.len()],
    }
}

fn levels() -> Vec<String> {
    vec!["a".into(), "b".into()]
}

#[test]
fn confusion_matrix_metrics() {
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (t, p, k) in [(0, 0, 40), (0, 1, 10), (1, 0, 10), (1, 1, 40)] {
        truth.extend(std::iter::repeat_n(t as f64, k));
        pred.extend(std::iter::repeat_n(p, k));
    }
    let r = evaluate_classification(&class_result(&pred), &truth, &levels()).unwrap();
    let close = |k: &str, v: f64| assert!((r.get(k).unwrap() - v).abs() < 1e-12, "{k}");
    close("accuracy", 0.8);
    close("classification_error", 0.2);
    close("kappa", 0.6);
    close("balanced_accuracy", 0.8);
    close("#rules_per_example", 1.0);
    close("precision_a", 0.8);
    close("f1_b", 0.8);
    let keys: Vec<&str> = r.metrics.iter().take(5).map(|m| m.0.as_str()).collect();
    assert_eq!(keys, ["accuracy", "classification_error", "kappa", "balanced_accuracy", "#rules_per_example"]);
}

#[test]
fn perfect_classification() {
    let r = evaluate_classification(&class_result(&[0, 1, 1]), &[0.0, 1.0, 1.0], &levels()).unwrap();
    assert_eq!(r.get("accuracy"), Some(1.0));
    assert_eq!(r.get("classification_error"), Some(0.0));
    assert_eq!(r.get("kappa"), Some(1.0));
    assert!(evaluate_classification(&class_result(&[]), &[], &levels()).is_err());
}

fn value_result(v: &[f64]) -> PredictionResult {
    PredictionResult {
        predictions: v.iter().map(|&x| Prediction::Value(x)).collect(),
        covering: vec![vec![]; v.len()],
        default_used: vec![true; v.len()],
    }
}

#[test]
fn regression_metrics() {
    let r = evaluate_regression(&value_result(&[1.0, 2.0]), &[1.0, 2.0]).unwrap();
    assert_eq!((r.get("rmse"), r.get("mae")), (Some(0.0), Some(0.0)));
    assert_eq!(r.get("correlation"), Some(1.0));
    let r = evaluate_regression(&value_result(&[5.0, 5.0]), &[4.0, 6.0]).unwrap();
    assert_eq!((r.get("rmse"), r.get("mae")), (Some(1.0), Some(1.0)));
    assert_eq!(r.get("relative_absolute_error"), Some(1.0));
    assert_eq!(r.get("correlation"), Some(0.0));
    assert_eq!(r.notes.len(), 1);
    let r = evaluate_regression(&value_result(&[3.0]), &[7.5]).unwrap();
    assert_eq!(r.get("rmse"), Some(4.5));
}

fn km(points: &[(f64, f64)]) -> SurvivalEstimate {
    SurvivalEstimate::from_points(points.to_vec()).unwrap()
}

#[test]
fn brier_score_hand_values() {
    let one = SurvivalEstimate::constant_one();
    let times = [1.0, 2.0, 3.0];
    let events = [1, 1, 1];
    // S = 1 while everyone dies: [1,2) contributes 1/3, [2,3) 2/3
    let ibs = integrated_brier_score(&[&one, &one, &one], &times, &events, &one);
    assert!((ibs - 1.0 / 3.0).abs() < 1e-15);
    let empirical = km(&[(1.0, 2.0 / 3.0), (2.0, 1.0 / 3.0), (3.0, 0.0)]);
    let ibs_km = integrated_brier_score(&[&empirical, &empirical, &empirical], &times, &events, &one);
    assert!((ibs_km - 4.0 / 27.0).abs() < 1e-15);
    assert!(ibs_km < ibs);
    let censoring = crate::stats::kaplan_meier(&times, &[1, 1, 1]).unwrap();
    assert_eq!(integrated_brier_score(&[&one, &one, &one], &times, &[0, 0, 0], &censoring), 0.0);
}

#[test]
fn brier_score_with_censoring_weights() {
    // one censoring at 1.5 among deaths at 1, 2, 3
    let times = [1.0, 1.5, 2.0, 3.0];
    let events = [1, 0, 1, 1];
    let flipped: Vec<u8> = events.iter().map(|e| 1 - e).collect();
    let g = crate::stats::kaplan_meier(&times, &flipped).unwrap();
    let one = SurvivalEstimate::constant_one();
    let ibs = integrated_brier_score(&[&one; 4], &times, &events, &g);
    // G = 1 before 1.5 and 2/3 from then on; only event terms are nonzero:
    // [1,2): 1/4, [2,3): (1 + 1/(2/3))/4 = 5/8
    let expected = (0.25 * 1.0 + 0.625 * 1.0) / 3.0;
    assert!((ibs - expected).abs() < 1e-15, "{ibs} vs {expected}");
}

#[test]
fn model_characteristics_values() {
    let all = rule(vec![], Consequence::Class(0), 1.0, (5.0, 5.0, 5.0, 5.0));
    let rs = rule_set(Task::Classification, schema(), vec![all], DefaultResponse::Class(0));
    let m = model_characteristics(&rs).unwrap();
    assert_eq!(m.get("avg_rule_coverage"), Some(1.0));
    assert_eq!(m.get("#rules"), Some(1.0));

    let c = |t| Condition::new(0, Relation::LessThan(t));
    let rules = vec![
        rule(vec![c(1.0), c(2.0)], Consequence::Class(0), 1.0, (10.0, 0.0, 20.0, 20.0)),
        rule(vec![c(1.0), c(2.0)], Consequence::Class(0), 1.0, (9.0, 1.0, 20.0, 20.0)),
    ];
    let rs = rule_set(Task::Classification, schema(), rules, DefaultResponse::Class(0));
    let m = model_characteristics(&rs).unwrap();
    assert!((m.get("avg_rule_precision").unwrap() - 0.95).abs() < 1e-12);
    assert_eq!(m.get("#conditions_per_rule"), Some(2.0));
    assert_eq!(m.get("#induced_conditions_per_rule"), Some(3.0));
    assert_eq!(m.get("avg_rule_coverage"), Some(0.25));
    let keys: Vec<&str> = m.metrics.iter().take(8).map(|m| m.0.as_str()).collect();
    assert_eq!(
        keys,
        [
            "time_total_s",
            "time_growing_s",
            "time_pruning_s",
            "#rules",
            "#conditions_per_rule",
            "#induced_conditions_per_rule",
            "avg_rule_coverage",
            "avg_rule_precision"
        ]
    );
    let empty = rule_set(Task::Classification, schema(), vec![], DefaultResponse::Class(0));
    assert_eq!(model_characteristics(&empty), Err(PredictionError::EmptyRuleSet));
}

#[test]
fn report_lines_use_report_number_style() {
    let mut r = PerformanceReport::default();
    r.insert("#rules", 15.0);
    r.insert("classification_error", 1.0 - 0.954);
    assert_eq!(r.lines(), ["#rules: 15.0", "classification_error: 0.04600000000000004"]);
}

fn training_set(xs: &[(f64, f64, bool)]) -> DataSet {
    let ds = DataSet::from_rows(
        vec![Attribute::numeric("x"), Attribute::numeric("z"), Attribute::nominal("class", ["a", "b"])],
        xs.iter().map(|&(x, z, c)| vec![Some(x), Some(z), Some(c as u8 as f64)]).collect(),
    )
    .unwrap();
    set_roles(ds, Some("class"), None, None).unwrap()
}

fn rows() -> impl Strategy<Value = Vec<(f64, f64, bool)>> {
    proptest::collection::vec((0u8..10, 0u8..10, any::<bool>()), 6..30)
        .prop_map(|v| v.into_iter().map(|(x, z, c)| (x as f64, z as f64, c)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scaling_weights_keeps_votes(rows in rows(), scale in 0.01f64..100.0) {
        let ds = training_set(&rows);
        let rs = induce(&ds, &InductionParams { min_rule_covered: 2.0, ..Default::default() }, None).unwrap();
        let mut scaled = rs.clone();
        for r in &mut scaled.rules {
            r.weight *= scale;
        }
        prop_assert_eq!(predict(&rs, &ds).unwrap().predictions, predict(&scaled, &ds).unwrap().predictions);
    }

    #[test]
    fn rules_per_example_matches_training_bookkeeping(rows in rows()) {
        let ds = training_set(&rows);
        let rs = induce(&ds, &InductionParams { min_rule_covered: 2.0, ..Default::default() }, None).unwrap();
        let res = predict(&rs, &ds).unwrap();
        prop_assert_eq!(&res.covering, &rs.training_coverage.covering);
        let report = evaluate(&rs, &ds, &res).unwrap();
        prop_assert!((report.get("#rules_per_example").unwrap() - rs.training_coverage.rules_per_example()).abs() < 1e-12);
    }

    #[test]
    fn self_agreement(pred in proptest::collection::vec(0usize..3, 2..50)) {
        let mut pred = pred;
        pred[0] = 0;
        pred[1] = 1;
        let truth: Vec<f64> = pred.iter().map(|&p| p as f64).collect();
        let lv: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let r = evaluate_classification(&class_result(&pred), &truth, &lv).unwrap();
        prop_assert_eq!(r.get("accuracy"), Some(1.0));
        prop_assert_eq!(r.get("kappa"), Some(1.0));
    }

    #[test]
    fn survival_predictions_are_monotone(
        data in proptest::collection::vec((0u8..3, 1u8..30, any::<bool>()), 8..40),
    ) {
        let ds = DataSet::from_rows(
            vec![Attribute::numeric("g"), Attribute::numeric("time"), Attribute::numeric("status")],
            data.iter().map(|&(g, t, e)| vec![Some(g as f64), Some(t as f64), Some(e as u8 as f64)]).collect(),
        ).unwrap();
        let ds = set_roles(ds, None, Some("time"), Some("status")).unwrap();
        let rs = induce(&ds, &InductionParams { min_rule_covered: 3.0, ..Default::default() }, None).unwrap();
        let res = predict(&rs, &ds).unwrap();
        for p in &res.predictions {
            let Prediction::Survival(s) = p else { panic!("survival expected") };
            prop_assert!(s.points().windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
        }
        let report = evaluate(&rs, &ds, &res).unwrap();
        let ibs = report.get("integrated_brier_score").unwrap();
        prop_assert!(ibs.is_finite() && ibs >= 0.0);
    }
}

#[test]
fn survival_outputs() {
    let ds = DataSet::from_rows(
        vec![Attribute::numeric("g"), Attribute::numeric("time"), Attribute::numeric("status")],
        (0..20)
            .map(|i| vec![Some((i % 2) as f64), Some(if i % 2 == 0 { 1.0 + i as f64 } else { 50.0 + i as f64 }), Some(1.0)])
            .collect(),
    )
    .unwrap();
    let ds = set_roles(ds, None, Some("time"), Some("status")).unwrap();
    let rs = induce(&ds, &InductionParams { min_rule_covered: 3.0, ..Default::default() }, None).unwrap();
    let res = predict(&rs, &ds).unwrap();
    let csv = survival_curves_csv(&rs, &res);
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("time,r1,"));
    assert!(header.ends_with(",e20"));
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0,1.0"));
    let out = with_predictions(&rs, &ds, &res).unwrap();
    assert_eq!(out.attribute(out.attributes().len() - 1).name, "prediction");
    let medians = out.column(out.attributes().len() - 1);
    assert!(medians.iter().all(|m| m.is_finite()));
}
