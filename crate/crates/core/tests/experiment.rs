mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::{deals_arff, mask_timings, survival_arff, DEALS_XML};
use rulekit::data::parse_arff;
use rulekit::experiment::{cli_main, deserialize_model, parse_experiment, run, RunOptions};

/// Lays out the deals experiment the way its XML expects: the document in
/// `exp/`, training data under `data/deals/`, test data under `deals/data/`.
fn deals_workspace(xml: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    fs::create_dir_all(root.join("exp")).unwrap();
    fs::create_dir_all(root.join("data/deals")).unwrap();
    fs::create_dir_all(root.join("deals/data")).unwrap();
    fs::write(root.join("data/deals/deals-train.arff"), deals_arff(300, 1)).unwrap();
    fs::write(root.join("deals/data/deals-test.arff"), deals_arff(120, 2)).unwrap();
    let xml_path = root.join("exp/experiments.xml");
    fs::write(&xml_path, xml).unwrap();
    (dir, xml_path)
}

fn run_file(xml_path: &Path) -> i32 {
    let xml = fs::read_to_string(xml_path).unwrap();
    let spec = parse_experiment(&xml, xml_path.parent().unwrap()).unwrap();
    run(&spec, &RunOptions::default())
}

#[test]
fn deals_experiment_writes_all_outputs() {
    let (dir, xml) = deals_workspace(DEALS_XML);
    assert_eq!(run_file(&xml), 0);
    let out = dir.path().join("exp/results-deals");

    let report = fs::read_to_string(out.join("training.log")).unwrap();
    assert!(report.starts_with("Rules:\nr1: IF "), "{report}");
    let sections = [
        "\nBest rules covering examples from training set (1-based):\n",
        "\nModel characteristics:\ntime_total_s: ",
        "\n#rules: ",
        "\nTraining set performance:\naccuracy: ",
        "\nclassification_error: ",
        "\nkappa: ",
        "\nbalanced_accuracy: ",
        "\n#rules_per_example: ",
    ];
    let mut at = 0;
    for s in sections {
        let found = report[at..].find(s).unwrap_or_else(|| panic!("missing {s:?} in\n{report}"));
        at += found + s.len();
    }
    assert!(report.contains("THEN Future Customer = {"));

    let model = deserialize_model(&fs::read_to_string(out.join("deals.mdl")).unwrap()).unwrap();
    assert!(!model.rules.is_empty());

    let predictions = parse_arff(&fs::read_to_string(out.join("deals-pred.arff")).unwrap()).unwrap();
    assert_eq!(predictions.len(), 120);
    assert_eq!(predictions.attributes().last().unwrap().name, "prediction");

    let csv = fs::read_to_string(out.join("performance.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..4], ["parameter_set", "model_file", "test_file", "accuracy"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "mincov=8, Entropy_User_C2");
    assert_eq!(&rows[0][1], "deals.mdl");
    let accuracy: f64 = rows[0][3].parse().unwrap();
    assert!(accuracy > 0.6, "accuracy {accuracy}");
}

#[test]
fn missing_input_fails_only_its_entry() {
    let xml = DEALS_XML.replace(
        "</datasets>",
        "<dataset><label>Future Customer</label><out_directory>./broken</out_directory>\
         <training><report_file>training.log</report_file>\
         <train><in_file>../data/nowhere.arff</in_file><model_file>x.mdl</model_file></train></training>\
         </dataset></datasets>",
    );
    let (dir, xml) = deals_workspace(&xml);
    assert_ne!(run_file(&xml), 0);
    let broken = fs::read_to_string(dir.path().join("exp/broken/training.log")).unwrap();
    assert!(broken.contains("Error (training on ../data/nowhere.arff)"), "{broken}");
    assert!(dir.path().join("exp/results-deals/deals.mdl").exists());
    assert!(dir.path().join("exp/results-deals/performance.csv").exists());
}

#[test]
fn reports_repeat_across_runs() {
    let (dir, xml) = deals_workspace(DEALS_XML);
    let out = dir.path().join("exp/results-deals");
    assert_eq!(run_file(&xml), 0);
    let first = fs::read_to_string(out.join("training.log")).unwrap();
    let first_model = fs::read_to_string(out.join("deals.mdl")).unwrap();
    assert_eq!(run_file(&xml), 0);
    let second = fs::read_to_string(out.join("training.log")).unwrap();
    assert_eq!(mask_timings(&first), mask_timings(&second));
    let strip = |m: &str| m.lines().filter(|l| !l.starts_with("{\"model\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first_model), strip(&fs::read_to_string(out.join("deals.mdl")).unwrap()));
}

#[test]
fn cross_validation_rows() {
    let xml = DEALS_XML.replace(
        "</experiment>",
        "<cross_validation><folds>3</folds><seed>7</seed></cross_validation></experiment>",
    );
    let (dir, xml) = deals_workspace(&xml);
    assert_eq!(run_file(&xml), 0);
    let out = dir.path().join("exp/results-deals");
    let csv = fs::read_to_string(out.join("performance.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let tags: Vec<String> = reader.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(tags, ["fold1", "fold2", "fold3", "mean"]);
    let report = fs::read_to_string(out.join("training.log")).unwrap();
    assert_eq!(report.matches("\nRules:\n").count() + usize::from(report.starts_with("Rules:")), 3);
    assert!(report.contains("Fold 3 of 3"));
    assert!(!out.join("deals.mdl").exists());
}

#[test]
fn several_parameter_sets_get_their_own_directories() {
    let xml = DEALS_XML.replace(
        "</parameter_sets>",
        "<parameter_set name=\"plain\"><param name=\"min_rule_covered\">5</param></parameter_set></parameter_sets>",
    );
    let (dir, xml) = deals_workspace(&xml);
    assert_eq!(run_file(&xml), 0);
    let out = dir.path().join("exp/results-deals");
    assert!(out.join("mincov=8__Entropy_User_C2/training.log").exists());
    assert!(out.join("plain/deals-pred.arff").exists());
}

#[test]
fn survival_experiment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("train.arff"), survival_arff(80, 3)).unwrap();
    fs::write(dir.path().join("test.arff"), survival_arff(40, 4)).unwrap();
    let xml = "<experiment><datasets><dataset>\
        <survival_time>time</survival_time><survival_status>status</survival_status>\
        <out_directory>out</out_directory>\
        <training><report_file>training.log</report_file>\
        <train><in_file>train.arff</in_file><model_file>s.mdl</model_file></train></training>\
        <prediction><performance_file>performance.csv</performance_file>\
        <predict><model_file>s.mdl</model_file><test_file>test.arff</test_file>\
        <predictions_file>pred.arff</predictions_file></predict></prediction>\
        </dataset></datasets></experiment>";
    let xml_path = dir.path().join("survival.xml");
    fs::write(&xml_path, xml).unwrap();
    assert_eq!(run_file(&xml_path), 0);
    let out = dir.path().join("out");
    let report = fs::read_to_string(out.join("training.log")).unwrap();
    assert!(report.contains("(survival estimate attached)"), "{report}");
    let curves = fs::read_to_string(out.join("pred-curves.csv")).unwrap();
    assert!(curves.starts_with("time,r1,"), "{curves}");
    let csv = fs::read_to_string(out.join("performance.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("integrated_brier_score"));
}

#[test]
fn cli_usage_and_validation() {
    assert_ne!(cli_main(["rulekit"]), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    fs::write(&bad, DEALS_XML.replace("min_rule_covered", "minrulecov")).unwrap();
    assert_ne!(cli_main(["rulekit".as_ref(), "--validate".as_ref(), bad.as_os_str()]), 0);

    let good = dir.path().join("good.xml");
    fs::write(&good, DEALS_XML).unwrap();
    assert_eq!(cli_main(["rulekit".as_ref(), "--validate".as_ref(), good.as_os_str()]), 0);
}

#[test]
fn binary_reports_usage_and_xml_paths() {
    let exe = env!("CARGO_BIN_EXE_rulekit");
    let out = Command::new(exe).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    fs::write(&bad, DEALS_XML.replace("min_rule_covered", "minrulecov")).unwrap();
    let out = Command::new(exe).arg("--validate").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/experiment/parameter_sets/parameter_set/param[1]"), "{stderr}");

    let (ws, xml) = deals_workspace(DEALS_XML);
    let out = Command::new(exe).args(["--threads", "2"]).arg(&xml).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ws.path().join("exp/results-deals/training.log").exists());
}
