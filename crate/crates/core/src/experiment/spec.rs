use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};

use super::ExperimentError;
use crate::induction::InductionParams;
use crate::knowledge::{parse_condition, parse_expert_rule, split_multiplicity, ExpertKnowledge};
use crate::measures::Measure;

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub name: String,
    pub params: InductionParams,
    pub knowledge: ExpertKnowledge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainEntry {
    pub in_file: PathBuf,
    pub model_file: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictEntry {
    pub model_file: PathBuf,
    pub test_file: PathBuf,
    pub predictions_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingPhase {
    pub report_file: Option<PathBuf>,
    pub train: Vec<TrainEntry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionPhase {
    pub performance_file: Option<PathBuf>,
    pub predict: Vec<PredictEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub label: Option<String>,
    pub survival_time: Option<String>,
    pub survival_status: Option<String>,
    pub out_directory: PathBuf,
    pub training: Option<TrainingPhase>,
    pub prediction: Option<PredictionPhase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossValidation {
    pub folds: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub parameter_sets: Vec<ParameterSet>,
    pub datasets: Vec<DatasetSpec>,
    pub cross_validation: Option<CrossValidation>,
    /// Directory that relative input paths and `out_directory` resolve against.
    pub base_dir: PathBuf,
}

/// Element path such as `/experiment/parameter_sets/parameter_set[1]/param[3]`.
fn path_of(node: Node) -> String {
    let mut parts = Vec::new();
    let mut cur = Some(node);
    while let Some(n) = cur {
        if n.is_element() {
            let name = n.tag_name().name();
            let index = n
                .prev_sibling_element()
                .into_iter()
                .flat_map(|s| std::iter::successors(Some(s), |x| x.prev_sibling_element()))
                .filter(|s| s.tag_name().name() == name)
                .count();
            let same = n
                .parent()
                .map_or(1, |p| p.children().filter(|c| c.is_element() && c.tag_name().name() == name).count());
            parts.push(if same > 1 { format!("{name}[{}]", index + 1) } else { name.to_string() });
        }
        cur = n.parent();
    }
    parts.reverse();
    format!("/{}", parts.join("/"))
}

fn err(node: Node, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Xml {
        path: path_of(node),
        message: message.into(),
    }
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(Node::is_element)
}

fn text(node: Node) -> String {
    node.text().unwrap_or("").trim().to_string()
}

fn expect_children(node: Node, allowed: &[&str]) -> Result<(), ExperimentError> {
    for c in elements(node) {
        if !allowed.contains(&c.tag_name().name()) {
            return Err(err(c, format!("unknown element <{}>", c.tag_name().name())));
        }
    }
    Ok(())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Result<Option<Node<'a, 'i>>, ExperimentError> {
    let mut found = elements(node).filter(|c| c.tag_name().name() == name);
    let first = found.next();
    if let Some(dup) = found.next() {
        return Err(err(dup, format!("duplicate <{name}>")));
    }
    Ok(first)
}

fn required_text(node: Node, name: &str) -> Result<String, ExperimentError> {
    let c = child(node, name)?.ok_or_else(|| err(node, format!("missing <{name}>")))?;
    let t = text(c);
    if t.is_empty() {
        return Err(err(c, format!("<{name}> is empty")));
    }
    Ok(t)
}

fn optional_text(node: Node, name: &str) -> Result<Option<String>, ExperimentError> {
    Ok(child(node, name)?.map(text).filter(|t| !t.is_empty()))
}

fn parse_bool(node: Node, s: &str) -> Result<bool, ExperimentError> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(err(node, format!("expected true or false, found '{s}'"))),
    }
}

/// Values of a list-valued parameter: `<entry>` children, or the text itself.
fn entries(node: Node) -> Result<Vec<String>, ExperimentError> {
    expect_children(node, &["entry"])?;
    let items: Vec<String> = elements(node).map(text).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        let t = text(node);
        return Ok(if t.is_empty() { Vec::new() } else { vec![t] });
    }
    Ok(items)
}

fn parameter_set(node: Node) -> Result<ParameterSet, ExperimentError> {
    expect_children(node, &["param"])?;
    let name = node
        .attribute("name")
        .ok_or_else(|| err(node, "parameter_set needs a name attribute"))?
        .to_string();
    let mut params = InductionParams::default();
    let mut knowledge = ExpertKnowledge::default();
    let mut measure_names: [Option<(String, Node)>; 3] = [None, None, None];
    let mut equations: [Option<(String, Node)>; 3] = [None, None, None];
    for p in elements(node) {
        let pname = p.attribute("name").ok_or_else(|| err(p, "param needs a name attribute"))?;
        let value = text(p);
        let slot = |i: usize| (i, value.clone(), p);
        let condition_list = |with_multiplicity: bool| -> Result<Vec<_>, ExperimentError> {
            entries(p)?
                .iter()
                .map(|e| {
                    let (body, m) = if with_multiplicity {
                        split_multiplicity(e).map_err(|k| err(p, k.to_string()))?
                    } else {
                        (e.as_str(), crate::knowledge::Multiplicity::Unlimited)
                    };
                    Ok((body.to_string(), m))
                })
                .collect()
        };
        match pname {
            "min_rule_covered" => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| err(p, format!("min_rule_covered must be a number, found '{value}'")))?;
                if v.is_nan() || v < 1.0 || !v.is_finite() {
                    return Err(err(p, "min_rule_covered must be at least 1"));
                }
                params.min_rule_covered = v;
            }
            "induction_measure" | "pruning_measure" | "voting_measure" => {
                let (i, v, n) = slot(["induction_measure", "pruning_measure", "voting_measure"]
                    .iter()
                    .position(|x| *x == pname)
                    .unwrap_or(0));
                measure_names[i] = Some((v, n));
            }
            "user_induction_equation" | "user_pruning_equation" | "user_voting_equation" => {
                let (i, v, n) = slot(["user_induction_equation", "user_pruning_equation", "user_voting_equation"]
                    .iter()
                    .position(|x| *x == pname)
                    .unwrap_or(0));
                equations[i] = Some((v, n));
            }
            "enable_pruning" => params.pruning_enabled = parse_bool(p, &value)?,
            "max_growing" => {
                let v: usize = value
                    .parse()
                    .map_err(|_| err(p, format!("max_growing must be a non-negative integer, found '{value}'")))?;
                params.max_growing_conditions = (v > 0).then_some(v);
            }
            "extend_with_automatic" => knowledge.extend_with_automatic = parse_bool(p, &value)?,
            "induce_automatic_rules" => knowledge.induce_automatic_rules = parse_bool(p, &value)?,
            "expert_rules" => {
                for e in entries(p)? {
                    knowledge
                        .initial_rules
                        .push(parse_expert_rule(&e).map_err(|k| err(p, k.to_string()))?);
                }
            }
            "preferred_conditions" => {
                for (body, m) in condition_list(true)? {
                    let c = parse_condition(&body).map_err(|k| err(p, k.to_string()))?;
                    knowledge.preferred_conditions.push((c, m));
                }
            }
            "forbidden_conditions" => {
                for (body, _) in condition_list(false)? {
                    let c = parse_condition(&body).map_err(|k| err(p, k.to_string()))?;
                    knowledge.forbidden_conditions.push(c);
                }
            }
            "preferred_attributes" => {
                for (body, m) in condition_list(true)? {
                    knowledge.preferred_attributes.push((body, m));
                }
            }
            "forbidden_attributes" => {
                for (body, _) in condition_list(false)? {
                    knowledge.forbidden_attributes.push(body);
                }
            }
            other => return Err(err(p, format!("unknown parameter '{other}'"))),
        }
    }
    let mut resolved = [None, None, None];
    for i in 0..3 {
        let equation = equations[i].take();
        resolved[i] = match measure_names[i].take() {
            None => {
                if let Some((_, n)) = equation {
                    return Err(err(n, "equation given without a UserDefined measure"));
                }
                None
            }
            Some((name, n)) if name == "UserDefined" => {
                let (eq, en) = equation.ok_or_else(|| err(n, "UserDefined measure needs a matching user_*_equation"))?;
                Some(Measure::user_defined(&eq).map_err(|e| err(en, e.to_string()))?)
            }
            Some((name, n)) => {
                if let Some((_, en)) = equation {
                    return Err(err(en, format!("equation given but the measure is {name}")));
                }
                Some(Measure::from_name(&name).map_err(|e| err(n, e.to_string()))?)
            }
        };
    }
    let [induction, pruning, voting] = resolved;
    if let Some(m) = induction {
        params.induction_measure = m;
    }
    if let Some(m) = pruning {
        params.pruning_measure = m;
    }
    if let Some(m) = voting {
        params.voting_measure = m;
    }
    Ok(ParameterSet { name, params, knowledge })
}

fn dataset(node: Node) -> Result<DatasetSpec, ExperimentError> {
    expect_children(
        node,
        &["label", "survival_time", "survival_status", "out_directory", "training", "prediction"],
    )?;
    let label = optional_text(node, "label")?;
    let survival_time = optional_text(node, "survival_time")?;
    let survival_status = optional_text(node, "survival_status")?;
    if label.is_none() && survival_time.is_none() {
        return Err(err(node, "missing <label>"));
    }
    if survival_status.is_some() && survival_time.is_none() {
        return Err(err(node, "<survival_status> needs <survival_time>"));
    }
    let out_directory = PathBuf::from(required_text(node, "out_directory")?);
    let training = match child(node, "training")? {
        None => None,
        Some(t) => {
            expect_children(t, &["report_file", "train"])?;
            let mut train = Vec::new();
            for e in elements(t).filter(|c| c.tag_name().name() == "train") {
                expect_children(e, &["in_file", "model_file"])?;
                train.push(TrainEntry {
                    in_file: required_text(e, "in_file")?.into(),
                    model_file: required_text(e, "model_file")?.into(),
                });
            }
            Some(TrainingPhase {
                report_file: optional_text(t, "report_file")?.map(PathBuf::from),
                train,
            })
        }
    };
    let prediction = match child(node, "prediction")? {
        None => None,
        Some(t) => {
            expect_children(t, &["performance_file", "predict"])?;
            let mut predict = Vec::new();
            for e in elements(t).filter(|c| c.tag_name().name() == "predict") {
                expect_children(e, &["model_file", "test_file", "predictions_file"])?;
                predict.push(PredictEntry {
                    model_file: required_text(e, "model_file")?.into(),
                    test_file: required_text(e, "test_file")?.into(),
                    predictions_file: optional_text(e, "predictions_file")?.map(PathBuf::from),
                });
            }
            Some(PredictionPhase {
                performance_file: optional_text(t, "performance_file")?.map(PathBuf::from),
                predict,
            })
        }
    };
    Ok(DatasetSpec {
        label,
        survival_time,
        survival_status,
        out_directory,
        training,
        prediction,
    })
}

fn cross_validation(node: Node) -> Result<CrossValidation, ExperimentError> {
    expect_children(node, &["folds", "seed"])?;
    let folds_text = required_text(node, "folds")?;
    let folds: usize = folds_text
        .parse()
        .ok()
        .filter(|&k| k >= 2)
        .ok_or_else(|| err(node, format!("folds must be an integer of at least 2, found '{folds_text}'")))?;
    let seed = match optional_text(node, "seed")? {
        None => None,
        Some(s) => Some(s.parse().map_err(|_| err(node, format!("seed must be an integer, found '{s}'")))?),
    };
    Ok(CrossValidation { folds, seed })
}

/// Parses an experiment document. `base_dir` is where relative paths in it
/// are resolved from, normally the directory holding the XML file.
pub fn parse_experiment(xml: &str, base_dir: &Path) -> Result<ExperimentSpec, ExperimentError> {
    let doc = Document::parse(xml).map_err(|e| ExperimentError::Xml {
        path: "/".into(),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "experiment" {
        return Err(err(root, "root element must be <experiment>"));
    }
    expect_children(root, &["parameter_sets", "datasets", "cross_validation"])?;
    let mut parameter_sets = Vec::new();
    if let Some(sets) = child(root, "parameter_sets")? {
        expect_children(sets, &["parameter_set"])?;
        for s in elements(sets) {
            parameter_sets.push(parameter_set(s)?);
        }
    }
    if parameter_sets.is_empty() {
        parameter_sets.push(ParameterSet {
            name: "default".into(),
            params: InductionParams::default(),
            knowledge: ExpertKnowledge::default(),
        });
    }
    let mut names = std::collections::HashSet::new();
    for s in &parameter_sets {
        if !names.insert(s.name.as_str()) {
            return Err(ExperimentError::Xml {
                path: "/experiment/parameter_sets".into(),
                message: format!("duplicate parameter set name '{}'", s.name),
            });
        }
    }
    let sets = child(root, "datasets")?.ok_or_else(|| err(root, "missing <datasets>"))?;
    expect_children(sets, &["dataset"])?;
    let datasets = elements(sets).map(dataset).collect::<Result<Vec<_>, _>>()?;
    let cross_validation = child(root, "cross_validation")?.map(cross_validation).transpose()?;
    Ok(ExperimentSpec {
        parameter_sets,
        datasets,
        cross_validation,
        base_dir: base_dir.to_path_buf(),
    })
}
