//! Model files: one JSON object per line. The first line carries the format
//! tag and version, the second the model header, then one line per rule and a
//! final line with the training coverage. Conditions name their attribute, so
//! thresholds can be edited by hand.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExperimentError;
use crate::data::{Attribute, AttributeKind, Role, Task};
use crate::induction::{
    Condition, Consequence, DefaultResponse, InductionParams, Relation, Rule, RuleSet, Timing, TrainingCoverage,
};
use crate::measures::{ContingencyQuad, Measure};
use crate::stats::SurvivalEstimate;

pub const MODEL_FORMAT: &str = "rulekit-model";
pub const MODEL_VERSION: u32 = 1;

/// f64 that survives JSON: non-finite values are written as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "NaN" => Ok(Num(f64::NAN)),
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                _ => Err(serde::de::Error::custom(format!("not a number: '{s}'"))),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Tag {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct MeasureDto {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equation: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDto {
    min_rule_covered: Num,
    induction_measure: MeasureDto,
    pruning_measure: MeasureDto,
    voting_measure: MeasureDto,
    pruning_enabled: bool,
    max_growing_conditions: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct AttributeDto {
    name: String,
    role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DefaultDto {
    Class(String),
    Value(Num),
    Survival {
        estimate: Vec<(f64, f64)>,
        censoring: Vec<(f64, f64)>,
    },
}

#[derive(Serialize, Deserialize)]
struct Head {
    task: String,
    rules: usize,
    params: ParamsDto,
    schema: Vec<AttributeDto>,
    default_response: DefaultDto,
    timing: [Num; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RelationDto {
    Equals(String),
    LessThan(f64),
    AtLeast(f64),
    InInterval(f64, f64),
}

#[derive(Serialize, Deserialize)]
struct ConditionDto {
    attribute: String,
    #[serde(flatten)]
    relation: RelationDto,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConsequenceDto {
    Class(String),
    Value { value: Num, spread: Num },
    Survival(Vec<(f64, f64)>),
}

#[derive(Serialize, Deserialize)]
struct RuleDto {
    premise: Vec<ConditionDto>,
    consequence: ConsequenceDto,
    quad: [Num; 4],
    weight: Num,
    p_value: Num,
    grown: usize,
}

#[derive(Serialize, Deserialize)]
struct CoverageDto {
    covering: Vec<Vec<usize>>,
    best: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Line {
    Model(Head),
    Rule(RuleDto),
    Coverage(CoverageDto),
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Regular => "regular",
        Role::Label => "label",
        Role::SurvivalTime => "survival_time",
        Role::SurvivalStatus => "survival_status",
    }
}

fn role_from(s: &str) -> Option<Role> {
    Some(match s {
        "regular" => Role::Regular,
        "label" => Role::Label,
        "survival_time" => Role::SurvivalTime,
        "survival_status" => Role::SurvivalStatus,
        _ => return None,
    })
}

fn measure_dto(m: &Measure) -> Result<MeasureDto, ExperimentError> {
    match m {
        Measure::UserDefined(e) => Ok(MeasureDto {
            name: "UserDefined".into(),
            equation: Some(e.to_string()),
        }),
        Measure::Custom(c) => Err(ExperimentError::Model {
            line: 0,
            message: format!("measure '{}' is defined in code and cannot be saved", c.name()),
        }),
        other => Ok(MeasureDto {
            name: other.name().to_string(),
            equation: None,
        }),
    }
}

fn level_name(schema: &[Attribute], attr: usize, level: usize) -> String {
    schema[attr].levels().and_then(|l| l.get(level)).cloned().unwrap_or_default()
}

pub fn serialize_model(rs: &RuleSet) -> Result<String, ExperimentError> {
    let label = rs.schema.iter().position(|a| a.role == Role::Label);
    let class_name = |c: usize| label.map(|l| level_name(&rs.schema, l, c)).unwrap_or_default();
    let mut lines = Vec::with_capacity(rs.rules.len() + 3);
    lines.push(json(&Tag {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
    }));
    let head = Head {
        task: rs.task.name().to_string(),
        rules: rs.rules.len(),
        params: ParamsDto {
            min_rule_covered: Num(rs.params.min_rule_covered),
            induction_measure: measure_dto(&rs.params.induction_measure)?,
            pruning_measure: measure_dto(&rs.params.pruning_measure)?,
            voting_measure: measure_dto(&rs.params.voting_measure)?,
            pruning_enabled: rs.params.pruning_enabled,
            max_growing_conditions: rs.params.max_growing_conditions,
        },
        schema: rs
            .schema
            .iter()
            .map(|a| AttributeDto {
                name: a.name.clone(),
                role: role_name(a.role).into(),
                levels: a.levels().map(<[String]>::to_vec),
            })
            .collect(),
        default_response: match &rs.default_response {
            DefaultResponse::Class(c) => DefaultDto::Class(class_name(*c)),
            DefaultResponse::Value(v) => DefaultDto::Value(Num(*v)),
            DefaultResponse::Survival { estimate, censoring } => DefaultDto::Survival {
                estimate: estimate.points().to_vec(),
                censoring: censoring.points().to_vec(),
            },
        },
        timing: [Num(rs.timing.total_s), Num(rs.timing.growing_s), Num(rs.timing.pruning_s)],
    };
    lines.push(json(&Line::Model(head)));
    for r in &rs.rules {
        let dto = RuleDto {
            premise: r
                .premise
                .iter()
                .map(|c| ConditionDto {
                    attribute: rs.schema[c.attribute].name.clone(),
                    relation: match c.relation {
                        Relation::Equals(l) => RelationDto::Equals(level_name(&rs.schema, c.attribute, l)),
                        Relation::LessThan(t) => RelationDto::LessThan(t),
                        Relation::AtLeast(t) => RelationDto::AtLeast(t),
                        Relation::InInterval(lo, hi) => RelationDto::InInterval(lo, hi),
                    },
                })
                .collect(),
            consequence: match &r.consequence {
                Consequence::Class(c) => ConsequenceDto::Class(class_name(*c)),
                Consequence::Value { value, spread } => ConsequenceDto::Value {
                    value: Num(*value),
                    spread: Num(*spread),
                },
                Consequence::Survival(s) => ConsequenceDto::Survival(s.points().to_vec()),
            },
            quad: [Num(r.stats.p), Num(r.stats.n), Num(r.stats.total_p), Num(r.stats.total_n)],
            weight: Num(r.weight),
            p_value: Num(r.p_value),
            grown: r.grown_condition_count,
        };
        lines.push(json(&Line::Rule(dto)));
    }
    lines.push(json(&Line::Coverage(CoverageDto {
        covering: rs.training_coverage.covering.clone(),
        best: rs.training_coverage.best.clone(),
    })));
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("model values serialize")
}

fn model_err(line: usize, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Model {
        line,
        message: message.into(),
    }
}

fn measure_from(dto: MeasureDto, line: usize) -> Result<Measure, ExperimentError> {
    match dto.equation {
        Some(eq) if dto.name == "UserDefined" => Measure::user_defined(&eq).map_err(|e| model_err(line, e.to_string())),
        Some(_) => Err(model_err(line, format!("measure {} takes no equation", dto.name))),
        None => Measure::from_name(&dto.name).map_err(|e| model_err(line, e.to_string())),
    }
}

fn estimate(points: Vec<(f64, f64)>, line: usize) -> Result<SurvivalEstimate, ExperimentError> {
    SurvivalEstimate::from_points(points).map_err(|e| model_err(line, e.to_string()))
}

pub fn deserialize_model(text: &str) -> Result<RuleSet, ExperimentError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| model_err(1, "empty model file"))?;
    let tag: Tag = serde_json::from_str(first).map_err(|e| model_err(1, format!("not a model file: {e}")))?;
    if tag.format != MODEL_FORMAT {
        return Err(model_err(1, format!("unknown format '{}'", tag.format)));
    }
    if tag.version != MODEL_VERSION {
        return Err(ExperimentError::ModelVersion {
            found: tag.version,
            supported: MODEL_VERSION,
        });
    }
    let mut next = |what: &str| -> Result<(usize, Line), ExperimentError> {
        let (i, l) = lines
            .next()
            .ok_or_else(|| model_err(0, format!("truncated model file: missing {what}")))?;
        let parsed = serde_json::from_str(l).map_err(|e| model_err(i + 1, e.to_string()))?;
        Ok((i + 1, parsed))
    };
    let (hl, Line::Model(head)) = next("model header")? else {
        return Err(model_err(2, "expected the model header"));
    };
    let task = Task::from_name(&head.task).ok_or_else(|| model_err(hl, format!("unknown task '{}'", head.task)))?;
    let schema: Vec<Attribute> = head
        .schema
        .into_iter()
        .map(|a| {
            Ok(Attribute {
                role: role_from(&a.role).ok_or_else(|| model_err(hl, format!("unknown role '{}'", a.role)))?,
                kind: match a.levels {
                    Some(l) => AttributeKind::Nominal(l),
                    None => AttributeKind::Numeric,
                },
                name: a.name,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let label = schema.iter().position(|a| a.role == Role::Label);
    let class_index = |name: &str, line: usize| -> Result<usize, ExperimentError> {
        label
            .and_then(|l| schema[l].level_index(name))
            .ok_or_else(|| model_err(line, format!("'{name}' is not a class level")))
    };
    let params = InductionParams {
        min_rule_covered: head.params.min_rule_covered.0,
        induction_measure: measure_from(head.params.induction_measure, hl)?,
        pruning_measure: measure_from(head.params.pruning_measure, hl)?,
        voting_measure: measure_from(head.params.voting_measure, hl)?,
        pruning_enabled: head.params.pruning_enabled,
        max_growing_conditions: head.params.max_growing_conditions,
    };
    let default_response = match head.default_response {
        DefaultDto::Class(c) => DefaultResponse::Class(class_index(&c, hl)?),
        DefaultDto::Value(v) => DefaultResponse::Value(v.0),
        DefaultDto::Survival { estimate: e, censoring } => DefaultResponse::Survival {
            estimate: estimate(e, hl)?,
            censoring: estimate(censoring, hl)?,
        },
    };
    let mut rules = Vec::with_capacity(head.rules);
    for k in 0..head.rules {
        let (rl, Line::Rule(dto)) = next(&format!("rule {}", k + 1))? else {
            return Err(model_err(0, format!("expected rule {}", k + 1)));
        };
        let premise = dto
            .premise
            .into_iter()
            .map(|c| {
                let a = schema
                    .iter()
                    .position(|x| x.name == c.attribute)
                    .ok_or_else(|| model_err(rl, format!("unknown attribute '{}'", c.attribute)))?;
                let relation = match c.relation {
                    RelationDto::Equals(level) => Relation::Equals(
                        schema[a]
                            .level_index(&level)
                            .ok_or_else(|| model_err(rl, format!("'{level}' is not a level of '{}'", c.attribute)))?,
                    ),
                    RelationDto::LessThan(t) => Relation::LessThan(t),
                    RelationDto::AtLeast(t) => Relation::AtLeast(t),
                    RelationDto::InInterval(lo, hi) => Relation::InInterval(lo, hi),
                };
                Ok(Condition::new(a, relation))
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        let consequence = match dto.consequence {
            ConsequenceDto::Class(c) => Consequence::Class(class_index(&c, rl)?),
            ConsequenceDto::Value { value, spread } => Consequence::Value {
                value: value.0,
                spread: spread.0,
            },
            ConsequenceDto::Survival(points) => Consequence::Survival(estimate(points, rl)?),
        };
        let [p, n, tp, tn] = dto.quad.map(|x| x.0);
        rules.push(Rule {
            premise,
            consequence,
            stats: ContingencyQuad::unchecked(p, n, tp, tn),
            weight: dto.weight.0,
            p_value: dto.p_value.0,
            grown_condition_count: dto.grown,
        });
    }
    let training_coverage = match next("training coverage")? {
        (_, Line::Coverage(c)) => TrainingCoverage {
            covering: c.covering,
            best: c.best,
        },
        (l, _) => return Err(model_err(l, "expected the training coverage")),
    };
    let [total_s, growing_s, pruning_s] = head.timing.map(|x| x.0);
    Ok(RuleSet {
        task,
        schema,
        rules,
        default_response,
        params,
        training_coverage,
        timing: Timing {
            total_s,
            growing_s,
            pruning_s,
        },
    })
}
