//! Text form of conditions and expert rules, as printed in training reports:
//! `Gender = {male}`, `Age = (-inf, 34.5)`, `Age = <30.0, inf)`,
//! `Age = <30.0, 40.0)`, joined with ` AND `, optionally wrapped as
//! `IF ... THEN Label = {value}`. A threshold of `_` is a wildcard.

use super::{ConditionSpec, ExpertRule, KnowledgeError, Multiplicity, RelationSpec, Threshold};

fn err(input: &str, message: impl Into<String>) -> KnowledgeError {
    KnowledgeError::Syntax {
        input: input.to_string(),
        message: message.into(),
    }
}

/// Splits on ` AND ` outside `{...}` and numeric brackets.
fn split_conjunction(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut i = 0;
    let mut prev_non_space = b' ';
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'{' | b'(' | b'[' => depth += 1,
            b'<' if prev_non_space == b'=' => depth += 1,
            b'}' | b')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && s[i..].starts_with(" AND ") {
            parts.push(&s[start..i]);
            i += 5;
            start = i;
            prev_non_space = b' ';
            continue;
        }
        if !c.is_ascii_whitespace() {
            prev_non_space = c;
        }
        i += 1;
    }
    parts.push(&s[start..]);
    parts
}

fn parse_threshold(s: &str, input: &str) -> Result<Threshold, KnowledgeError> {
    let s = s.trim();
    if s == "_" {
        return Ok(Threshold::Any);
    }
    let v: f64 = s.parse().map_err(|_| err(input, format!("bad threshold '{s}'")))?;
    if !v.is_finite() {
        return Err(err(input, "threshold must be finite"));
    }
    Ok(Threshold::Exact(v))
}

fn is_neg_inf(s: &str) -> bool {
    matches!(s.trim(), "-inf" | "-Infinity" | "-infinity")
}

fn is_pos_inf(s: &str) -> bool {
    matches!(s.trim(), "inf" | "+inf" | "Infinity" | "infinity")
}

pub fn parse_condition(input: &str) -> Result<ConditionSpec, KnowledgeError> {
    let s = input.trim();
    let split = s
        .match_indices(" = ")
        .map(|(i, _)| i)
        .find(|&i| {
            s[i + 3..]
                .trim_start()
                .starts_with(['{', '(', '<', '['])
        })
        .ok_or_else(|| err(input, "expected '<attribute> = <value>'"))?;
    let attribute = s[..split].trim().to_string();
    if attribute.is_empty() {
        return Err(err(input, "missing attribute name"));
    }
    let value = s[split + 3..].trim();
    let relation = if let Some(inner) = value.strip_prefix('{') {
        let level = inner
            .strip_suffix('}')
            .ok_or_else(|| err(input, "unterminated '{'"))?;
        RelationSpec::Equals(level.to_string())
    } else {
        let open = value.chars().next().unwrap_or(' ');
        let inner = value[open.len_utf8()..]
            .strip_suffix(')')
            .ok_or_else(|| err(input, "numeric interval must end with ')'"))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| err(input, "numeric interval needs two bounds"))?;
        match (is_neg_inf(lo), is_pos_inf(hi)) {
            (true, true) => return Err(err(input, "interval (-inf, inf) is not a condition")),
            (true, false) => RelationSpec::LessThan(parse_threshold(hi, input)?),
            (false, true) => RelationSpec::AtLeast(parse_threshold(lo, input)?),
            (false, false) => {
                let (Threshold::Exact(lo), Threshold::Exact(hi)) =
                    (parse_threshold(lo, input)?, parse_threshold(hi, input)?)
                else {
                    return Err(err(input, "wildcards are only allowed in half-open intervals"));
                };
                if lo >= hi {
                    return Err(err(input, "interval lower bound must be below upper bound"));
                }
                RelationSpec::InInterval(lo, hi)
            }
        }
    };
    Ok(ConditionSpec { attribute, relation })
}

/// Parses `c1 AND c2 ...`; `TRUE` or an empty string is the empty premise.
pub fn parse_premise(input: &str) -> Result<Vec<ConditionSpec>, KnowledgeError> {
    let s = input.trim();
    if s.is_empty() || s == "TRUE" {
        return Ok(Vec::new());
    }
    split_conjunction(s).into_iter().map(parse_condition).collect()
}

/// `IF <premise> [THEN <label> = {<value>}]`, the `IF` being optional.
pub fn parse_expert_rule(input: &str) -> Result<ExpertRule, KnowledgeError> {
    let mut s = input.trim();
    if let Some(rest) = s.strip_prefix("IF ") {
        s = rest;
    } else if s == "IF" {
        s = "";
    }
    let (premise, consequence) = match s.find(" THEN ").map(|i| (i, 6)).or_else(|| s.starts_with("THEN ").then_some((0, 5))) {
        Some((i, skip)) => {
            let then = s[i + skip..].trim();
            let spec = parse_condition(then)?;
            let RelationSpec::Equals(level) = spec.relation else {
                return Err(err(input, "consequence must be '<label> = {<value>}'"));
            };
            (&s[..i], Some(level))
        }
        None => (s, None),
    };
    Ok(ExpertRule {
        premise: parse_premise(premise)?,
        consequence,
    })
}

/// Splits an optional trailing `: <n>` or `: inf` multiplicity.
pub fn split_multiplicity(input: &str) -> Result<(&str, Multiplicity), KnowledgeError> {
    let s = input.trim();
    if let Some(idx) = s.rfind(':') {
        let tail = s[idx + 1..].trim();
        let body = s[..idx].trim_end();
        if tail == "inf" {
            return Ok((body, Multiplicity::Unlimited));
        }
        if let Ok(n) = tail.parse::<u32>() {
            if n == 0 {
                return Err(err(input, "multiplicity must be positive"));
            }
            return Ok((body, Multiplicity::Limited(n)));
        }
    }
    Ok((s, Multiplicity::Unlimited))
}
