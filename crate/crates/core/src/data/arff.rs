//! Dense ARFF reading and writing.

use std::fmt::Write as _;

use super::{Attribute, AttributeKind, DataError, DataSet};

struct Field {
    text: String,
    quoted: bool,
}

/// Splits on `sep` outside single or double quotes. Backslash escapes inside quotes.
fn split_quoted(s: &str, sep: char, line: usize) -> Result<Vec<Field>, DataError> {
    let mut fields = Vec::new();
    let mut chars = s.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let mut text = String::new();
        let mut quoted = false;
        if let Some(&q) = chars.peek().filter(|&&c| c == '\'' || c == '"') {
            quoted = true;
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                if c == '\\' {
                    if let Some(e) = chars.next() {
                        text.push(e);
                    }
                } else if c == q {
                    closed = true;
                    break;
                } else {
                    text.push(c);
                }
            }
            if !closed {
                return Err(DataError::Parse {
                    line,
                    message: "unterminated quote".into(),
                });
            }
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            match chars.peek() {
                None => {}
                Some(&c) if c == sep => {}
                Some(&c) => {
                    return Err(DataError::Parse {
                        line,
                        message: format!("unexpected '{c}' after quoted value"),
                    })
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == sep {
                    break;
                }
                text.push(c);
                chars.next();
            }
            text = text.trim().to_string();
        }
        fields.push(Field { text, quoted });
        match chars.next() {
            Some(c) if c == sep => continue,
            _ => break,
        }
    }
    Ok(fields)
}

/// Reads a token (possibly quoted) from the start of `s`; returns it and the rest.
fn take_name(s: &str, line: usize) -> Result<(String, &str), DataError> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    match chars.next() {
        None => Err(DataError::Parse {
            line,
            message: "missing name".into(),
        }),
        Some((_, q)) if q == '\'' || q == '"' => {
            let mut name = String::new();
            let mut escaped = false;
            for (i, c) in chars {
                if escaped {
                    name.push(c);
                    escaped = false;
                } else if c == '\\' {
                    escaped = true;
                } else if c == q {
                    return Ok((name, &s[i + c.len_utf8()..]));
                } else {
                    name.push(c);
                }
            }
            Err(DataError::Parse {
                line,
                message: "unterminated quoted name".into(),
            })
        }
        Some(_) => {
            let end = s.find(|c: char| c.is_whitespace() || c == '{').unwrap_or(s.len());
            Ok((s[..end].to_string(), &s[end..]))
        }
    }
}

fn strip_keyword<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let head = line.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = &line[keyword.len()..];
    (rest.is_empty() || rest.starts_with(char::is_whitespace)).then_some(rest)
}

pub fn parse_arff(text: &str) -> Result<DataSet, DataError> {
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut in_data = false;
    let mut seen_relation = false;
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut data_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            if let Some(rest) = strip_keyword(line, "@relation") {
                if rest.trim().is_empty() {
                    return Err(DataError::Parse {
                        line: line_no,
                        message: "@relation without a name".into(),
                    });
                }
                seen_relation = true;
            } else if let Some(rest) = strip_keyword(line, "@attribute") {
                if !seen_relation {
                    return Err(DataError::Parse {
                        line: line_no,
                        message: "@attribute before @relation".into(),
                    });
                }
                let (name, rest) = take_name(rest, line_no)?;
                let spec = rest.trim();
                let kind = if let Some(inner) = spec.strip_prefix('{') {
                    let inner = inner.strip_suffix('}').ok_or_else(|| DataError::Parse {
                        line: line_no,
                        message: format!("unterminated level list for '{name}'"),
                    })?;
                    let levels: Vec<String> = split_quoted(inner, ',', line_no)?
                        .into_iter()
                        .map(|f| f.text)
                        .collect();
                    AttributeKind::Nominal(levels)
                } else {
                    match spec.to_ascii_lowercase().as_str() {
                        "numeric" | "real" | "integer" => AttributeKind::Numeric,
                        other => {
                            return Err(DataError::Parse {
                                line: line_no,
                                message: format!("unsupported attribute type '{other}' for '{name}'"),
                            })
                        }
                    }
                };
                let attr = Attribute {
                    name,
                    kind,
                    role: super::Role::Regular,
                };
                attr.validate().map_err(|message| DataError::Parse { line: line_no, message })?;
                if attributes.iter().any(|a| a.name == attr.name) {
                    return Err(DataError::Parse {
                        line: line_no,
                        message: format!("duplicate attribute '{}'", attr.name),
                    });
                }
                attributes.push(attr);
            } else if strip_keyword(line, "@data").is_some() {
                if attributes.is_empty() {
                    return Err(DataError::Parse {
                        line: line_no,
                        message: "@data before any @attribute".into(),
                    });
                }
                in_data = true;
            } else {
                return Err(DataError::Parse {
                    line: line_no,
                    message: format!("unexpected header line '{line}'"),
                });
            }
            continue;
        }

        data_line += 1;
        if line.starts_with('{') {
            return Err(DataError::Parse {
                line: line_no,
                message: "sparse rows are not supported".into(),
            });
        }
        let fields = split_quoted(line, ',', line_no)?;
        if fields.len() != attributes.len() {
            return Err(DataError::Arity {
                line: line_no,
                data_line,
                expected: attributes.len(),
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(fields.len());
        for (field, attr) in fields.iter().zip(&attributes) {
            if !field.quoted && (field.text == "?" || field.text.is_empty()) {
                row.push(None);
                continue;
            }
            match &attr.kind {
                AttributeKind::Numeric => {
                    let v: f64 = field.text.parse().map_err(|_| DataError::Parse {
                        line: line_no,
                        message: format!("'{}' is not a number for attribute '{}'", field.text, attr.name),
                    })?;
                    if !v.is_finite() {
                        return Err(DataError::Parse {
                            line: line_no,
                            message: format!("non-finite value for '{}'", attr.name),
                        });
                    }
                    row.push(Some(v));
                }
                AttributeKind::Nominal(levels) => {
                    let idx = levels.iter().position(|l| *l == field.text).ok_or_else(|| {
                        DataError::UnknownLevel {
                            line: line_no,
                            attribute: attr.name.clone(),
                            value: field.text.clone(),
                        }
                    })?;
                    row.push(Some(idx as f64));
                }
            }
        }
        rows.push(row);
    }

    if !in_data {
        return Err(DataError::Parse {
            line: text.lines().count().max(1),
            message: "missing @data section".into(),
        });
    }
    DataSet::from_rows(attributes, rows)
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'))
}

fn quote(s: &str) -> String {
    if !needs_quotes(s) {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

/// Serializes a dataset as dense ARFF. Parsing the output yields the same dataset.
pub fn write_arff(ds: &DataSet, relation: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", quote(relation));
    out.push('\n');
    for attr in ds.attributes() {
        match &attr.kind {
            AttributeKind::Numeric => {
                let _ = writeln!(out, "@attribute {} numeric", quote(&attr.name));
            }
            AttributeKind::Nominal(levels) => {
                let levels: Vec<String> = levels.iter().map(|l| quote(l)).collect();
                let _ = writeln!(out, "@attribute {} {{{}}}", quote(&attr.name), levels.join(","));
            }
        }
    }
    out.push_str("\n@data\n");
    for row in 0..ds.len() {
        let cells: Vec<String> = (0..ds.attributes().len())
            .map(|col| match (ds.value(row, col), &ds.attribute(col).kind) {
                (None, _) => "?".to_string(),
                (Some(v), AttributeKind::Numeric) => format!("{v}"),
                (Some(v), AttributeKind::Nominal(levels)) => quote(&levels[v as usize]),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file() {
        let ds = parse_arff("@relation t\n@attribute x numeric\n@attribute c {yes,no}\n@data\n1.5,yes\n").unwrap();
        assert_eq!(ds.attributes().len(), 2);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.value(0, 0), Some(1.5));
        assert_eq!(ds.value(0, 1), Some(0.0));
    }

    #[test]
    fn arity_error_names_data_line() {
        let err = parse_arff("@relation t\n@attribute x numeric\n@attribute c {yes,no}\n@data\n1.5\n").unwrap_err();
        assert_eq!(
            err,
            DataError::Arity {
                line: 5,
                data_line: 1,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn missing_cells_match_token_scan() {
        let text = "% comment\n@RELATION t\n@ATTRIBUTE x REAL\n@attribute 'Future Customer' {yes,no}\n@data\n1,yes\n2,?\n3,no\n4,yes\n";
        let ds = parse_arff(text).unwrap();
        // independent scan over the raw data section
        let data = text.split("@data\n").nth(1).unwrap();
        let expected = data
            .lines()
            .flat_map(|l| l.split(','))
            .filter(|tok| tok.trim() == "?")
            .count();
        assert_eq!(expected, 1);
        assert_eq!(ds.missing_count(), expected);
        assert_eq!(ds.attribute(1).name, "Future Customer");
    }

    #[test]
    fn unknown_level_is_reported_with_line() {
        let err = parse_arff("@relation t\n@attribute c {a,b}\n@data\na\nz\n").unwrap_err();
        assert!(matches!(err, DataError::UnknownLevel { line: 5, .. }));
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            parse_arff("@relation t\n@attribute c string\n@data\n"),
            Err(DataError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_arff("@relation t\n@attribute c {a,b\n@data\n"),
            Err(DataError::Parse { line: 2, .. })
        ));
        assert!(parse_arff("@relation t\n@attribute x numeric\n").is_err());
    }

    #[test]
    fn quoted_levels_and_values() {
        let ds = parse_arff("@relation r\n@attribute 'Payment Method' {'credit card',cash}\n@data\n'credit card'\ncash\n").unwrap();
        assert_eq!(ds.attribute(0).levels().unwrap()[0], "credit card");
        assert_eq!(ds.value(0, 0), Some(0.0));
        assert_eq!(ds.value(1, 0), Some(1.0));
    }

    fn arb_dataset() -> impl Strategy<Value = DataSet> {
        let name = "[A-Za-z][A-Za-z0-9 _,'-]{0,8}";
        let attrs = prop::collection::vec(
            (name, prop::option::of(prop::collection::btree_set("[a-z0-9 ?,'{}]{1,5}", 1..4))),
            1..5,
        );
        attrs
            .prop_flat_map(|attrs| {
                let mut seen = std::collections::HashSet::new();
                let attrs: Vec<Attribute> = attrs
                    .into_iter()
                    .enumerate()
                    .filter(|(_, (n, _))| seen.insert(n.clone()))
                    .map(|(_, (n, levels))| match levels {
                        Some(l) => Attribute::nominal(n, l),
                        None => Attribute::numeric(n),
                    })
                    .collect();
                let cells: Vec<BoxedStrategy<Option<f64>>> = attrs
                    .iter()
                    .map(|a| match a.levels() {
                        Some(l) => prop::option::of((0..l.len()).prop_map(|i| i as f64)).boxed(),
                        None => prop::option::of(-1e6f64..1e6).boxed(),
                    })
                    .collect();
                (Just(attrs), prop::collection::vec(cells, 0..6))
            })
            .prop_map(|(attrs, rows)| DataSet::from_rows(attrs, rows).unwrap())
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(ds in arb_dataset()) {
            let text = write_arff(&ds, "round trip");
            let back = parse_arff(&text).unwrap();
            prop_assert_eq!(back.attributes(), ds.attributes());
            prop_assert_eq!(back.len(), ds.len());
            for r in 0..ds.len() {
                for c in 0..ds.attributes().len() {
                    prop_assert_eq!(back.value(r, c), ds.value(r, c));
                }
            }
        }
    }
}
