use super::{Attribute, DataError, DataSet};

/// Parses comma-separated text. Columns whose non-missing cells all parse as
/// reals become numeric; the rest are nominal with first-appearance level order.
/// Without a header, columns are named `a1`, `a2`, ...
pub fn parse_csv(text: &str, header: bool) -> Result<DataSet, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(records.len() + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push((line, rec.iter().map(str::to_string).collect()));
    }
    if records.is_empty() {
        return Err(DataError::Empty);
    }

    let width = records[0].1.len();
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(DataError::RaggedRow {
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
    }

    let names: Vec<String> = if header {
        records.remove(0).1
    } else {
        (1..=width).map(|i| format!("a{i}")).collect()
    };

    let is_missing = |s: &str| s.is_empty() || s == "?";
    let mut attributes = Vec::with_capacity(width);
    let mut columns = Vec::with_capacity(width);
    for (c, name) in names.into_iter().enumerate() {
        let cells: Vec<&str> = records.iter().map(|(_, r)| r[c].as_str()).collect();
        let numeric = cells
            .iter()
            .filter(|s| !is_missing(s))
            .all(|s| s.parse::<f64>().is_ok_and(f64::is_finite));
        if numeric {
            attributes.push(Attribute::numeric(name));
            columns.push(
                cells
                    .iter()
                    .map(|s| if is_missing(s) { f64::NAN } else { s.parse().unwrap_or(f64::NAN) })
                    .collect(),
            );
        } else {
            let mut levels: Vec<String> = Vec::new();
            let mut col = Vec::with_capacity(cells.len());
            for s in cells {
                if is_missing(s) {
                    col.push(f64::NAN);
                    continue;
                }
                let idx = match levels.iter().position(|l| l == s) {
                    Some(i) => i,
                    None => {
                        levels.push(s.to_string());
                        levels.len() - 1
                    }
                };
                col.push(idx as f64);
            }
            attributes.push(Attribute::nominal(name, levels));
            columns.push(col);
        }
    }
    DataSet::from_columns(attributes, columns)
}
