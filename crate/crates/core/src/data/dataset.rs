use std::collections::HashSet;

use super::{CoverageMask, DataError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Regular,
    Label,
    SurvivalTime,
    SurvivalStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
    pub role: Role,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numeric,
            role: Role::Regular,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Nominal(levels.into_iter().map(Into::into).collect()),
            role: Role::Regular,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(levels) => Some(levels),
            AttributeKind::Numeric => None,
        }
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels()?.iter().position(|l| l == level)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if let AttributeKind::Nominal(levels) = &self.kind {
            let mut seen = HashSet::new();
            for l in levels {
                if l.is_empty() {
                    return Err(format!("attribute '{}' has an empty level", self.name));
                }
                if !seen.insert(l.as_str()) {
                    return Err(format!("attribute '{}' repeats level '{}'", self.name, l));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Classification,
    Regression,
    Survival,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
            Task::Survival => "survival",
        }
    }

    pub fn from_name(name: &str) -> Option<Task> {
        match name {
            "classification" => Some(Task::Classification),
            "regression" => Some(Task::Regression),
            "survival" => Some(Task::Survival),
            _ => None,
        }
    }
}

/// Column-major table. Numeric cells hold the value, nominal cells the level
/// index as `f64`; missing cells are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    attributes: Vec<Attribute>,
    columns: Vec<Vec<f64>>,
    rows: usize,
    task: Option<Task>,
}

impl DataSet {
    /// Builds a dataset from row-major cells (`None` = missing).
    pub fn from_rows(attributes: Vec<Attribute>, rows: Vec<Vec<Option<f64>>>) -> Result<Self, DataError> {
        let mut columns = vec![Vec::with_capacity(rows.len()); attributes.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(DataError::Arity {
                    line: r + 1,
                    data_line: r + 1,
                    expected: attributes.len(),
                    found: row.len(),
                });
            }
            for (c, cell) in row.iter().enumerate() {
                columns[c].push(cell.unwrap_or(f64::NAN));
            }
        }
        Self::from_columns(attributes, columns)
    }

    pub fn from_columns(attributes: Vec<Attribute>, columns: Vec<Vec<f64>>) -> Result<Self, DataError> {
        if attributes.len() != columns.len() {
            return Err(DataError::InvalidValue {
                attribute: String::new(),
                message: format!("{} attributes but {} columns", attributes.len(), columns.len()),
            });
        }
        let rows = columns.first().map_or(0, Vec::len);
        for (attr, col) in attributes.iter().zip(&columns) {
            attr.validate().map_err(|message| DataError::InvalidValue {
                attribute: attr.name.clone(),
                message,
            })?;
            if col.len() != rows {
                return Err(DataError::InvalidValue {
                    attribute: attr.name.clone(),
                    message: format!("column has {} cells, expected {rows}", col.len()),
                });
            }
            if let Some(levels) = attr.levels() {
                for &v in col {
                    if !v.is_nan() && (v < 0.0 || v.fract() != 0.0 || v as usize >= levels.len()) {
                        return Err(DataError::InvalidValue {
                            attribute: attr.name.clone(),
                            message: format!("level index {v} out of range"),
                        });
                    }
                }
            } else if col.iter().any(|v| v.is_infinite()) {
                return Err(DataError::InvalidValue {
                    attribute: attr.name.clone(),
                    message: "infinite value".into(),
                });
            }
        }
        let mut names = HashSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(DataError::InvalidValue {
                    attribute: a.name.clone(),
                    message: "duplicate attribute name".into(),
                });
            }
        }
        let mut ds = DataSet {
            attributes,
            columns,
            rows,
            task: None,
        };
        ds.task = ds.infer_task_from_roles()?;
        Ok(ds)
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn task(&self) -> Option<Task> {
        self.task
    }

    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    /// Cell value, `None` when missing.
    #[inline]
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.columns[col][row];
        (!v.is_nan()).then_some(v)
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.columns[col][row].is_nan()
    }

    pub fn missing_count(&self) -> usize {
        self.columns.iter().flatten().filter(|v| v.is_nan()).count()
    }

    fn role_index(&self, role: Role) -> Option<usize> {
        self.attributes.iter().position(|a| a.role == role)
    }

    pub fn label_index(&self) -> Option<usize> {
        self.role_index(Role::Label)
    }

    pub fn survival_time_index(&self) -> Option<usize> {
        self.role_index(Role::SurvivalTime)
    }

    pub fn survival_status_index(&self) -> Option<usize> {
        self.role_index(Role::SurvivalStatus)
    }

    /// Index of the attribute that is printed as the rule consequence
    /// (label, or survival status for survival data).
    pub fn target_index(&self) -> Option<usize> {
        self.label_index().or_else(|| self.survival_status_index())
    }

    /// Indices of attributes usable in rule premises.
    pub fn regular_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == Role::Regular)
            .map(|(i, _)| i)
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.label_index().map(|i| self.column(i))
    }

    pub fn survival_times(&self) -> Option<&[f64]> {
        self.survival_time_index().map(|i| self.column(i))
    }

    /// Survival status as 0/1 event flags.
    pub fn survival_events(&self) -> Option<Vec<u8>> {
        self.survival_status_index()
            .map(|i| self.column(i).iter().map(|&v| (v == 1.0) as u8).collect())
    }

    /// Examples of the given nominal class.
    pub fn class_mask(&self, level: usize) -> Option<CoverageMask> {
        let labels = self.labels()?;
        Some(CoverageMask::from_fn(self.rows, |r| labels[r] == level as f64))
    }

    /// Restrict to the given rows (in the given order).
    pub fn subset(&self, rows: &[usize]) -> DataSet {
        DataSet {
            attributes: self.attributes.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            rows: rows.len(),
            task: self.task,
        }
    }

    pub(crate) fn with_roles(mut self, roles: &[(usize, Role)]) -> Result<Self, DataError> {
        for a in &mut self.attributes {
            a.role = Role::Regular;
        }
        for &(i, role) in roles {
            self.attributes[i].role = role;
        }
        self.task = self.infer_task_from_roles()?;
        Ok(self)
    }

    fn infer_task_from_roles(&self) -> Result<Option<Task>, DataError> {
        let count = |role| self.attributes.iter().filter(|a| a.role == role).count();
        let (labels, times, statuses) = (count(Role::Label), count(Role::SurvivalTime), count(Role::SurvivalStatus));
        if labels > 1 || times > 1 || statuses > 1 {
            return Err(DataError::ConflictingRoles("a role is assigned more than once".into()));
        }
        if labels == 1 && times + statuses > 0 {
            return Err(DataError::ConflictingRoles("label together with survival roles".into()));
        }
        if times != statuses {
            return Err(DataError::ConflictingRoles(
                "survival time and survival status must be assigned together".into(),
            ));
        }
        if labels == 1 {
            let idx = self.label_index().unwrap_or_default();
            let attr = &self.attributes[idx];
            if self.columns[idx].iter().any(|v| v.is_nan()) {
                return Err(DataError::InvalidValue {
                    attribute: attr.name.clone(),
                    message: "label has missing values".into(),
                });
            }
            return Ok(Some(if attr.is_numeric() {
                Task::Regression
            } else {
                Task::Classification
            }));
        }
        if times == 1 {
            let t = self.survival_time_index().unwrap_or_default();
            let s = self.survival_status_index().unwrap_or_default();
            let time_attr = &self.attributes[t];
            if !time_attr.is_numeric() || self.columns[t].iter().any(|v| v.is_nan() || *v < 0.0) {
                return Err(DataError::InvalidValue {
                    attribute: time_attr.name.clone(),
                    message: "survival time must be numeric, non-missing and >= 0".into(),
                });
            }
            let status_attr = &self.attributes[s];
            let status_ok = match status_attr.levels() {
                None => self.columns[s].iter().all(|&v| v == 0.0 || v == 1.0),
                Some(levels) => {
                    levels.iter().all(|l| l == "0" || l == "1") && !self.columns[s].iter().any(|v| v.is_nan())
                }
            };
            if !status_ok {
                return Err(DataError::InvalidValue {
                    attribute: status_attr.name.clone(),
                    message: "survival status values must be in {0, 1}".into(),
                });
            }
            return Ok(Some(Task::Survival));
        }
        Ok(None)
    }
}

/// Assigns label or survival roles by attribute name and derives the task.
pub fn set_roles(
    ds: DataSet,
    label: Option<&str>,
    survival_time: Option<&str>,
    survival_status: Option<&str>,
) -> Result<DataSet, DataError> {
    let find = |name: &str| {
        ds.attribute_index(name)
            .ok_or_else(|| DataError::UnknownAttribute(name.to_string()))
    };
    let roles = match (label, survival_time, survival_status) {
        (Some(l), None, None) => vec![(find(l)?, Role::Label)],
        (None, Some(t), Some(s)) => {
            let (t, s) = (find(t)?, find(s)?);
            if t == s {
                return Err(DataError::ConflictingRoles("survival time and status name the same attribute".into()));
            }
            vec![(t, Role::SurvivalTime), (s, Role::SurvivalStatus)]
        }
        (None, None, None) => return Err(DataError::ConflictingRoles("no role given".into())),
        _ => {
            return Err(DataError::ConflictingRoles(
                "give either a label or both survival time and survival status".into(),
            ))
        }
    };
    let mut ds = ds;
    // A nominal {0,1} status column is stored as its numeric value.
    if let Some(&(s, Role::SurvivalStatus)) = roles.get(1) {
        if let Some(levels) = ds.attributes[s].levels().map(<[String]>::to_vec) {
            let mut col = Vec::with_capacity(ds.rows);
            for &v in &ds.columns[s] {
                if v.is_nan() {
                    col.push(f64::NAN);
                    continue;
                }
                match levels[v as usize].as_str() {
                    "0" => col.push(0.0),
                    "1" => col.push(1.0),
                    other => {
                        return Err(DataError::InvalidValue {
                            attribute: ds.attributes[s].name.clone(),
                            message: format!("survival status value '{other}' is not 0 or 1"),
                        })
                    }
                }
            }
            ds.columns[s] = col;
            ds.attributes[s].kind = AttributeKind::Numeric;
        }
    }
    ds.with_roles(&roles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deals_like() -> DataSet {
        DataSet::from_rows(
            vec![
                Attribute::nominal("Gender", ["male", "female"]),
                Attribute::numeric("Age"),
                Attribute::nominal("Future Customer", ["yes", "no"]),
            ],
            vec![
                vec![Some(0.0), Some(30.0), Some(0.0)],
                vec![Some(1.0), Some(50.0), Some(1.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn label_role_gives_classification() {
        let ds = set_roles(deals_like(), Some("Future Customer"), None, None).unwrap();
        assert_eq!(ds.task(), Some(Task::Classification));
        assert_eq!(ds.label_index(), Some(2));
        assert_eq!(ds.regular_indices().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn numeric_label_gives_regression() {
        let ds = set_roles(deals_like(), Some("Age"), None, None).unwrap();
        assert_eq!(ds.task(), Some(Task::Regression));
    }

    #[test]
    fn survival_pair_gives_survival() {
        let ds = DataSet::from_rows(
            vec![
                Attribute::numeric("age"),
                Attribute::numeric("survival_time"),
                Attribute::numeric("survival_status"),
            ],
            vec![
                vec![Some(20.0), Some(5.0), Some(1.0)],
                vec![Some(30.0), Some(8.0), Some(0.0)],
            ],
        )
        .unwrap();
        let ds = set_roles(ds, None, Some("survival_time"), Some("survival_status")).unwrap();
        assert_eq!(ds.task(), Some(Task::Survival));
        assert_eq!(ds.survival_events().unwrap(), vec![1, 0]);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let err = set_roles(deals_like(), Some("missing_col"), None, None).unwrap_err();
        assert_eq!(err, DataError::UnknownAttribute("missing_col".into()));
    }

    #[test]
    fn label_and_survival_conflict() {
        let err = set_roles(deals_like(), Some("Gender"), Some("Age"), None).unwrap_err();
        assert!(matches!(err, DataError::ConflictingRoles(_)));
    }

    #[test]
    fn status_outside_zero_one_is_rejected() {
        let ds = DataSet::from_rows(
            vec![Attribute::numeric("t"), Attribute::numeric("s")],
            vec![vec![Some(1.0), Some(2.0)]],
        )
        .unwrap();
        let err = set_roles(ds, None, Some("t"), Some("s")).unwrap_err();
        assert!(matches!(err, DataError::InvalidValue { .. }));
    }

    #[test]
    fn nominal_status_is_converted() {
        let ds = DataSet::from_rows(
            vec![Attribute::numeric("t"), Attribute::nominal("s", ["0", "1"])],
            vec![vec![Some(1.0), Some(1.0)], vec![Some(2.0), Some(0.0)]],
        )
        .unwrap();
        let ds = set_roles(ds, None, Some("t"), Some("s")).unwrap();
        assert_eq!(ds.survival_events().unwrap(), vec![1, 0]);
        assert!(ds.attribute(1).is_numeric());
    }

    #[test]
    fn duplicate_levels_are_invalid() {
        let err = DataSet::from_rows(vec![Attribute::nominal("a", ["x", "x"])], vec![]).unwrap_err();
        assert!(matches!(err, DataError::InvalidValue { .. }));
    }
}
