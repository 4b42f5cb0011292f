//! Tabular datasets, ARFF/CSV ingestion, fold splitting and coverage bitsets.

mod arff;
mod csv_input;
mod dataset;
mod folds;
mod mask;

pub use arff::{parse_arff, write_arff};
pub use csv_input::parse_csv;
pub use dataset::{set_roles, Attribute, AttributeKind, DataSet, Role, Task};
pub use folds::{shuffled_folds, stratified_folds};
pub use mask::{mask_and, mask_count, mask_or, weighted_count, CoverageMask};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line} (data line {data_line}): expected {expected} values, found {found}")]
    Arity {
        line: usize,
        data_line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: value '{value}' is not a level of nominal attribute '{attribute}'")]
    UnknownLevel {
        line: usize,
        attribute: String,
        value: String,
    },
    #[error("line {line}: ragged row with {found} fields, expected {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("empty input")]
    Empty,
    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),
    #[error("conflicting roles: {0}")]
    ConflictingRoles(String),
    #[error("invalid value in attribute '{attribute}': {message}")]
    InvalidValue { attribute: String, message: String },
    #[error("mask length mismatch: {left} vs {right}")]
    MaskLength { left: usize, right: usize },
    #[error("invalid fold count {k} for {n} examples")]
    FoldCount { k: usize, n: usize },
    #[error("dataset has no task; assign roles first")]
    NoTask,
}
