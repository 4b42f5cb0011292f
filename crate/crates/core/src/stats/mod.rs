//! Significance tests and the Kaplan-Meier estimator.

mod contingency;
mod survival;

pub use contingency::{chi_square_2x2, chi_square_upper_tail, fisher_exact_greater};
pub use survival::{kaplan_meier, log_rank, union_grid, LogRankScorer, SurvivalEstimate};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("counts must be integral, got {0}")]
    NonIntegral(f64),
    #[error("invalid contingency table: {0}")]
    InvalidTable(String),
    #[error("empty input")]
    Empty,
    #[error("input length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid survival data: {0}")]
    InvalidSurvival(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, p_value: f64) -> Self {
        TestResult {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
        }
    }

    pub fn degenerate() -> Self {
        TestResult {
            statistic: 0.0,
            p_value: 1.0,
        }
    }
}
