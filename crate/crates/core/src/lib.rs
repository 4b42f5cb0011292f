//! Sequential covering rule induction for classification, regression and
//! survival analysis, with user-guided induction and a batch experiment runner.

pub mod data;
pub mod experiment;
pub mod format;
pub mod induction;
pub mod knowledge;
pub mod measures;
pub mod prediction;
pub mod stats;
