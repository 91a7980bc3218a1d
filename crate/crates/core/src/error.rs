use std::path::PathBuf;

use thiserror::Error;

use crate::sim::SimTime;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("event scheduled at {fire_at}s but the clock is already at {now}s")]
    ScheduleInPast { fire_at: SimTime, now: SimTime },
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("results file: {0}")]
    Results(String),
    #[error("{failed} of {total} sweep runs failed")]
    SweepFailures { failed: usize, total: usize },
}
