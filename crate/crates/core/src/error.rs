use thiserror::Error;

use crate::types::{Group, Label};

/// Errors raised across calibration, oracle solving and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cell (label {label}, group {group}) has no samples")]
    EmptyCell { label: Label, group: Group },

    #[error("NP order infeasible: n = {n} is too small for alpha = {alpha}, delta = {delta} (need (1-alpha)^n <= delta)")]
    Infeasible { n: usize, alpha: f64, delta: f64 },

    #[error("order {order} out of range 1..={len}")]
    OutOfRange { order: usize, len: usize },

    #[error("no candidate pair satisfies the disparity-violation bound (epsilon = {epsilon}, gamma = {gamma})")]
    NoViablePair { epsilon: f64, gamma: f64 },

    #[error("no threshold candidates above the pivot in group {group} (l = n = {n})")]
    EmptyCandidates { group: Group, n: usize },

    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),

    #[error("likelihood ratio is not monotone in group {group}: {reason}")]
    NonMonotoneLikelihoodRatio { group: Group, reason: String },

    #[error("training data contains a single label class")]
    DegenerateLabels,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid group or label at line {line}: {value:?}")]
    InvalidGroupOrLabel { line: usize, value: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
