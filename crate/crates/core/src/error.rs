use thiserror::Error;

use crate::ocs::ElementId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("step {step} does not come after step {last}")]
    InputOrder { step: u64, last: u64 },
    #[error("malformed query at step {step}: elements must be pairwise distinct")]
    MalformedQuery { step: u64 },
    #[error("element {0} does not appear in the query sequence")]
    UnknownElement(ElementId),
    #[error("invalid subsequence windows: {0}")]
    InvalidWindows(String),
    #[error("input too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown input family `{0}`")]
    UnknownFamily(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),
    #[error("dual tables do not match the run: {0}")]
    TableMismatch(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
