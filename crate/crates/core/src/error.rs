use thiserror::Error;

use crate::hypergraph::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid hypergraph: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("hypergraph must be n-balanced (part sizes {0:?})")]
    NotBalanced(Vec<usize>),

    #[error("vertex selection has two vertices in part {0}")]
    RepeatedPart(usize),

    #[error("vertex ({part}, {index}) out of range")]
    VertexOutOfRange { part: usize, index: u32 },

    #[error("expected {expected} parts, got {got}")]
    PartCount { expected: usize, got: usize },

    #[error("balanced set parts have unequal sizes {0:?}")]
    Unbalanced(Vec<usize>),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parameter regime invalid: {0}")]
    Regime(String),

    #[error("enumeration too large: {needed} exceeds budget {budget}")]
    TooLarge { needed: u128, budget: u128 },

    #[error("search budget exhausted after {0} attempts")]
    BudgetExhausted(u64),

    #[error("no perfect matching exists in the k-partite complement: {0}")]
    NoPerfectMatching(String),

    #[error("invalid matching: {0}")]
    BadMatching(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
