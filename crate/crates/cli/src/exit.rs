//! Exit codes: 0 success, 1 I/O and other errors, 2 invalid input or a
//! failed verification, 3 an exhausted search or enumeration budget.

use balhyp_core::io::ParseError;
use balhyp_core::Error;
use thiserror::Error as ThisError;

pub const OK: i32 = 0;
pub const OTHER: i32 = 1;
pub const INVALID: i32 = 2;
pub const BUDGET: i32 = 3;

/// A check that ran to completion and said no.
#[derive(Debug, ThisError)]
#[error("{0}")]
pub struct Rejected(pub String);

pub fn code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<Rejected>().is_some()
            || cause.downcast_ref::<ParseError>().is_some()
        {
            return INVALID;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::TooLarge { .. }
                | Error::BudgetExhausted(_)
                | Error::NoPerfectMatching(_) => BUDGET,
                _ => INVALID,
            };
        }
    }
    OTHER
}
