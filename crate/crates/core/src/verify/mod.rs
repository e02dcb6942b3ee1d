//! Brute-force equivalence checks between an if-else program and its MINLP.

mod check;
mod grid;
mod interp;
mod report;

pub use check::{check_backward, check_forward, verify, MAX_ASSIGNMENTS};
pub use grid::{GridSpec, DEFAULT_PER_DIM, MAX_POINTS};
pub use interp::{admissible, comparison_holds_tol, condition_holds_tol, interpret, interpret_traced, Env, MAX_RUNS};
pub use report::{BackwardReport, ClipWarning, EquivalenceReport, Failure, ForwardReport};

pub use crate::normalize::truth_table_equiv;
