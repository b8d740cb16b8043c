//! Finite-domain satisfiability for path constraints.
//!
//! Variables range over the constants of the formula plus fresh witnesses
//! (see [`crate::value::DomainBuilder`]); search is a depth-first walk with
//! three-valued partial evaluation for pruning.

mod eval;
mod search;
mod symbolize;

pub use eval::{eval_formula, eval_term};
pub use search::{check_sat, enumerate_values, infer_sorts, Model, Problem, SatOutcome, ValueOutcome, DEFAULT_SOLVER_BUDGET};
pub use symbolize::{symbolize, Symbolized};
