//! Backward symbolic execution over the trimmed ICFG.

mod engine;
mod term;
mod trans;

pub use engine::{
    extract_path_constraints, stmt_ref, target_nodes, PathConstraint, SymexecError, DEFAULT_EXPANSION_BUDGET,
    OCCURRENCE_CAP,
};
pub use term::{Atom, Formula, Rel, TargetAtom, Term};
pub use trans::{field_path, target_atom, trans, Step};
