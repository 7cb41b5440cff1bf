//! Construction of the 0/1 program: one binary variable per mapping match,
//! constraint and objective instances per context element, and the lowering
//! of Boolean constraint bodies to linear rows.

pub mod cnf;
mod generate;
pub mod linearize;
mod problem;

pub use generate::{
    apply_selection, build_objective, expand_contexts, find_mapping_matches, generate, generate_with_matches, instantiate_mappings,
    lower_sets, Binding, Encoded,
};
pub use linearize::{encode_formula, Atom, Cmp};
pub use problem::{CanonicalForm, IlpProblem, LinearTerm, MappingTable, Objective, Relation, Row, VarKind, Variable};

pub use crate::gipsl::ast::Sense;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("{item} at {element}: {message}")]
    Eval { item: String, element: String, message: String },
    #[error("cannot bound big-M: {0}")]
    BigM(String),
    #[error("applying selected match: {0}")]
    Apply(String),
}

#[cfg(test)]
mod tests;
