//! Typed attributed graphs: schema, instances, and mutation deltas.

mod delta;
mod format;
mod graph;
mod metamodel;

pub use delta::{AttrUpdate, CreatedEdge, CreatedNode, GraphDelta};
pub use format::{load_graph, load_metamodel, load_model, serialize_graph, serialize_metamodel, serialize_model};
pub use graph::{Edge, Graph, Node, Value};
pub use metamodel::{AttrDecl, AttrKind, EdgeType, Metamodel, NodeType};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("duplicate type `{0}`")]
    DuplicateType(String),
    #[error("duplicate attribute `{attribute}` on node type `{node_type}`")]
    DuplicateAttribute { node_type: String, attribute: String },
    #[error("cyclic supertype chain through `{0}`")]
    CyclicSupertype(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("no node with id `{0}`")]
    MissingNode(String),
    #[error("no edge with id `{0}`")]
    MissingEdge(String),
    #[error("element `{id}` does not conform: {reason}")]
    Nonconforming { id: String, reason: String },
}

#[cfg(test)]
mod tests;
