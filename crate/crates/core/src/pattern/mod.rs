//! Graph patterns, transformation rules, batch matching and rule application.

mod apply;
mod matcher;

pub use apply::{apply_rule, revalidate};
pub use matcher::{find_matches, find_matches_brute_force};

use std::fmt;

use thiserror::Error;

use crate::gipsl::TExpr;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternNode {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternEdge {
    pub name: String,
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

/// Precondition graph with an optional attribute condition over its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub name: String,
    pub nodes: Vec<PatternNode>,
    pub edges: Vec<PatternEdge>,
    pub condition: Option<TExpr>,
}

impl Pattern {
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn node(&self, name: &str) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn edge(&self, name: &str) -> Option<&PatternEdge> {
        self.edges.iter().find(|e| e.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Creates a node; unspecified attributes get the default of their kind.
    CreateNode { name: String, ty: String, attrs: Vec<(String, TExpr)> },
    CreateEdge { ty: String, src: String, tgt: String },
    /// Deletes the graph edge realizing the named pattern edge.
    DeleteEdge { edge: String },
    DeleteNode { node: String },
    SetAttr { node: String, attr: String, value: TExpr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub name: String,
    pub lhs: Pattern,
    pub actions: Vec<Action>,
}

/// Binding of every pattern node to a distinct graph node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub pattern: String,
    /// `(pattern node, graph node id)` in pattern declaration order.
    pub binding: Vec<(String, String)>,
}

impl Match {
    pub fn node(&self, pattern_node: &str) -> Option<&str> {
        self.binding.iter().find(|(p, _)| p == pattern_node).map(|(_, g)| g.as_str())
    }

    pub fn bound_ids(&self) -> impl Iterator<Item = &str> {
        self.binding.iter().map(|(_, g)| g.as_str())
    }
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pattern)?;
        for (i, (p, g)) in self.binding.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}={g}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("stale match {0}: binding no longer valid, rematch required")]
    StaleMatch(String),
    #[error("evaluation failed in rule `{rule}`: {message}")]
    Eval { rule: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
