//! Typechecked representation consumed by the matcher and the encoder.

use super::ast::{BinaryOp, Sense, UnaryOp};
use super::Diagnostic;
use crate::model::Value;
use crate::pattern::{Pattern, Rule};

/// Reference to a graph node inside an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRef {
    /// `self` in a class context.
    SelfNode,
    /// `self.nodes().N` in a mapping or pattern context.
    SelfMatch(String),
    /// A pattern node inside a rule or pattern declaration.
    Bound(String),
    /// `v.nodes().N` where `v` is the element of an enclosing set expression.
    Element(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TExpr {
    Const(Value),
    Node(NodeRef),
    Attr(NodeRef, String),
    /// The decision variable of the mapping match bound to `self`.
    SelfVar,
    Unary(UnaryOp, Box<TExpr>),
    Binary(BinaryOp, Box<TExpr>, Box<TExpr>),
    Sum(Box<SumExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumExpr {
    /// Index into [`TypedSpec::mappings`].
    pub mapping: usize,
    pub filter: Option<TExpr>,
    pub body: TExpr,
}

impl TExpr {
    /// True if the expression mentions a decision variable.
    pub fn has_vars(&self) -> bool {
        match self {
            TExpr::Const(_) | TExpr::Node(_) | TExpr::Attr(..) => false,
            TExpr::SelfVar | TExpr::Sum(_) => true,
            TExpr::Unary(_, e) => e.has_vars(),
            TExpr::Binary(_, a, b) => a.has_vars() || b.has_vars(),
        }
    }

    /// Splits a conjunction into its top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&TExpr> {
        match self {
            TExpr::Binary(BinaryOp::And, a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    /// Names of `Bound` pattern nodes referenced by this expression.
    pub fn bound_nodes(&self, out: &mut Vec<String>) {
        match self {
            TExpr::Node(NodeRef::Bound(n)) | TExpr::Attr(NodeRef::Bound(n), _) => out.push(n.clone()),
            TExpr::Unary(_, e) => e.bound_nodes(out),
            TExpr::Binary(_, a, b) => {
                a.bound_nodes(out);
                b.bound_nodes(out);
            }
            TExpr::Sum(s) => {
                if let Some(f) = &s.filter {
                    f.bound_nodes(out);
                }
                s.body.bound_nodes(out);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternRef {
    Declared(usize),
    RuleLhs(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypedContext {
    Class(String),
    Pattern(PatternRef),
    /// Index into [`TypedSpec::mappings`].
    Mapping(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub name: String,
    /// Index into [`TypedSpec::rules`].
    pub rule: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedConstraint {
    /// Human-readable origin, used in diagnostics.
    pub label: String,
    pub context: TypedContext,
    pub body: TExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedObjective {
    pub name: String,
    pub context: TypedContext,
    pub body: TExpr,
}

/// Weighted combination of named objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalObjective {
    pub sense: Sense,
    /// `(objective index, weight)`, one entry per objective mentioned.
    pub weights: Vec<(usize, f64)>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedSpec {
    pub rules: Vec<Rule>,
    pub patterns: Vec<Pattern>,
    pub mappings: Vec<Mapping>,
    pub constraints: Vec<TypedConstraint>,
    pub objectives: Vec<TypedObjective>,
    pub global: GlobalObjective,
    pub warnings: Vec<Diagnostic>,
}

impl TypedSpec {
    pub fn pattern(&self, r: PatternRef) -> &Pattern {
        match r {
            PatternRef::Declared(i) => &self.patterns[i],
            PatternRef::RuleLhs(i) => &self.rules[i].lhs,
        }
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn mapping_index(&self, name: &str) -> Option<usize> {
        self.mappings.iter().position(|m| m.name == name)
    }

    pub fn mapping_rule(&self, mapping: usize) -> &Rule {
        &self.rules[self.mappings[mapping].rule]
    }
}
