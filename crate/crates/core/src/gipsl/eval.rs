//! Generation-time evaluation of variable-free expressions.

use thiserror::Error;

use super::ast::{BinaryOp, UnaryOp};
use super::typed::{NodeRef, TExpr};
use crate::model::{Graph, Value};
use crate::pattern::Match;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct EvalError(pub String);

/// Result of evaluating an expression: a plain value or a node identity.
#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Value(Value),
    Node(String),
}

impl Val {
    pub fn into_value(self) -> Result<Value, EvalError> {
        match self {
            Val::Value(v) => Ok(v),
            Val::Node(n) => Err(EvalError(format!("node `{n}` used where a value is expected"))),
        }
    }
}

/// Bindings visible to an expression.
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    pub graph: &'a Graph,
    pub self_node: Option<&'a str>,
    pub self_match: Option<&'a Match>,
    /// Binding of the rule or pattern whose condition/actions are evaluated.
    pub bound: Option<&'a Match>,
    /// Current element of an enclosing set expression.
    pub element: Option<&'a Match>,
}

impl<'a> Scope<'a> {
    pub fn new(graph: &'a Graph) -> Self {
        Scope { graph, self_node: None, self_match: None, bound: None, element: None }
    }

    pub fn with_bound(graph: &'a Graph, bound: &'a Match) -> Self {
        Scope { bound: Some(bound), ..Scope::new(graph) }
    }

    pub fn resolve(&self, r: &NodeRef) -> Result<&'a str, EvalError> {
        let missing = |what: &str| EvalError(format!("unbound {what}"));
        match r {
            NodeRef::SelfNode => self.self_node.ok_or_else(|| missing("self")),
            NodeRef::SelfMatch(n) => {
                self.self_match.and_then(|m| m.node(n)).ok_or_else(|| missing(&format!("self.nodes().{n}")))
            }
            NodeRef::Bound(n) => self.bound.and_then(|m| m.node(n)).ok_or_else(|| missing(n)),
            NodeRef::Element(n) => {
                self.element.and_then(|m| m.node(n)).ok_or_else(|| missing(&format!("element node {n}")))
            }
        }
    }

    pub fn attr(&self, r: &NodeRef, attr: &str) -> Result<Value, EvalError> {
        let id = self.resolve(r)?;
        self.graph
            .attr(id, attr)
            .cloned()
            .ok_or_else(|| EvalError(format!("node `{id}` has no attribute `{attr}`")))
    }
}

pub fn eval(e: &TExpr, s: &Scope) -> Result<Val, EvalError> {
    match e {
        TExpr::Const(v) => Ok(Val::Value(v.clone())),
        TExpr::Node(r) => Ok(Val::Node(s.resolve(r)?.to_string())),
        TExpr::Attr(r, a) => Ok(Val::Value(s.attr(r, a)?)),
        TExpr::SelfVar | TExpr::Sum(_) => {
            Err(EvalError("decision variables cannot be evaluated at generation time".into()))
        }
        TExpr::Unary(op, inner) => {
            let v = eval(inner, s)?.into_value()?;
            unary(*op, &v).map(Val::Value)
        }
        TExpr::Binary(op, a, b) => {
            // short-circuit keeps conditions like `x != 0 & y / x > 1` safe
            if matches!(op, BinaryOp::And | BinaryOp::Or) {
                let l = as_bool(&eval(a, s)?.into_value()?)?;
                if (*op == BinaryOp::And && !l) || (*op == BinaryOp::Or && l) {
                    return Ok(Val::Value(Value::Bool(l)));
                }
                let r = as_bool(&eval(b, s)?.into_value()?)?;
                return Ok(Val::Value(Value::Bool(r)));
            }
            let l = eval(a, s)?;
            let r = eval(b, s)?;
            binary(*op, &l, &r).map(Val::Value)
        }
    }
}

pub fn eval_bool(e: &TExpr, s: &Scope) -> Result<bool, EvalError> {
    as_bool(&eval(e, s)?.into_value()?)
}

pub fn eval_f64(e: &TExpr, s: &Scope) -> Result<f64, EvalError> {
    let v = eval(e, s)?.into_value()?;
    v.as_f64().ok_or_else(|| EvalError(format!("expected a number, found {v}")))
}

fn as_bool(v: &Value) -> Result<bool, EvalError> {
    v.as_bool().ok_or_else(|| EvalError(format!("expected a boolean, found {v}")))
}

fn num(v: &Value) -> Result<f64, EvalError> {
    v.as_f64().ok_or_else(|| EvalError(format!("expected a number, found {v}")))
}

pub fn unary(op: UnaryOp, v: &Value) -> Result<Value, EvalError> {
    Ok(match op {
        UnaryOp::Not => Value::Bool(!as_bool(v)?),
        UnaryOp::Neg => match v {
            Value::Int(i) => Value::Int(i.checked_neg().ok_or_else(|| EvalError("integer overflow".into()))?),
            other => Value::Real(-num(other)?),
        },
        UnaryOp::Sin => Value::Real(num(v)?.sin()),
        UnaryOp::Cos => Value::Real(num(v)?.cos()),
        UnaryOp::Sqrt => {
            let x = num(v)?;
            if x < 0.0 {
                return Err(EvalError(format!("sqrt of negative value {x}")));
            }
            Value::Real(x.sqrt())
        }
    })
}

pub fn binary(op: BinaryOp, l: &Val, r: &Val) -> Result<Value, EvalError> {
    use BinaryOp::*;
    if let (Val::Node(a), Val::Node(b)) = (l, r) {
        return match op {
            Eq => Ok(Value::Bool(a == b)),
            Ne => Ok(Value::Bool(a != b)),
            _ => Err(EvalError(format!("operator `{}` not defined on nodes", op.symbol()))),
        };
    }
    let (Val::Value(a), Val::Value(b)) = (l, r) else {
        return Err(EvalError("cannot compare a node with a value".into()));
    };
    let overflow = || EvalError("integer overflow".into());
    Ok(match op {
        And => Value::Bool(as_bool(a)? && as_bool(b)?),
        Or => Value::Bool(as_bool(a)? || as_bool(b)?),
        Add | Sub | Mul => match (a, b) {
            (Value::Int(x), Value::Int(y)) => Value::Int(
                match op {
                    Add => x.checked_add(*y),
                    Sub => x.checked_sub(*y),
                    _ => x.checked_mul(*y),
                }
                .ok_or_else(overflow)?,
            ),
            _ => {
                let (x, y) = (num(a)?, num(b)?);
                Value::Real(match op {
                    Add => x + y,
                    Sub => x - y,
                    _ => x * y,
                })
            }
        },
        Div => {
            let (x, y) = (num(a)?, num(b)?);
            if y == 0.0 {
                return Err(EvalError("division by zero".into()));
            }
            Value::Real(x / y)
        }
        Eq | Ne => {
            let equal = match (a, b) {
                (Value::Bool(x), Value::Bool(y)) => x == y,
                (Value::Str(x), Value::Str(y)) => x == y,
                _ => num(a)? == num(b)?,
            };
            Value::Bool(equal == (op == Eq))
        }
        Lt | Le | Gt | Ge => {
            let (x, y) = (num(a)?, num(b)?);
            Value::Bool(match op {
                Lt => x < y,
                Le => x <= y,
                Gt => x > y,
                _ => x >= y,
            })
        }
    })
}
