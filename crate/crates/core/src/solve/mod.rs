//! Exact solving of the generated 0/1 programs, a brute-force oracle, and
//! CPLEX LP text for external solvers.

mod bnb;
mod brute;
mod lp_format;
pub mod simplex;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

pub use bnb::solve;
pub use brute::{brute_force, BRUTE_FORCE_MAX_VARS};
pub use lp_format::{export_lp, import_lp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Timeout,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub wall_ms: f64,
    /// LP bound at the root, in the problem's own sense.
    pub root_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: Status,
    /// Value per variable id; empty when no feasible point is known.
    pub assignment: Vec<f64>,
    pub objective_value: Option<f64>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(|(_, v)| **v > 0.5).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("objective is unbounded")]
    Unbounded,
    #[error("brute force supports at most {max} binary variables, got {got}")]
    TooManyVariables { got: usize, max: usize },
    #[error("LP line {line}: {message}")]
    LpSyntax { line: usize, message: String },
    #[error("LP export: {0}")]
    LpExport(String),
}

fn check_well_formed(p: &crate::encode::IlpProblem) -> Result<(), SolveError> {
    for (i, v) in p.variables.iter().enumerate() {
        if !v.lb.is_finite() || v.ub.is_nan() || v.lb > v.ub {
            return Err(SolveError::Malformed(format!("bad bounds on {} [{}, {}]", v.name, v.lb, v.ub)));
        }
        if v.is_integral() && (v.lb < 0.0 || v.ub > 1.0) {
            return Err(SolveError::Malformed(format!("integral variable {} (#{i}) is not 0/1", v.name)));
        }
    }
    let n = p.variables.len();
    let bad = |m: &std::collections::BTreeMap<usize, f64>| m.iter().any(|(&v, k)| v >= n || !k.is_finite());
    for r in &p.rows {
        if bad(&r.coeffs) || !r.rhs.is_finite() {
            return Err(SolveError::Malformed(format!("row {}", r.name)));
        }
    }
    if bad(&p.objective.terms) || !p.objective.constant.is_finite() {
        return Err(SolveError::Malformed("objective".into()));
    }
    Ok(())
}
