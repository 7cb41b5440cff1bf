//! Exhaustive enumeration, used as a test oracle.

use std::time::Instant;

use super::simplex::{Lp, LpOutcome};
use super::{check_well_formed, Solution, SolveError, SolveStats, Status};
use crate::encode::{IlpProblem, Sense};

pub const BRUTE_FORCE_MAX_VARS: usize = 22;

/// Tries every 0/1 assignment in lexicographic order (variable 0 most
/// significant) and keeps the first optimum. Continuous variables are
/// resolved per assignment by a small LP.
pub fn brute_force(p: &IlpProblem) -> Result<Solution, SolveError> {
    check_well_formed(p)?;
    let start = Instant::now();
    let ints: Vec<usize> = (0..p.variables.len()).filter(|&v| p.variables[v].is_integral()).collect();
    let conts: Vec<usize> = (0..p.variables.len()).filter(|&v| !p.variables[v].is_integral()).collect();
    if ints.len() > BRUTE_FORCE_MAX_VARS {
        return Err(SolveError::TooManyVariables { got: ints.len(), max: BRUTE_FORCE_MAX_VARS });
    }
    let sign = if p.objective.sense == Sense::Max { -1.0 } else { 1.0 };
    let k = ints.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut x: Vec<f64> = p.variables.iter().map(|v| v.lb).collect();
    let mut count = 0u64;
    for bits in 0u64..1 << k {
        let mut in_bounds = true;
        for (pos, &v) in ints.iter().enumerate() {
            let val = (bits >> (k - 1 - pos) & 1) as f64;
            let var = &p.variables[v];
            in_bounds &= var.lb <= val && val <= var.ub;
            x[v] = val;
        }
        if !in_bounds {
            continue;
        }
        count += 1;
        if !conts.is_empty() && !resolve_continuous(p, &conts, &mut x, sign)? {
            continue;
        }
        let tol = if conts.is_empty() { 1e-9 } else { 1e-7 };
        if !p.rows.iter().all(|r| r.satisfied(&x, tol * r.rhs.abs().max(1.0))) {
            continue;
        }
        let value = sign * p.objective.value(&x);
        if best.as_ref().is_none_or(|(b, _)| value < b - 1e-12 * b.abs().max(1.0)) {
            best = Some((value, x.clone()));
        }
    }
    let stats = SolveStats { nodes: count, wall_ms: start.elapsed().as_secs_f64() * 1000.0, root_bound: None };
    Ok(match best {
        Some((_, x)) => Solution { status: Status::Optimal, objective_value: Some(p.objective.value(&x)), assignment: x, stats },
        None => Solution { status: Status::Infeasible, assignment: Vec::new(), objective_value: None, stats },
    })
}

/// Optimizes the continuous variables with the integral ones held at `x`.
fn resolve_continuous(p: &IlpProblem, conts: &[usize], x: &mut [f64], sign: f64) -> Result<bool, SolveError> {
    let mut col = vec![usize::MAX; x.len()];
    for (j, &v) in conts.iter().enumerate() {
        col[v] = j;
    }
    let mut lp = Lp {
        c: conts.iter().map(|v| sign * p.objective.terms.get(v).copied().unwrap_or(0.0)).collect(),
        rows: Vec::new(),
        lb: conts.iter().map(|&v| p.variables[v].lb).collect(),
        ub: conts.iter().map(|&v| p.variables[v].ub).collect(),
    };
    for r in &p.rows {
        let mut rhs = r.rhs;
        let mut coeffs = Vec::new();
        for (&v, &k) in &r.coeffs {
            if col[v] == usize::MAX {
                rhs -= k * x[v];
            } else {
                coeffs.push((col[v], k));
            }
        }
        lp.rows.push((coeffs, r.relation, rhs));
    }
    match lp.solve() {
        LpOutcome::Optimal { x: y, .. } => {
            for (j, &v) in conts.iter().enumerate() {
                x[v] = y[j];
            }
            Ok(true)
        }
        LpOutcome::Infeasible | LpOutcome::Failed => Ok(false),
        LpOutcome::Unbounded => Err(SolveError::Unbounded),
    }
}
