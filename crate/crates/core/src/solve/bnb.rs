//! Depth-first branch-and-bound over the integral variables.

use std::time::Instant;

use super::simplex::{Lp, LpOutcome};
use super::{check_well_formed, Limits, Solution, SolveError, SolveStats, Status};
use crate::encode::{IlpProblem, Sense};

const INT_TOL: f64 = 1e-6;

struct Search<'a> {
    p: &'a IlpProblem,
    /// Objective in minimization form.
    c: Vec<f64>,
    constant: f64,
    sign: f64,
    integral: Vec<bool>,
    row_tol: f64,
    /// Smallest possible objective improvement between integral points, or 0.
    granularity: f64,
    incumbent: Option<(f64, Vec<f64>)>,
}

enum NodeBound {
    Infeasible,
    Bound { value: f64, x: Option<Vec<f64>> },
}

/// Exact optimum of `p` unless a limit is hit first, in which case the
/// best incumbent (if any) is returned with [`Status::Timeout`].
pub fn solve(p: &IlpProblem, limits: Limits) -> Result<Solution, SolveError> {
    check_well_formed(p)?;
    let start = Instant::now();
    let sign = if p.objective.sense == Sense::Max { -1.0 } else { 1.0 };
    let n = p.variables.len();
    let mut c = vec![0.0; n];
    for (&v, &k) in &p.objective.terms {
        c[v] = sign * k;
    }
    let integral: Vec<bool> = p.variables.iter().map(|v| v.is_integral()).collect();
    let mut s = Search {
        p,
        c,
        constant: sign * p.objective.constant,
        sign,
        row_tol: if integral.iter().all(|&b| b) { 1e-9 } else { 1e-7 },
        granularity: granularity(p),
        integral,
        incumbent: None,
    };
    let one_first = p.objective.sense == Sense::Min && p.objective.terms.values().all(|&k| k >= 0.0);

    let mut stats = SolveStats::default();
    let root: Vec<(f64, f64)> = p.variables.iter().map(|v| (v.lb, v.ub)).collect();
    let mut stack = vec![root];
    let mut timed_out = false;
    while let Some(bounds) = stack.pop() {
        if limits.nodes.is_some_and(|max| stats.nodes >= max) || limits.time.is_some_and(|t| start.elapsed() >= t) {
            timed_out = true;
            break;
        }
        stats.nodes += 1;
        let (value, x) = match s.relax(&bounds)? {
            NodeBound::Infeasible => continue,
            NodeBound::Bound { value, x } => (value, x),
        };
        if stats.nodes == 1 {
            stats.root_bound = Some(sign * value);
        }
        if let Some((inc, _)) = &s.incumbent {
            let tol = 1e-9 * inc.abs().max(1.0);
            let cut = if s.granularity > 0.0 { inc - s.granularity + tol } else { inc - tol };
            if value >= cut {
                continue;
            }
        }
        let branch = match &x {
            Some(x) => match s.most_fractional(&bounds, x) {
                Some(v) => Some(v),
                None => {
                    if s.offer(x) {
                        continue;
                    }
                    s.first_free(&bounds)
                }
            },
            None => s.first_free(&bounds),
        };
        let Some(v) = branch else {
            if x.is_none() && !s.has_continuous() {
                let point: Vec<f64> = bounds.iter().map(|b| b.0).collect();
                s.offer(&point);
            }
            continue;
        };
        let order = if one_first { [0.0, 1.0] } else { [1.0, 0.0] };
        for val in order {
            let mut child = bounds.clone();
            child[v] = (val, val);
            stack.push(child);
        }
    }
    stats.wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    let status = if timed_out {
        Status::Timeout
    } else if s.incumbent.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    let (objective_value, assignment) = match s.incumbent {
        Some((_, x)) => (Some(p.objective.value(&x)), x),
        None => (None, Vec::new()),
    };
    Ok(Solution { status, assignment, objective_value, stats })
}

/// `1/d` for the smallest `d ≤ 1024` making every objective coefficient
/// integral, provided only integral variables appear in the objective.
fn granularity(p: &IlpProblem) -> f64 {
    let terms = &p.objective.terms;
    if terms.iter().any(|(&v, _)| !p.variables[v].is_integral()) || terms.values().all(|&k| k == 0.0) {
        return 0.0;
    }
    (1..=1024u32)
        .map(f64::from)
        .find(|d| terms.values().all(|k| (k * d - (k * d).round()).abs() <= 1e-9 * (k * d).abs().max(1.0)))
        .map_or(0.0, |d| 1.0 / d)
}

impl Search<'_> {
    fn has_continuous(&self) -> bool {
        self.integral.iter().any(|b| !b)
    }

    /// LP relaxation with fixed variables substituted out.
    fn relax(&self, bounds: &[(f64, f64)]) -> Result<NodeBound, SolveError> {
        let n = bounds.len();
        let mut col = vec![usize::MAX; n];
        let mut free = Vec::new();
        let mut fixed_obj = self.constant;
        for v in 0..n {
            let (l, u) = bounds[v];
            if l == u {
                fixed_obj += self.c[v] * l;
            } else {
                col[v] = free.len();
                free.push(v);
            }
        }
        let mut lp = Lp {
            c: free.iter().map(|&v| self.c[v]).collect(),
            rows: Vec::with_capacity(self.p.rows.len()),
            lb: free.iter().map(|&v| bounds[v].0).collect(),
            ub: free.iter().map(|&v| bounds[v].1).collect(),
        };
        for r in &self.p.rows {
            let mut rhs = r.rhs;
            let mut coeffs = Vec::new();
            for (&v, &k) in &r.coeffs {
                if col[v] == usize::MAX {
                    rhs -= k * bounds[v].0;
                } else {
                    coeffs.push((col[v], k));
                }
            }
            if coeffs.is_empty() {
                if !r.relation.holds(0.0, rhs, self.row_tol * rhs.abs().max(1.0)) {
                    return Ok(NodeBound::Infeasible);
                }
                continue;
            }
            lp.rows.push((coeffs, r.relation, rhs));
        }
        Ok(match lp.solve() {
            LpOutcome::Infeasible => NodeBound::Infeasible,
            LpOutcome::Unbounded => return Err(SolveError::Unbounded),
            LpOutcome::Optimal { x, value } => {
                let mut full: Vec<f64> = bounds.iter().map(|b| b.0).collect();
                for (j, &v) in free.iter().enumerate() {
                    full[v] = x[j];
                }
                NodeBound::Bound { value: value + fixed_obj, x: Some(full) }
            }
            LpOutcome::Failed => {
                let bound = free.iter().map(|&v| (self.c[v] * bounds[v].0).min(self.c[v] * bounds[v].1)).sum::<f64>();
                NodeBound::Bound { value: bound + fixed_obj, x: None }
            }
        })
    }

    /// Integral variable farthest from integrality; lowest id on ties.
    fn most_fractional(&self, bounds: &[(f64, f64)], x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (v, &xv) in x.iter().enumerate() {
            if !self.integral[v] || bounds[v].0 == bounds[v].1 {
                continue;
            }
            let frac = (xv - xv.round()).abs();
            if frac > INT_TOL && best.is_none_or(|(_, f)| frac > f + 1e-12) {
                best = Some((v, frac));
            }
        }
        best.map(|(v, _)| v)
    }

    fn first_free(&self, bounds: &[(f64, f64)]) -> Option<usize> {
        (0..bounds.len()).find(|&v| self.integral[v] && bounds[v].0 != bounds[v].1)
    }

    /// Rounds integral entries; records the point if feasible and better.
    /// Returns false if rounding broke feasibility.
    fn offer(&mut self, x: &[f64]) -> bool {
        let point: Vec<f64> =
            x.iter().zip(&self.integral).map(|(&v, &int)| if int { v.round() } else { v }).collect();
        if !self.p.rows.iter().all(|r| r.satisfied(&point, self.row_tol * r.rhs.abs().max(1.0))) {
            return false;
        }
        let value = self.sign * self.p.objective.value(&point);
        if self.incumbent.as_ref().is_none_or(|(inc, _)| value < *inc) {
            self.incumbent = Some((value, point));
        }
        true
    }
}
