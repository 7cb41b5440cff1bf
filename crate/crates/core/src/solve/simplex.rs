//! Dense bounded-variable primal simplex, two phases.

use crate::encode::Relation;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
    /// Iteration limit or numerical breakdown.
    Failed,
}

/// Sparse `(coefficients, relation, rhs)`.
pub type LpRow = (Vec<(usize, f64)>, Relation, f64);

/// `min c·x` subject to `rows` and `lb ≤ x ≤ ub`. Lower bounds must be finite.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub c: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum At {
    Lower,
    Upper,
    Basic,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Current value of every column.
    x: Vec<f64>,
    at: Vec<At>,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl Lp {
    pub fn solve(&self) -> LpOutcome {
        let n = self.c.len();
        if self.lb.iter().any(|l| !l.is_finite()) {
            return LpOutcome::Failed;
        }
        if self.lb.iter().zip(&self.ub).any(|(l, u)| l > u) {
            return LpOutcome::Infeasible;
        }
        let m = self.rows.len();
        // dense rows in ≤ or = form with a slack column each
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut eq = Vec::with_capacity(m);
        for (coeffs, rel, rhs) in &self.rows {
            let sign = if *rel == Relation::Ge { -1.0 } else { 1.0 };
            let mut row = vec![0.0; n];
            for &(v, k) in coeffs {
                row[v] += sign * k;
            }
            a.push(row);
            b.push(sign * rhs);
            eq.push(*rel == Relation::Eq);
        }
        let mut x0: Vec<f64> = self.lb.clone();
        let residual: Vec<f64> = (0..m).map(|i| b[i] - dot(&a[i], &x0)).collect();
        let needs_art: Vec<bool> = (0..m).map(|i| eq[i] || residual[i] < 0.0).collect();
        let arts: Vec<usize> = (0..m).filter(|&i| needs_art[i]).collect();
        let cols = n + m + arts.len();

        let mut lb = self.lb.clone();
        let mut ub = self.ub.clone();
        for &is_eq in &eq {
            lb.push(0.0);
            ub.push(if is_eq { 0.0 } else { f64::INFINITY });
        }
        lb.extend(arts.iter().map(|_| 0.0));
        ub.extend(arts.iter().map(|_| f64::INFINITY));
        x0.resize(cols, 0.0);

        let mut t = vec![vec![0.0; cols]; m];
        let mut basis = vec![0; m];
        let mut at = vec![At::Lower; cols];
        let mut k = 0;
        for i in 0..m {
            let sign = if residual[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = sign * a[i][j];
            }
            t[i][n + i] = sign;
            if needs_art[i] {
                let col = n + m + k;
                t[i][col] = 1.0;
                basis[i] = col;
                x0[col] = residual[i].abs();
                k += 1;
            } else {
                basis[i] = n + i;
                x0[n + i] = residual[i];
            }
            at[basis[i]] = At::Basic;
        }
        let mut tab = Tableau { t, basis, x: x0, at, lb, ub };
        let limit = 50 * (m + cols) + 1000;

        if !arts.is_empty() {
            let mut cost = vec![0.0; cols];
            for c in &mut cost[n + m..] {
                *c = 1.0;
            }
            match tab.run(&cost, limit) {
                Some(true) => {}
                _ => return LpOutcome::Failed,
            }
            let infeas: f64 = (n + m..cols).map(|j| tab.x[j]).sum();
            let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            if infeas > PHASE1_TOL * scale {
                return LpOutcome::Infeasible;
            }
            for j in n + m..cols {
                tab.ub[j] = 0.0;
                if tab.at[j] != At::Basic {
                    tab.x[j] = 0.0;
                    tab.at[j] = At::Lower;
                }
            }
        }
        let mut cost = self.c.clone();
        cost.resize(cols, 0.0);
        match tab.run(&cost, limit) {
            Some(true) => {
                let x: Vec<f64> = tab.x[..n].to_vec();
                let value = dot(&self.c, &x);
                LpOutcome::Optimal { x, value }
            }
            Some(false) => LpOutcome::Unbounded,
            None => LpOutcome::Failed,
        }
    }
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(a, x)| a * x).sum()
}

impl Tableau {
    /// Minimizes `cost`. `Some(true)` optimal, `Some(false)` unbounded,
    /// `None` on iteration limit.
    fn run(&mut self, cost: &[f64], limit: usize) -> Option<bool> {
        let cols = cost.len();
        let m = self.basis.len();
        let mut d = cost.to_vec();
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(&self.t[i]) {
                    *dj -= cb * tij;
                }
            }
        }
        let mut streak = 0;
        for _ in 0..limit {
            let bland = streak > DEGENERATE_STREAK;
            let mut enter: Option<(usize, f64)> = None;
            for (j, &dj) in d.iter().enumerate().take(cols) {
                let gain = match self.at[j] {
                    At::Lower if self.ub[j] > self.lb[j] && dj < -COST_TOL => -dj,
                    At::Upper if dj > COST_TOL => dj,
                    _ => continue,
                };
                if bland {
                    enter = Some((j, gain));
                    break;
                }
                if enter.is_none_or(|(_, g)| gain > g) {
                    enter = Some((j, gain));
                }
            }
            let Some((q, _)) = enter else { return Some(true) };
            let dir = if self.at[q] == At::Lower { 1.0 } else { -1.0 };

            let mut step = self.ub[q] - self.lb[q];
            let mut leave: Option<(usize, bool, f64)> = None;
            for i in 0..m {
                let alpha = dir * self.t[i][q];
                let bv = self.basis[i];
                let (lim, to_upper) = if alpha > PIVOT_TOL {
                    ((self.x[bv] - self.lb[bv]) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.ub[bv].is_finite() {
                    ((self.ub[bv] - self.x[bv]) / -alpha, true)
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                let better = match leave {
                    None => lim <= step,
                    Some((r, _, best)) => {
                        lim < best - 1e-12
                            || (lim <= best + 1e-12
                                && if bland { bv < self.basis[r] } else { alpha.abs() > self.t[r][q].abs() })
                    }
                };
                if better {
                    step = lim.min(step);
                    leave = Some((i, to_upper, step));
                }
            }
            if !step.is_finite() {
                return Some(false);
            }
            streak = if step <= 1e-12 { streak + 1 } else { 0 };
            for i in 0..m {
                let bv = self.basis[i];
                self.x[bv] -= step * dir * self.t[i][q];
            }
            self.x[q] += dir * step;
            let Some((r, to_upper, _)) = leave else {
                // bound flip
                self.at[q] = if dir > 0.0 { At::Upper } else { At::Lower };
                self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                continue;
            };
            let out = self.basis[r];
            self.at[out] = if to_upper { At::Upper } else { At::Lower };
            self.x[out] = if to_upper { self.ub[out] } else { self.lb[out] };
            self.basis[r] = q;
            self.at[q] = At::Basic;
            self.pivot(r, q, &mut d);
        }
        None
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let p = self.t[r][q];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = std::mem::take(&mut self.t[r]);
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| pivot_row[j] != 0.0).collect();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * pivot_row[j];
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for &j in &nz {
                d[j] -= f * pivot_row[j];
            }
            d[q] = 0.0;
        }
        self.t[r] = pivot_row;
    }
}
