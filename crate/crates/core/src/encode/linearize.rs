//! Clause sets over relational atoms to linear rows with big-M indicators.

use std::collections::BTreeMap;

use super::cnf::{Cnf, Formula};
use super::problem::{IlpProblem, LinearTerm, Relation};
use super::EncodeError;

/// Separation used for strict comparisons of real-valued terms.
pub const REAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, l: f64, r: f64) -> bool {
        match self {
            Cmp::Lt => l < r,
            Cmp::Le => l <= r,
            Cmp::Eq => l == r,
            Cmp::Ge => l >= r,
            Cmp::Gt => l > r,
        }
    }

    /// The comparison equivalent to the negation of `self`, if one exists.
    pub fn negated(self) -> Option<Cmp> {
        match self {
            Cmp::Lt => Some(Cmp::Ge),
            Cmp::Le => Some(Cmp::Gt),
            Cmp::Ge => Some(Cmp::Lt),
            Cmp::Gt => Some(Cmp::Le),
            Cmp::Eq => None,
        }
    }
}

/// `term rel 0` with `rel` one of `≤`, `=`, `≥`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub term: LinearTerm,
    pub rel: Relation,
}

impl Atom {
    /// Normalizes `lhs cmp rhs`. Strict comparisons become non-strict by
    /// shifting 1 for integral terms and [`REAL_EPS`] otherwise.
    pub fn new(lhs: &LinearTerm, cmp: Cmp, rhs: &LinearTerm) -> Atom {
        let mut term = lhs.clone().add(rhs, -1.0);
        let eps = epsilon(&term);
        let rel = match cmp {
            Cmp::Le => Relation::Le,
            Cmp::Ge => Relation::Ge,
            Cmp::Eq => Relation::Eq,
            Cmp::Lt => {
                term.constant += eps;
                Relation::Le
            }
            Cmp::Gt => {
                term.constant -= eps;
                Relation::Ge
            }
        };
        Atom { term, rel }
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        let t = self.term.eval(x);
        match self.rel {
            Relation::Le => t <= 0.0,
            Relation::Eq => t == 0.0,
            Relation::Ge => t >= 0.0,
        }
    }

    /// The row `Σ coeffs·x rel -constant`.
    fn direct_row(&self, p: &mut IlpProblem) {
        p.add_row(self.term.coeffs.clone(), self.rel, -self.term.constant);
    }
}

fn epsilon(t: &LinearTerm) -> f64 {
    if t.is_integral() {
        1.0
    } else {
        REAL_EPS
    }
}

/// Lowers a constraint body: clausal form, then rows.
pub fn encode_formula(f: &Formula, atoms: &[Atom], p: &mut IlpProblem) -> Result<(), EncodeError> {
    let cnf = super::cnf::to_cnf(f, atoms.len());
    linearize(&cnf, atoms, p)
}

/// Adds rows (and indicator variables) that are satisfiable exactly for the
/// assignments under which `cnf` holds.
pub fn linearize(cnf: &Cnf, atoms: &[Atom], p: &mut IlpProblem) -> Result<(), EncodeError> {
    let occ = cnf.occurrences();
    let mut indicator: Vec<Option<usize>> = vec![None; cnf.num_atoms + cnf.num_aux];
    for clause in &cnf.clauses {
        if let [lit] = clause.as_slice() {
            if lit.positive && lit.var < cnf.num_atoms && occ[lit.var] == 1 {
                atoms[lit.var].direct_row(p);
                continue;
            }
        }
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut rhs = 1.0;
        for lit in clause {
            let v = match indicator[lit.var] {
                Some(v) => v,
                None => {
                    let v = if lit.var < cnf.num_atoms { indicate(&atoms[lit.var], p)? } else { p.add_aux() };
                    indicator[lit.var] = Some(v);
                    v
                }
            };
            if lit.positive {
                *coeffs.entry(v).or_insert(0.0) += 1.0;
            } else {
                *coeffs.entry(v).or_insert(0.0) -= 1.0;
                rhs -= 1.0;
            }
        }
        p.add_row(coeffs, Relation::Ge, rhs);
    }
    Ok(())
}

/// Binary `v` with `v = 1 ⇔ atom holds`.
fn indicate(atom: &Atom, p: &mut IlpProblem) -> Result<usize, EncodeError> {
    match atom.rel {
        Relation::Le => le_indicator(&atom.term, p),
        Relation::Ge => le_indicator(&atom.term.clone().scale(-1.0), p),
        Relation::Eq => {
            let a = le_indicator(&atom.term, p)?;
            let b = le_indicator(&atom.term.clone().scale(-1.0), p)?;
            let v = p.add_aux();
            p.add_row([(v, 1.0), (a, -1.0)].into(), Relation::Le, 0.0);
            p.add_row([(v, 1.0), (b, -1.0)].into(), Relation::Le, 0.0);
            p.add_row([(v, 1.0), (a, -1.0), (b, -1.0)].into(), Relation::Ge, -1.0);
            Ok(v)
        }
    }
}

/// Indicator for `t ≤ 0`: rows `t ≤ M(1 − v)` and `t ≥ ε − M·v`.
fn le_indicator(t: &LinearTerm, p: &mut IlpProblem) -> Result<usize, EncodeError> {
    if !t.is_finite() {
        return Err(EncodeError::BigM(format!("non-finite coefficient in {t:?}")));
    }
    let (mut lo, mut hi) = (t.constant, t.constant);
    for (&v, &a) in &t.coeffs {
        let var = &p.variables[v];
        let (x, y) = (a * var.lb, a * var.ub);
        lo += x.min(y);
        hi += x.max(y);
    }
    let eps = epsilon(t);
    let m = 2.0 * (lo.abs().max(hi.abs()) + eps);
    if !m.is_finite() {
        return Err(EncodeError::BigM(format!("unbounded term {t:?}")));
    }
    let v = p.add_aux();
    let mut row = t.coeffs.clone();
    row.insert(v, m);
    p.add_row(row.clone(), Relation::Le, m - t.constant);
    p.add_row(row, Relation::Ge, eps - t.constant);
    Ok(v)
}
