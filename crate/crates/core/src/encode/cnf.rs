//! Boolean formulas over numbered atoms and their clausal form.

use std::collections::BTreeSet;

/// Distribution is abandoned for a disjunction once it would exceed this many clauses.
pub const CLAUSE_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Const(bool),
    Atom(usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn negate(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn eval(&self, atoms: &[bool]) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => atoms[*a],
            Formula::Not(f) => !f.eval(atoms),
            Formula::And(fs) => fs.iter().all(|f| f.eval(atoms)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(atoms)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    /// Atom index, or `num_atoms + k` for the k-th definitional variable.
    pub var: usize,
    pub positive: bool,
}

impl Lit {
    fn negate(self) -> Lit {
        Lit { var: self.var, positive: !self.positive }
    }
}

pub type Clause = Vec<Lit>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cnf {
    pub clauses: Vec<Clause>,
    pub num_atoms: usize,
    /// Definitional variables introduced for oversized disjunctions.
    pub num_aux: usize,
}

impl Cnf {
    pub fn eval(&self, vals: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| vals[l.var] == l.positive))
    }

    /// True if some valuation of the definitional variables satisfies the
    /// clauses under the given atom valuation.
    pub fn satisfiable_with(&self, atoms: &[bool]) -> bool {
        let mut vals = atoms.to_vec();
        vals.resize(self.num_atoms + self.num_aux, false);
        (0u64..1 << self.num_aux).any(|bits| {
            for k in 0..self.num_aux {
                vals[self.num_atoms + k] = bits >> k & 1 == 1;
            }
            self.eval(&vals)
        })
    }

    /// Number of clauses each variable occurs in.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut n = vec![0; self.num_atoms + self.num_aux];
        for c in &self.clauses {
            let vars: BTreeSet<usize> = c.iter().map(|l| l.var).collect();
            for v in vars {
                n[v] += 1;
            }
        }
        n
    }
}

/// Converts `f` to an equisatisfiable clause set.
///
/// Without definitional variables the result is equivalent to `f`.
pub fn to_cnf(f: &Formula, num_atoms: usize) -> Cnf {
    let nnf = nnf(f, false);
    let mut cnf = Cnf { clauses: Vec::new(), num_atoms, num_aux: 0 };
    let clauses = clausify(&nnf, &mut cnf);
    let mut seen = BTreeSet::new();
    for c in clauses {
        if seen.insert(c.clone()) {
            cnf.clauses.push(c);
        }
    }
    cnf
}

/// Negation normal form; `Not` only wraps atoms afterwards.
fn nnf(f: &Formula, neg: bool) -> Formula {
    match f {
        Formula::Const(b) => Formula::Const(*b != neg),
        Formula::Atom(_) if neg => Formula::negate(f.clone()),
        Formula::Atom(_) => f.clone(),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(fs) | Formula::Or(fs) => {
            let parts: Vec<Formula> = fs.iter().map(|g| nnf(g, neg)).collect();
            let and = matches!(f, Formula::And(_)) != neg;
            if and {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
    }
}

/// Sorted, duplicate-free clause; `None` for a tautology.
fn normalize(mut c: Clause) -> Option<Clause> {
    c.sort();
    c.dedup();
    if c.windows(2).any(|w| w[0].var == w[1].var) {
        return None;
    }
    Some(c)
}

fn clausify(f: &Formula, cnf: &mut Cnf) -> Vec<Clause> {
    match f {
        Formula::Const(true) => Vec::new(),
        Formula::Const(false) => vec![Vec::new()],
        Formula::Atom(a) => vec![vec![Lit { var: *a, positive: true }]],
        Formula::Not(g) => match **g {
            Formula::Atom(a) => vec![vec![Lit { var: a, positive: false }]],
            _ => unreachable!("input is in negation normal form"),
        },
        Formula::And(fs) => fs.iter().flat_map(|g| clausify(g, cnf)).collect(),
        Formula::Or(fs) => {
            let parts: Vec<Vec<Clause>> = fs.iter().map(|g| clausify(g, cnf)).collect();
            if parts.iter().any(|p| p.is_empty()) {
                return Vec::new();
            }
            let size = parts.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()).filter(|&n| n <= CLAUSE_CAP));
            match size {
                Some(_) => distribute(&parts),
                None => define(parts, cnf),
            }
        }
    }
}

fn distribute(parts: &[Vec<Clause>]) -> Vec<Clause> {
    let mut acc: Vec<Clause> = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(acc.len() * p.len());
        for a in &acc {
            for c in p {
                let mut merged = a.clone();
                merged.extend_from_slice(c);
                next.push(merged);
            }
        }
        acc = next;
    }
    acc.into_iter().filter_map(normalize).collect()
}

/// Introduces `t_i → part_i` for every multi-clause disjunct and keeps
/// one clause over the `t_i`.
fn define(parts: Vec<Vec<Clause>>, cnf: &mut Cnf) -> Vec<Clause> {
    let mut out = Vec::new();
    let mut top: Clause = Vec::new();
    for p in parts {
        if p.len() == 1 {
            top.extend(p.into_iter().next().expect("one clause"));
            continue;
        }
        let t = Lit { var: cnf.num_atoms + cnf.num_aux, positive: true };
        cnf.num_aux += 1;
        for mut c in p {
            c.push(t.negate());
            out.extend(normalize(c));
        }
        top.push(t);
    }
    out.extend(normalize(top));
    out
}
