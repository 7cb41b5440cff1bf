use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write};

use serde::Serialize;

use crate::gipsl::ast::Sense;
use crate::pattern::Match;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    /// Decision variable of a mapping match.
    Binary,
    /// Indicator or helper introduced by linearization.
    Auxiliary,
    /// Continuous variable.
    Slack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

impl Variable {
    pub fn is_integral(&self) -> bool {
        self.kind != VarKind::Slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs + tol >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: BTreeMap<usize, f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&v, &a)| a * x[v]).sum()
    }

    pub fn satisfied(&self, x: &[f64], tol: f64) -> bool {
        self.relation.holds(self.activity(x), self.rhs, tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: BTreeMap<usize, f64>,
    pub constant: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Objective { sense: Sense::Min, terms: BTreeMap::new(), constant: 0.0 }
    }
}

impl Objective {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&v, &c)| c * x[v]).sum::<f64>()
    }
}

/// Sparse linear expression `Σ coeffs[v]·x_v + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearTerm {
    pub coeffs: BTreeMap<usize, f64>,
    pub constant: f64,
}

impl LinearTerm {
    pub fn constant(c: f64) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: usize) -> Self {
        LinearTerm { coeffs: [(v, 1.0)].into(), constant: 0.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, v: usize, c: f64) {
        let e = self.coeffs.entry(v).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.coeffs.remove(&v);
        }
    }

    pub fn add(mut self, other: &LinearTerm, factor: f64) -> Self {
        for (&v, &c) in &other.coeffs {
            self.add_term(v, factor * c);
        }
        self.constant += factor * other.constant;
        self
    }

    pub fn scale(mut self, k: f64) -> Self {
        if k == 0.0 {
            return LinearTerm::default();
        }
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().map(|(&v, &c)| c * x[v]).sum::<f64>()
    }

    /// True if every coefficient and the constant are integers.
    pub fn is_integral(&self) -> bool {
        self.constant.fract() == 0.0 && self.coeffs.values().all(|c| c.fract() == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.coeffs.values().all(|c| c.is_finite())
    }
}

/// 0/1 integer linear program. Mapping variables come first, in match order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IlpProblem {
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective: Objective,
}

/// Minimization form with `≤` rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub c: Vec<f64>,
    pub a: Vec<BTreeMap<usize, f64>>,
    pub b: Vec<f64>,
    pub constant: f64,
    /// The original problem was a maximization; its optimum is `-(min value)`.
    pub negated: bool,
}

impl IlpProblem {
    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: f64, ub: f64) -> usize {
        self.variables.push(Variable { name: name.into(), kind, lb, ub });
        self.variables.len() - 1
    }

    /// Adds a binary auxiliary variable named `aux_<k>`.
    pub fn add_aux(&mut self) -> usize {
        let k = self.variables.iter().filter(|v| v.kind == VarKind::Auxiliary).count();
        self.add_var(format!("aux_{k}"), VarKind::Auxiliary, 0.0, 1.0)
    }

    pub fn add_row(&mut self, coeffs: BTreeMap<usize, f64>, relation: Relation, rhs: f64) -> usize {
        let name = format!("r{}", self.rows.len());
        self.rows.push(Row { name, coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn num_binary(&self) -> usize {
        self.variables.iter().filter(|v| v.is_integral()).count()
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.variables.len()
            && self.variables.iter().zip(x).all(|(v, &xi)| xi >= v.lb - tol && xi <= v.ub + tol)
            && self.rows.iter().all(|r| r.satisfied(x, tol))
    }

    pub fn to_canonical(&self) -> CanonicalForm {
        let negated = self.objective.sense == Sense::Max;
        let sign = if negated { -1.0 } else { 1.0 };
        let mut c = vec![0.0; self.variables.len()];
        for (&v, &k) in &self.objective.terms {
            c[v] = sign * k;
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        let neg = |m: &BTreeMap<usize, f64>| m.iter().map(|(&v, &k)| (v, -k)).collect::<BTreeMap<_, _>>();
        for r in &self.rows {
            if matches!(r.relation, Relation::Le | Relation::Eq) {
                a.push(r.coeffs.clone());
                b.push(r.rhs);
            }
            if matches!(r.relation, Relation::Ge | Relation::Eq) {
                a.push(neg(&r.coeffs));
                b.push(-r.rhs);
            }
        }
        CanonicalForm { c, a, b, constant: sign * self.objective.constant, negated }
    }

    /// One line per row, variables by name.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.objective.sense {
            Sense::Min => "minimize",
            Sense::Max => "maximize",
        };
        let _ = writeln!(out, "{sense} {}", self.expr(&self.objective.terms, self.objective.constant));
        for r in &self.rows {
            let _ = writeln!(out, "{}: {} {} {}", r.name, self.expr(&r.coeffs, 0.0), r.relation.symbol(), num(r.rhs));
        }
        for v in &self.variables {
            let _ = writeln!(out, "var {} {} [{}, {}]", v.name, kind_name(v.kind), num(v.lb), num(v.ub));
        }
        out
    }

    fn expr(&self, terms: &BTreeMap<usize, f64>, constant: f64) -> String {
        let mut s = String::new();
        for (i, (&v, &c)) in terms.iter().enumerate() {
            let name = &self.variables[v].name;
            match (i, c < 0.0) {
                (0, false) => {}
                (0, true) => s.push('-'),
                (_, false) => s.push_str(" + "),
                (_, true) => s.push_str(" - "),
            }
            if c.abs() != 1.0 {
                let _ = write!(s, "{} ", num(c.abs()));
            }
            s.push_str(name);
        }
        if constant != 0.0 || terms.is_empty() {
            if terms.is_empty() {
                s.push_str(&num(constant));
            } else {
                let _ = write!(s, " {} {}", if constant < 0.0 { "-" } else { "+" }, num(constant.abs()));
            }
        }
        s
    }
}

fn kind_name(k: VarKind) -> &'static str {
    match k {
        VarKind::Binary => "binary",
        VarKind::Auxiliary => "aux",
        VarKind::Slack => "real",
    }
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

impl fmt::Display for IlpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Bijection between mapping variables and `(mapping, match)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappingTable {
    entries: Vec<(String, Match)>,
    index: HashMap<(String, Match), usize>,
}

impl MappingTable {
    /// Registers a pair for variable id `entries.len()`.
    pub fn insert(&mut self, mapping: &str, m: Match) -> usize {
        let id = self.entries.len();
        let key = (mapping.to_string(), m);
        assert!(!self.index.contains_key(&key), "duplicate mapping entry {}", key.1);
        self.index.insert(key.clone(), id);
        self.entries.push(key);
        id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn var(&self, mapping: &str, m: &Match) -> Option<usize> {
        self.index.get(&(mapping.to_string(), m.clone())).copied()
    }

    pub fn entry(&self, var: usize) -> Option<(&str, &Match)> {
        self.entries.get(var).map(|(n, m)| (n.as_str(), m))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &Match)> {
        self.entries.iter().enumerate().map(|(i, (n, m))| (i, n.as_str(), m))
    }

    /// Pairs whose variable is set in `x`.
    pub fn selected<'a>(&'a self, x: &'a [f64]) -> impl Iterator<Item = (usize, &'a str, &'a Match)> + 'a {
        self.iter().filter(move |(i, _, _)| x.get(*i).is_some_and(|v| *v > 0.5))
    }
}
