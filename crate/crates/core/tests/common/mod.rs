//! Generators and independent oracles shared by the integration targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use gips_core::encode::cnf::Formula;
use gips_core::encode::{Atom, Cmp, IlpProblem, LinearTerm, Objective, Relation, Sense, VarKind};
use gips_core::model::{load_metamodel, Edge, Graph, Metamodel, Node, Value};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MDVNE_SCHEMA: &str = include_str!("../../specs/mdvne.schema.json");
pub const TWO_SERVER_MODEL: &str = include_str!("../../fixtures/two_server.json");
pub const TWO_SERVER_SPEC: &str = include_str!("../../fixtures/two_server.gipsl");

pub fn mdvne() -> Arc<Metamodel> {
    Arc::new(load_metamodel(MDVNE_SCHEMA).unwrap())
}

pub fn binaries(n: usize) -> IlpProblem {
    let mut p = IlpProblem::default();
    for i in 0..n {
        p.add_var(format!("x{i}"), VarKind::Binary, 0.0, 1.0);
    }
    p
}

/// Every 0/1 vector of length `n`, first entry most significant.
pub fn assignments(n: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..1u64 << n).map(move |bits| (0..n).map(|i| ((bits >> (n - 1 - i)) & 1) as f64).collect())
}

// ---- linearization ----

pub fn random_formula(rng: &mut ChaCha8Rng, atoms: usize, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.9) { Formula::Atom(rng.gen_range(0..atoms)) } else { Formula::Const(rng.gen_bool(0.5)) };
    }
    match rng.gen_range(0..3) {
        0 => Formula::negate(random_formula(rng, atoms, depth - 1)),
        k => {
            let n = rng.gen_range(1..=3);
            let parts = (0..n).map(|_| random_formula(rng, atoms, depth - 1)).collect();
            if k == 1 {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
    }
}

/// `Σ a_i x_i  cmp  c` with integer data in [-10, 10].
pub fn random_atom(rng: &mut ChaCha8Rng, vars: usize) -> Atom {
    let cmps = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];
    let mut lhs = LinearTerm::constant(0.0);
    for v in 0..vars {
        if rng.gen_bool(0.6) {
            lhs.add_term(v, rng.gen_range(-10..=10) as f64);
        }
    }
    let rhs = LinearTerm::constant(rng.gen_range(-10..=10) as f64);
    Atom::new(&lhs, cmps[rng.gen_range(0..cmps.len())], &rhs)
}

/// Whether some 0/1 values of the variables after `fixed` satisfy every
/// row. Depth-first with activity-interval pruning.
pub fn feasible_extending(p: &IlpProblem, fixed: &[f64]) -> bool {
    assert!(p.variables.iter().all(|v| v.lb == 0.0 && v.ub == 1.0), "0/1 variables only");
    let mut x = fixed.to_vec();
    x.resize(p.variables.len(), f64::NAN);
    dfs(p, &mut x, fixed.len())
}

fn rows_possible(p: &IlpProblem, x: &[f64]) -> bool {
    p.rows.iter().all(|r| {
        let (mut lo, mut hi) = (0.0, 0.0);
        for (&v, &a) in &r.coeffs {
            if x[v].is_nan() {
                lo += a.min(0.0);
                hi += a.max(0.0);
            } else {
                lo += a * x[v];
                hi += a * x[v];
            }
        }
        let tol = 1e-9 * r.rhs.abs().max(1.0);
        match r.relation {
            Relation::Le => lo <= r.rhs + tol,
            Relation::Ge => hi >= r.rhs - tol,
            Relation::Eq => lo <= r.rhs + tol && hi >= r.rhs - tol,
        }
    })
}

fn dfs(p: &IlpProblem, x: &mut [f64], i: usize) -> bool {
    if !rows_possible(p, x) {
        return false;
    }
    if i == x.len() {
        return true;
    }
    for v in [0.0, 1.0] {
        x[i] = v;
        if dfs(p, x, i + 1) {
            x[i] = f64::NAN;
            return true;
        }
    }
    x[i] = f64::NAN;
    false
}

// ---- solver ----

pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> IlpProblem {
    let mut p = binaries(n);
    for _ in 0..m {
        let mut coeffs = BTreeMap::new();
        for v in 0..n {
            if rng.gen_bool(0.4) {
                coeffs.insert(v, rng.gen_range(-8..=8) as f64);
            }
        }
        // right-hand sides lean towards the slack side so most problems stay feasible
        let (rel, rhs) = match rng.gen_range(0..20) {
            0..=10 => (Relation::Le, rng.gen_range(-2..=10)),
            11..=18 => (Relation::Ge, rng.gen_range(-10..=2)),
            _ => (Relation::Eq, rng.gen_range(-2..=2)),
        };
        p.add_row(coeffs, rel, rhs as f64);
    }
    let sense = if rng.gen_bool(0.5) { Sense::Min } else { Sense::Max };
    let mut terms = BTreeMap::new();
    for v in 0..n {
        if rng.gen_bool(0.7) {
            terms.insert(v, rng.gen_range(-20..=20) as f64 / 4.0);
        }
    }
    p.objective = Objective { sense, terms, constant: rng.gen_range(-3..=3) as f64 };
    p
}

/// Optimal value and every optimal point, by full enumeration.
pub fn optimal_set(p: &IlpProblem) -> Option<(f64, Vec<Vec<f64>>)> {
    let sign = if p.objective.sense == Sense::Max { -1.0 } else { 1.0 };
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for x in assignments(p.variables.len()) {
        if !p.rows.iter().all(|r| r.satisfied(&x, 1e-9)) {
            continue;
        }
        let v = sign * p.objective.value(&x);
        match &mut best {
            Some((b, set)) if (v - *b).abs() <= 1e-9 * b.abs().max(1.0) => set.push(x),
            Some((b, _)) if v > *b => {}
            _ => best = Some((v, vec![x])),
        }
    }
    best.map(|(v, set)| (sign * v, set))
}

// ---- matcher ----

/// Node types A, B (a subtype of A) and C; edges e: A -> A and f: A -> C.
pub const SMALL_SCHEMA: &str = r#"{
  "nodetypes": [
    { "name": "A", "attributes": [ { "name": "w", "kind": "int" } ] },
    { "name": "B", "supertype": "A", "attributes": [] },
    { "name": "C", "attributes": [ { "name": "w", "kind": "int" } ] }
  ],
  "edgetypes": [
    { "name": "e", "source": "A", "target": "A" },
    { "name": "f", "source": "A", "target": "C" }
  ]
}"#;

const TYPES: [&str; 3] = ["A", "B", "C"];

pub fn random_graph(rng: &mut ChaCha8Rng, mm: &Arc<Metamodel>) -> Graph {
    let mut g = Graph::new(mm.clone());
    let n = rng.gen_range(0..=8);
    for i in 0..n {
        let attrs: BTreeMap<String, Value> = [("w".to_string(), Value::Int(rng.gen_range(0..4)))].into();
        g.add_node(format!("n{i}"), Node { ty: TYPES[rng.gen_range(0..3)].into(), attrs }).unwrap();
    }
    if n > 0 {
        for k in 0..rng.gen_range(0..16) {
            let ty = if rng.gen_bool(0.6) { "e" } else { "f" };
            let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
            // edges with nonconforming endpoints are refused and skipped
            let _ = g.add_edge(format!("x{k}"), Edge { ty: ty.into(), src: format!("n{s}"), tgt: format!("n{t}") });
        }
    }
    g
}

#[derive(Debug, Clone)]
pub enum Cond {
    None,
    FirstAtLeast(i64),
    FirstAtMostLast,
    SumNotOrFirstZero(i64),
}

#[derive(Debug, Clone)]
pub struct PatternSpec {
    pub types: Vec<usize>,
    pub edges: Vec<(&'static str, usize, usize)>,
    pub cond: Cond,
}

pub fn random_pattern(rng: &mut ChaCha8Rng) -> PatternSpec {
    let types: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..3)).collect();
    let mut edges = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let (s, t) = (rng.gen_range(0..types.len()), rng.gen_range(0..types.len()));
        let ty = if rng.gen_bool(0.6) { "e" } else { "f" };
        let ok = types[s] != 2 && if ty == "e" { types[t] != 2 } else { types[t] == 2 };
        if ok && !edges.contains(&(ty, s, t)) {
            edges.push((ty, s, t));
        }
    }
    let cond = match rng.gen_range(0..4) {
        0 => Cond::None,
        1 => Cond::FirstAtLeast(rng.gen_range(0..4)),
        2 => Cond::FirstAtMostLast,
        _ => Cond::SumNotOrFirstZero(rng.gen_range(0..5)),
    };
    PatternSpec { types, edges, cond }
}

impl PatternSpec {
    pub fn source(&self) -> String {
        let mut body = String::new();
        for (i, t) in self.types.iter().enumerate() {
            body += &format!("    node p{i} : {};\n", TYPES[*t]);
        }
        for (ty, s, t) in &self.edges {
            body += &format!("    edge {ty}(p{s} -> p{t});\n");
        }
        let last = self.types.len() - 1;
        match self.cond {
            Cond::None => {}
            Cond::FirstAtLeast(k) => body += &format!("    condition p0.w >= {k};\n"),
            Cond::FirstAtMostLast => body += &format!("    condition p0.w <= p{last}.w;\n"),
            Cond::SumNotOrFirstZero(k) => body += &format!("    condition p0.w + p{last}.w != {k} | p0.w == 0;\n"),
        }
        format!("rule r {{\n{body}}}\nglobal objective : min {{ 0 }}\n")
    }

    /// Every injective, type-respecting binding satisfying edges and condition.
    pub fn enumerate(&self, g: &Graph) -> Vec<Vec<String>> {
        let ids: Vec<String> = g.nodes().map(|(id, _)| id.to_string()).collect();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.extend(g, &ids, &mut cur, &mut out);
        out.sort();
        out
    }

    fn extend(&self, g: &Graph, ids: &[String], cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if cur.len() == self.types.len() {
            if self.accepts(g, cur) {
                out.push(cur.clone());
            }
            return;
        }
        for id in ids {
            if !cur.contains(id) {
                cur.push(id.clone());
                self.extend(g, ids, cur, out);
                cur.pop();
            }
        }
    }

    fn accepts(&self, g: &Graph, b: &[String]) -> bool {
        let mm = g.metamodel();
        let typed = self.types.iter().zip(b).all(|(&t, id)| mm.is_subtype(&g.node(id).unwrap().ty, TYPES[t]));
        let linked = self.edges.iter().all(|(ty, s, t)| g.has_edge(ty, &b[*s], &b[*t]));
        let w = |i: usize| match g.attr(&b[i], "w") {
            Some(Value::Int(v)) => *v,
            other => panic!("w missing: {other:?}"),
        };
        let last = b.len() - 1;
        let cond = match self.cond {
            Cond::None => true,
            Cond::FirstAtLeast(k) => w(0) >= k,
            Cond::FirstAtMostLast => w(0) <= w(last),
            Cond::SumNotOrFirstZero(k) => w(0) + w(last) != k || w(0) == 0,
        };
        typed && linked && cond
    }
}

// ---- objective scaling ----

/// Virtual links with bandwidth demands and substrate links with residual
/// bandwidth in quarter steps of their capacity, so that ties are common.
pub fn random_link_model(rng: &mut ChaCha8Rng, mm: &Arc<Metamodel>) -> Graph {
    let mut g = Graph::new(mm.clone());
    let node = |ty: &str, attrs: &[(&str, Value)]| Node {
        ty: ty.into(),
        attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    };
    for i in 0..rng.gen_range(1..=2) {
        let bw = 10 * rng.gen_range(1..=6);
        g.add_node(format!("v{i}"), node("VirtualLink", &[("mapped", Value::Bool(false)), ("bw", Value::Int(bw))])).unwrap();
    }
    for i in 0..rng.gen_range(2..=5) {
        let bw = 100 * rng.gen_range(1..=2);
        let res = bw / 4 * rng.gen_range(0..=4);
        g.add_node(format!("s{i}"), node("SubstrateLink", &[("bw", Value::Int(bw)), ("resBw", Value::Int(res))])).unwrap();
    }
    g
}
