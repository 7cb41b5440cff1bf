use log::trace;

use super::{Match, Pattern};
use crate::gipsl::eval::{eval_bool, Scope};
use crate::gipsl::TExpr;
use crate::model::Graph;

/// All matches of `p` in `g`, sorted by bound ids in pattern-node order.
pub fn find_matches(g: &Graph, p: &Pattern) -> Vec<Match> {
    let plan = Plan::new(g, p);
    let mut out = Vec::new();
    let mut binding: Vec<Option<String>> = vec![None; p.nodes.len()];
    if plan.ready[0].iter().all(|c| holds(g, p, &binding, c)) {
        plan.extend(g, p, 0, &mut binding, &mut out);
    }
    out.sort();
    out
}

/// Reference enumeration of all injective typed bindings, for tests.
pub fn find_matches_brute_force(g: &Graph, p: &Pattern) -> Vec<Match> {
    let ids: Vec<&str> = g.nodes().map(|(id, _)| id).collect();
    let mut out = Vec::new();
    let mut binding: Vec<Option<String>> = vec![None; p.nodes.len()];
    brute(g, p, &ids, 0, &mut binding, &mut out);
    out.sort();
    out
}

fn brute(g: &Graph, p: &Pattern, ids: &[&str], i: usize, binding: &mut Vec<Option<String>>, out: &mut Vec<Match>) {
    if i == p.nodes.len() {
        let m = to_match(p, binding);
        if super::apply::binding_valid(g, p, &m) {
            out.push(m);
        }
        return;
    }
    for id in ids {
        if binding.iter().flatten().any(|b| b == id) {
            continue;
        }
        binding[i] = Some(id.to_string());
        brute(g, p, ids, i + 1, binding, out);
    }
    binding[i] = None;
}

fn to_match(p: &Pattern, binding: &[Option<String>]) -> Match {
    Match {
        pattern: p.name.clone(),
        binding: p
            .nodes
            .iter()
            .zip(binding)
            .map(|(n, b)| (n.name.clone(), b.clone().expect("complete binding")))
            .collect(),
    }
}

/// Evaluates a condition conjunct under a partial binding. Evaluation
/// failures (e.g. division by zero) reject the candidate.
fn holds(g: &Graph, p: &Pattern, binding: &[Option<String>], c: &TExpr) -> bool {
    let partial = Match {
        pattern: p.name.clone(),
        binding: p
            .nodes
            .iter()
            .zip(binding)
            .filter_map(|(n, b)| b.as_ref().map(|b| (n.name.clone(), b.clone())))
            .collect(),
    };
    match eval_bool(c, &Scope::with_bound(g, &partial)) {
        Ok(b) => b,
        Err(e) => {
            trace!("condition of {} rejected {partial}: {e}", p.name);
            false
        }
    }
}

/// Search order and the condition conjuncts that become decidable at each depth.
struct Plan<'p> {
    order: Vec<usize>,
    /// `ready[d]` is checked once the first `d` nodes of `order` are bound.
    ready: Vec<Vec<&'p TExpr>>,
}

impl<'p> Plan<'p> {
    fn new(g: &Graph, p: &'p Pattern) -> Self {
        let n = p.nodes.len();
        let candidates: Vec<usize> = p.nodes.iter().map(|pn| g.nodes_of_type(&pn.ty).count()).collect();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for _ in 0..n {
            // prefer nodes tied to already placed ones, then the smallest candidate set
            let next = (0..n)
                .filter(|&i| !placed[i])
                .min_by_key(|&i| {
                    let links = p
                        .edges
                        .iter()
                        .filter(|e| {
                            let (s, t) = (p.node_index(&e.src), p.node_index(&e.tgt));
                            (s == Some(i) && t.is_some_and(|t| placed[t])) || (t == Some(i) && s.is_some_and(|s| placed[s]))
                        })
                        .count();
                    (usize::MAX - links, candidates[i], i)
                })
                .expect("unplaced node exists");
            placed[next] = true;
            order.push(next);
        }

        let mut ready: Vec<Vec<&TExpr>> = vec![Vec::new(); n + 1];
        if let Some(cond) = &p.condition {
            for c in cond.conjuncts() {
                let mut names = Vec::new();
                c.bound_nodes(&mut names);
                let depth = names
                    .iter()
                    .filter_map(|name| p.node_index(name))
                    .map(|i| order.iter().position(|&o| o == i).expect("ordered") + 1)
                    .max()
                    .unwrap_or(0);
                ready[depth].push(c);
            }
        }
        Plan { order, ready }
    }

    fn extend(&self, g: &Graph, p: &Pattern, depth: usize, binding: &mut Vec<Option<String>>, out: &mut Vec<Match>) {
        if depth == self.order.len() {
            out.push(to_match(p, binding));
            return;
        }
        let i = self.order[depth];
        let pn = &p.nodes[i];
        for cand in self.candidates(g, p, i, binding) {
            if binding.iter().flatten().any(|b| *b == cand) {
                continue;
            }
            let node = g.node(&cand).expect("candidate exists");
            if !g.metamodel().is_subtype(&node.ty, &pn.ty) {
                continue;
            }
            binding[i] = Some(cand);
            if self.edges_hold(g, p, i, binding) && self.ready[depth + 1].iter().all(|c| holds(g, p, binding, c)) {
                self.extend(g, p, depth + 1, binding, out);
            }
            binding[i] = None;
        }
    }

    /// Candidate ids for pattern node `i`, narrowed through an edge to a bound neighbour when possible.
    fn candidates(&self, g: &Graph, p: &Pattern, i: usize, binding: &[Option<String>]) -> Vec<String> {
        let name = &p.nodes[i].name;
        for e in &p.edges {
            if &e.tgt == name {
                if let Some(Some(src)) = p.node_index(&e.src).map(|s| &binding[s]) {
                    let mut v: Vec<String> =
                        g.out_edges(src).filter(|(_, x)| x.ty == e.ty).map(|(_, x)| x.tgt.clone()).collect();
                    v.sort();
                    v.dedup();
                    return v;
                }
            }
            if &e.src == name {
                if let Some(Some(tgt)) = p.node_index(&e.tgt).map(|t| &binding[t]) {
                    let mut v: Vec<String> =
                        g.in_edges(tgt).filter(|(_, x)| x.ty == e.ty).map(|(_, x)| x.src.clone()).collect();
                    v.sort();
                    v.dedup();
                    return v;
                }
            }
        }
        g.nodes_of_type(&p.nodes[i].ty).map(str::to_string).collect()
    }

    /// Checks every pattern edge whose endpoints are both bound and one of them is node `i`.
    fn edges_hold(&self, g: &Graph, p: &Pattern, i: usize, binding: &[Option<String>]) -> bool {
        let name = &p.nodes[i].name;
        p.edges.iter().filter(|e| &e.src == name || &e.tgt == name).all(|e| {
            let s = p.node_index(&e.src).and_then(|s| binding[s].as_deref());
            let t = p.node_index(&e.tgt).and_then(|t| binding[t].as_deref());
            match (s, t) {
                (Some(s), Some(t)) => g.has_edge(&e.ty, s, t),
                _ => true,
            }
        })
    }
}
