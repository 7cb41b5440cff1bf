use std::collections::BTreeMap;
use std::fmt;

use log::debug;

use super::cnf::Formula;
use super::linearize::{encode_formula, Atom, Cmp};
use super::problem::{IlpProblem, LinearTerm, MappingTable, Objective, VarKind};
use super::EncodeError;
use crate::gipsl::ast::{BinaryOp, UnaryOp};
use crate::gipsl::eval::{eval_bool, eval_f64, EvalError, Scope};
use crate::gipsl::{PatternRef, SumExpr, TExpr, TypedContext, TypedSpec};
use crate::model::Graph;
use crate::pattern::{apply_rule, find_matches, Match};

/// A generated problem together with everything needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub problem: IlpProblem,
    pub table: MappingTable,
    /// Matches per mapping, in variable order.
    pub matches: Vec<Vec<Match>>,
    pub warnings: Vec<String>,
}

/// What `self` refers to in one constraint or objective instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Element(String),
    /// A pattern or mapping match; `var` is set for mapping contexts.
    Match { m: Match, var: Option<usize> },
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Element(id) => write!(f, "element `{id}`"),
            Binding::Match { m, .. } => write!(f, "match {m}"),
        }
    }
}

/// Matches of each mapping's rule, computed once per rule.
pub fn find_mapping_matches(spec: &TypedSpec, g: &Graph) -> Vec<Vec<Match>> {
    let mut per_rule: BTreeMap<usize, Vec<Match>> = BTreeMap::new();
    spec.mappings
        .iter()
        .map(|m| per_rule.entry(m.rule).or_insert_with(|| find_matches(g, &spec.rules[m.rule].lhs)).clone())
        .collect()
}

/// One binary variable `m_<mapping>_<k>` per match, mappings in declaration order.
pub fn instantiate_mappings(spec: &TypedSpec, matches: &[Vec<Match>]) -> (IlpProblem, MappingTable) {
    let mut p = IlpProblem::default();
    let mut table = MappingTable::default();
    for (mapping, ms) in spec.mappings.iter().zip(matches) {
        for (k, m) in ms.iter().enumerate() {
            let v = p.add_var(format!("m_{}_{k}", mapping.name), VarKind::Binary, 0.0, 1.0);
            let id = table.insert(&mapping.name, m.clone());
            debug_assert_eq!(v, id);
        }
    }
    (p, table)
}

struct Ctx<'a> {
    matches: &'a [Vec<Match>],
    /// First variable id of each mapping.
    offsets: Vec<usize>,
}

impl<'a> Ctx<'a> {
    fn new(matches: &'a [Vec<Match>]) -> Self {
        let mut offsets = Vec::with_capacity(matches.len());
        let mut next = 0;
        for ms in matches {
            offsets.push(next);
            next += ms.len();
        }
        Ctx { matches, offsets }
    }
}

/// Instances of a context: model elements (subtypes included) or matches.
pub fn expand_contexts(spec: &TypedSpec, g: &Graph, matches: &[Vec<Match>], context: &TypedContext) -> Vec<Binding> {
    match context {
        TypedContext::Class(ty) => g.nodes_of_type(ty).map(|id| Binding::Element(id.to_string())).collect(),
        TypedContext::Mapping(i) => {
            let offset: usize = matches[..*i].iter().map(Vec::len).sum();
            matches[*i]
                .iter()
                .enumerate()
                .map(|(k, m)| Binding::Match { m: m.clone(), var: Some(offset + k) })
                .collect()
        }
        TypedContext::Pattern(r) => {
            let p = spec.pattern(*r);
            let found = match r {
                PatternRef::RuleLhs(rule) => match spec.mappings.iter().position(|m| m.rule == *rule) {
                    Some(i) => matches[i].clone(),
                    None => find_matches(g, p),
                },
                PatternRef::Declared(_) => find_matches(g, p),
            };
            found.into_iter().map(|m| Binding::Match { m, var: None }).collect()
        }
    }
}

fn scope<'a>(g: &'a Graph, b: &'a Binding) -> (Scope<'a>, Option<usize>) {
    let mut s = Scope::new(g);
    match b {
        Binding::Element(id) => {
            s.self_node = Some(id);
            (s, None)
        }
        Binding::Match { m, var } => {
            s.self_match = Some(m);
            (s, *var)
        }
    }
}

/// Replaces the set expression by `Σ coeff_m · x_m` over the matches passing the filter.
pub fn lower_sets(
    set: &SumExpr,
    scope: &Scope,
    matches: &[Vec<Match>],
    first_var: usize,
) -> Result<LinearTerm, EvalError> {
    let mut t = LinearTerm::default();
    for (k, m) in matches[set.mapping].iter().enumerate() {
        let s = Scope { element: Some(m), ..*scope };
        if let Some(f) = &set.filter {
            if !eval_bool(f, &s)? {
                continue;
            }
        }
        let c = eval_f64(&set.body, &s)?;
        if !c.is_finite() {
            return Err(EvalError(format!("non-finite coefficient {c} for match {m}")));
        }
        t.add_term(first_var + k, c);
    }
    Ok(t)
}

fn linear(ctx: &Ctx, e: &TExpr, s: &Scope, self_var: Option<usize>) -> Result<LinearTerm, EvalError> {
    if !e.has_vars() {
        let v = eval_f64(e, s)?;
        if !v.is_finite() {
            return Err(EvalError(format!("non-finite value {v}")));
        }
        return Ok(LinearTerm::constant(v));
    }
    match e {
        TExpr::SelfVar => self_var.map(LinearTerm::var).ok_or_else(|| EvalError("no variable bound to self".into())),
        TExpr::Sum(set) => lower_sets(set, s, ctx.matches, ctx.offsets[set.mapping]),
        TExpr::Unary(UnaryOp::Neg, inner) => Ok(linear(ctx, inner, s, self_var)?.scale(-1.0)),
        TExpr::Binary(op, a, b) => {
            let (l, r) = (linear(ctx, a, s, self_var)?, linear(ctx, b, s, self_var)?);
            match op {
                BinaryOp::Add => Ok(l.add(&r, 1.0)),
                BinaryOp::Sub => Ok(l.add(&r, -1.0)),
                BinaryOp::Mul if l.is_constant() => Ok(r.scale(l.constant)),
                BinaryOp::Mul if r.is_constant() => Ok(l.scale(r.constant)),
                BinaryOp::Div if r.is_constant() => {
                    if r.constant == 0.0 {
                        return Err(EvalError("division by zero".into()));
                    }
                    Ok(l.scale(1.0 / r.constant))
                }
                _ => Err(EvalError(format!("nonlinear use of `{}`", op.symbol()))),
            }
        }
        _ => Err(EvalError("expression is not linear in the mapping variables".into())),
    }
}

fn cmp_of(op: BinaryOp) -> Option<Cmp> {
    Some(match op {
        BinaryOp::Lt => Cmp::Lt,
        BinaryOp::Le => Cmp::Le,
        BinaryOp::Eq => Cmp::Eq,
        BinaryOp::Ge => Cmp::Ge,
        BinaryOp::Gt => Cmp::Gt,
        _ => return None,
    })
}

/// Boolean structure over relational atoms, with negations pushed into the
/// comparisons where possible.
fn formula(
    ctx: &Ctx,
    e: &TExpr,
    s: &Scope,
    self_var: Option<usize>,
    neg: bool,
    atoms: &mut Vec<Atom>,
) -> Result<Formula, EvalError> {
    if !e.has_vars() {
        return Ok(Formula::Const(eval_bool(e, s)? != neg));
    }
    match e {
        TExpr::Unary(UnaryOp::Not, inner) => formula(ctx, inner, s, self_var, !neg, atoms),
        TExpr::Binary(op @ (BinaryOp::And | BinaryOp::Or), a, b) => {
            let parts = vec![formula(ctx, a, s, self_var, neg, atoms)?, formula(ctx, b, s, self_var, neg, atoms)?];
            Ok(if (*op == BinaryOp::And) != neg { Formula::And(parts) } else { Formula::Or(parts) })
        }
        TExpr::Binary(op, a, b) => {
            let (l, r) = (linear(ctx, a, s, self_var)?, linear(ctx, b, s, self_var)?);
            // `!=` is a negated equality
            let (cmp, neg) = match op {
                BinaryOp::Ne => (Cmp::Eq, !neg),
                other => (cmp_of(*other).ok_or_else(|| EvalError(format!("`{}` is not a comparison", op.symbol())))?, neg),
            };
            let (cmp, negate_atom) = match (neg, cmp.negated()) {
                (false, _) => (cmp, false),
                (true, Some(flipped)) => (flipped, false),
                (true, None) => (cmp, true),
            };
            let atom = Atom::new(&l, cmp, &r);
            if atom.term.is_constant() {
                return Ok(Formula::Const(atom.holds(&[]) != negate_atom));
            }
            let idx = match atoms.iter().position(|a| *a == atom) {
                Some(i) => i,
                None => {
                    atoms.push(atom);
                    atoms.len() - 1
                }
            };
            Ok(if negate_atom { Formula::negate(Formula::Atom(idx)) } else { Formula::Atom(idx) })
        }
        _ => Err(EvalError("boolean expression over variables must be a comparison".into())),
    }
}

/// Objective `Σ weight · instance` over all objective instances.
pub fn build_objective(
    spec: &TypedSpec,
    g: &Graph,
    matches: &[Vec<Match>],
    table: &MappingTable,
) -> Result<Objective, EncodeError> {
    debug_assert_eq!(table.len(), matches.iter().map(Vec::len).sum::<usize>());
    let ctx = Ctx::new(matches);
    let mut total = LinearTerm::constant(spec.global.constant);
    for &(i, w) in &spec.global.weights {
        let o = &spec.objectives[i];
        let item = format!("objective `{}`", o.name);
        for b in expand_contexts(spec, g, matches, &o.context) {
            let (s, var) = scope(g, &b);
            let err = |e: EvalError| EncodeError::Eval { item: item.clone(), element: b.to_string(), message: e.0 };
            let term = match (&o.context, var) {
                // constant per match, attached to the match's variable
                (TypedContext::Mapping(_), Some(v)) => {
                    let c = eval_f64(&o.body, &s).map_err(err)?;
                    if !c.is_finite() {
                        return Err(err(EvalError(format!("non-finite coefficient {c}"))));
                    }
                    LinearTerm::var(v).scale(c)
                }
                _ => linear(&ctx, &o.body, &s, var).map_err(err)?,
            };
            total = total.add(&term, w);
        }
    }
    Ok(Objective { sense: spec.global.sense, terms: total.coeffs, constant: total.constant })
}

/// Matching, variable instantiation, constraint expansion and objective assembly.
pub fn generate(spec: &TypedSpec, g: &Graph) -> Result<Encoded, EncodeError> {
    let matches = find_mapping_matches(spec, g);
    generate_with_matches(spec, g, matches)
}

/// As [`generate`], with precomputed matches (one list per mapping).
pub fn generate_with_matches(spec: &TypedSpec, g: &Graph, matches: Vec<Vec<Match>>) -> Result<Encoded, EncodeError> {
    let (mut problem, table) = instantiate_mappings(spec, &matches);
    let ctx = Ctx::new(&matches);
    let mut warnings = Vec::new();
    for c in &spec.constraints {
        let bindings = expand_contexts(spec, g, &matches, &c.context);
        debug!("{}: {} instances", c.label, bindings.len());
        for b in bindings {
            let (s, var) = scope(g, &b);
            let mut atoms = Vec::new();
            let f = formula(&ctx, &c.body, &s, var, false, &mut atoms).map_err(|e| EncodeError::Eval {
                item: c.label.clone(),
                element: b.to_string(),
                message: e.0,
            })?;
            if f == Formula::Const(false) {
                warnings.push(format!("{} is violated by {b} regardless of the mapping variables", c.label));
            }
            encode_formula(&f, &atoms, &mut problem).map_err(|e| EncodeError::Eval {
                item: c.label.clone(),
                element: b.to_string(),
                message: e.to_string(),
            })?;
        }
    }
    problem.objective = build_objective(spec, g, &matches, &table)?;
    debug!(
        "generated {} variables ({} mapping), {} rows",
        problem.variables.len(),
        table.len(),
        problem.rows.len()
    );
    Ok(Encoded { problem, table, matches, warnings })
}

/// Applies the rule of every selected mapping variable, in variable order,
/// to a copy of `g`. Each match is revalidated against the evolving graph.
pub fn apply_selection(spec: &TypedSpec, g: &Graph, table: &MappingTable, x: &[f64]) -> Result<Graph, EncodeError> {
    let mut out = g.clone();
    for (_, mapping, m) in table.selected(x) {
        let idx = spec.mapping_index(mapping).ok_or_else(|| EncodeError::Apply(format!("unknown mapping {mapping}")))?;
        let rule = spec.mapping_rule(idx);
        let delta = apply_rule(&out, rule, m).map_err(|e| EncodeError::Apply(e.to_string()))?;
        out.apply_delta_in_place(&delta).map_err(|e| EncodeError::Apply(e.to_string()))?;
    }
    Ok(out)
}
