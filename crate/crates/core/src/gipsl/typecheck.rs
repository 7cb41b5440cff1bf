//! Name resolution, typing and linearity checks.
//!
//! Every diagnostic carries a source position. The checker keeps going after
//! an error so a single run reports as many problems as possible.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::typed::*;
use super::{Diagnostic, GipslError};
use crate::model::{AttrKind, Metamodel, Value};
use crate::pattern::{Action, Pattern, PatternEdge, PatternNode, Rule};

#[derive(Debug, Clone, PartialEq)]
enum Ty {
    Bool,
    Int,
    Real,
    Str,
    Node(String),
}

impl Ty {
    fn of(kind: AttrKind) -> Ty {
        match kind {
            AttrKind::Int => Ty::Int,
            AttrKind::Real => Ty::Real,
            AttrKind::Bool => Ty::Bool,
            AttrKind::String => Ty::Str,
        }
    }

    fn numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Real)
    }

    fn describe(&self) -> String {
        match self {
            Ty::Bool => "bool".into(),
            Ty::Int => "int".into(),
            Ty::Real => "real".into(),
            Ty::Str => "string".into(),
            Ty::Node(t) => format!("node of type {t}"),
        }
    }
}

/// Pattern nodes visible through a match-typed name.
#[derive(Debug, Clone)]
struct MatchTy {
    nodes: Vec<(String, String)>,
    has_var: bool,
}

#[derive(Debug, Clone)]
enum SelfTy {
    Node(String),
    Match(MatchTy),
}

#[derive(Clone, Default)]
struct Env {
    self_ty: Option<SelfTy>,
    /// Pattern nodes of a rule/pattern declaration.
    bound: Vec<(String, String)>,
    lambda: Option<(String, MatchTy)>,
    /// Whether set expressions and `value()` may appear.
    allow_vars: bool,
    /// Explains why variables are forbidden, for diagnostics.
    no_vars_reason: &'static str,
}

struct Typed {
    expr: TExpr,
    ty: Ty,
}

/// Typechecks `spec` against `mm`.
pub fn typecheck(spec: &Spec, mm: &Metamodel) -> Result<TypedSpec, GipslError> {
    let mut c = Checker { mm, spec, diags: Vec::new(), warnings: Vec::new() };
    let out = c.run();
    if c.diags.is_empty() {
        let mut out = out.expect("no diagnostics implies a result");
        out.warnings = c.warnings;
        Ok(out)
    } else {
        Err(GipslError::Type(c.diags))
    }
}

struct Checker<'a> {
    mm: &'a Metamodel,
    spec: &'a Spec,
    diags: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn err(&mut self, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic { span, message: message.into() });
    }

    fn run(&mut self) -> Option<TypedSpec> {
        let mut names = BTreeSet::new();
        for r in &self.spec.rules {
            if !names.insert(r.name().to_string()) {
                self.err(r.lhs.span, format!("duplicate rule or pattern `{}`", r.name()));
            }
        }
        for p in &self.spec.patterns {
            if !names.insert(p.name.clone()) {
                self.err(p.span, format!("duplicate rule or pattern `{}`", p.name));
            }
        }

        let rules: Vec<Rule> = self.spec.rules.iter().map(|r| self.rule(r)).collect();
        let patterns: Vec<Pattern> = self.spec.patterns.iter().map(|p| self.pattern(p)).collect();

        let mut mappings = Vec::new();
        for m in &self.spec.mappings {
            if mappings.iter().any(|x: &Mapping| x.name == m.name) {
                self.err(m.span, format!("duplicate mapping `{}`", m.name));
                continue;
            }
            match rules.iter().position(|r| r.name == m.rule) {
                Some(rule) => mappings.push(Mapping { name: m.name.clone(), rule }),
                None => self.err(m.span, format!("mapping `{}` references unknown rule `{}`", m.name, m.rule)),
            }
        }

        let mut ctx = Ctx { rules: &rules, patterns: &patterns, mappings: &mappings };

        let mut constraints = Vec::new();
        for (i, c) in self.spec.constraints.iter().enumerate() {
            let Some((context, self_ty)) = self.context(&c.context, &ctx) else { continue };
            let env = Env { self_ty: Some(self_ty), allow_vars: true, ..Env::default() };
            if let Some(t) = self.expr(&c.body, &env, &mut ctx) {
                if t.ty != Ty::Bool {
                    self.err(c.body.span, format!("constraint body must be boolean, found {}", t.ty.describe()));
                    continue;
                }
                constraints.push(TypedConstraint {
                    label: format!(
                        "constraint #{} -> {}::{} (line {})",
                        i + 1,
                        c.context.kind.keyword(),
                        c.context.target,
                        c.span.line
                    ),
                    context,
                    body: t.expr,
                });
            }
        }

        let mut objectives: Vec<TypedObjective> = Vec::new();
        for o in &self.spec.objectives {
            if objectives.iter().any(|x| x.name == o.name) {
                self.err(o.span, format!("duplicate objective `{}`", o.name));
                continue;
            }
            let Some((context, self_ty)) = self.context(&o.context, &ctx) else { continue };
            let is_mapping = matches!(context, TypedContext::Mapping(_));
            let env = Env {
                self_ty: Some(self_ty),
                allow_vars: !is_mapping,
                no_vars_reason: "nonlinear term: a mapping-context objective is multiplied by its own variable, so its body must be constant per match",
                ..Env::default()
            };
            let Some(t) = self.expr(&o.body, &env, &mut ctx) else { continue };
            if !t.ty.numeric() {
                self.err(o.body.span, format!("objective body must be numeric, found {}", t.ty.describe()));
                continue;
            }
            if !is_mapping && !t.expr.has_vars() {
                self.warnings.push(Diagnostic {
                    span: o.span,
                    message: format!(
                        "objective `{}` has no decision variables in a {} context; it only adds a constant",
                        o.name,
                        o.context.kind.keyword()
                    ),
                });
            }
            objectives.push(TypedObjective { name: o.name.clone(), context, body: t.expr });
        }

        let global = match &self.spec.global_objective {
            None => {
                self.err(Span::new(1, 1), "missing global objective");
                None
            }
            Some(g) => self.global(g, &objectives),
        };

        if !self.diags.is_empty() {
            return None;
        }
        Some(TypedSpec {
            rules,
            patterns,
            mappings,
            constraints,
            objectives,
            global: global?,
            warnings: Vec::new(),
        })
    }

    fn pattern(&mut self, p: &PatternDecl) -> Pattern {
        let mut nodes: Vec<PatternNode> = Vec::new();
        for n in &p.nodes {
            if nodes.iter().any(|x| x.name == n.name) {
                self.err(n.span, format!("duplicate pattern node `{}`", n.name));
                continue;
            }
            if self.mm.node_type(&n.ty).is_none() {
                self.err(n.span, format!("unknown node type `{}`", n.ty));
                continue;
            }
            nodes.push(PatternNode { name: n.name.clone(), ty: n.ty.clone() });
        }
        let mut edges: Vec<PatternEdge> = Vec::new();
        for (i, e) in p.edges.iter().enumerate() {
            let name = e.name.clone().unwrap_or_else(|| format!("_{}{}", e.ty, i));
            if edges.iter().any(|x| x.name == name) {
                self.err(e.span, format!("duplicate pattern edge `{name}`"));
                continue;
            }
            let Some(et) = self.mm.edge_type(&e.ty) else {
                self.err(e.span, format!("unknown edge type `{}`", e.ty));
                continue;
            };
            let mut ok = true;
            for (end, decl) in [(&e.src, &et.source), (&e.tgt, &et.target)] {
                match nodes.iter().find(|n| &n.name == end) {
                    None => {
                        self.err(e.span, format!("unknown pattern node `{end}`"));
                        ok = false;
                    }
                    Some(n) if !self.mm.types_overlap(&n.ty, decl) => {
                        self.err(e.span, format!("pattern node `{end}` of type {} cannot be an endpoint of `{}`", n.ty, e.ty));
                        ok = false;
                    }
                    _ => {}
                }
            }
            if ok {
                edges.push(PatternEdge { name, ty: e.ty.clone(), src: e.src.clone(), tgt: e.tgt.clone() });
            }
        }
        let bound: Vec<(String, String)> = nodes.iter().map(|n| (n.name.clone(), n.ty.clone())).collect();
        let env = Env {
            bound,
            no_vars_reason: "pattern conditions are evaluated per match and cannot reference mapping variables",
            ..Env::default()
        };
        let mut condition: Option<TExpr> = None;
        let empty = Ctx::default();
        for c in &p.conditions {
            let Some(t) = self.expr(c, &env, &mut empty.clone()) else { continue };
            if t.ty != Ty::Bool {
                self.err(c.span, format!("condition must be boolean, found {}", t.ty.describe()));
                continue;
            }
            condition = Some(match condition {
                None => t.expr,
                Some(prev) => TExpr::Binary(BinaryOp::And, Box::new(prev), Box::new(t.expr)),
            });
        }
        Pattern { name: p.name.clone(), nodes, edges, condition }
    }

    fn rule(&mut self, r: &RuleDecl) -> Rule {
        let lhs = self.pattern(&r.lhs);
        let bound: Vec<(String, String)> = lhs.nodes.iter().map(|n| (n.name.clone(), n.ty.clone())).collect();
        let env = Env {
            bound: bound.clone(),
            no_vars_reason: "rule actions are evaluated per match and cannot reference mapping variables",
            ..Env::default()
        };
        // node name -> type, for LHS nodes and nodes created so far
        let mut known: BTreeMap<String, String> = bound.into_iter().collect();
        let mut deleted: BTreeSet<String> = BTreeSet::new();
        let mut actions = Vec::new();
        let empty = Ctx::default();
        for a in &r.actions {
            let span = a.span();
            match a {
                ActionDecl::CreateNode { name, ty, attrs, .. } => {
                    if known.contains_key(name) {
                        self.err(span, format!("node `{name}` already exists in rule `{}`", lhs.name));
                        continue;
                    }
                    if self.mm.node_type(ty).is_none() {
                        self.err(span, format!("unknown node type `{ty}`"));
                        continue;
                    }
                    let mut typed_attrs = Vec::new();
                    for (attr, e) in attrs {
                        if let Some(t) = self.assignment(ty, attr, e, span, &env, &mut empty.clone()) {
                            typed_attrs.push((attr.clone(), t));
                        }
                    }
                    known.insert(name.clone(), ty.clone());
                    actions.push(Action::CreateNode { name: name.clone(), ty: ty.clone(), attrs: typed_attrs });
                }
                ActionDecl::CreateEdge { ty, src, tgt, .. } => {
                    let Some(et) = self.mm.edge_type(ty) else {
                        self.err(span, format!("unknown edge type `{ty}`"));
                        continue;
                    };
                    let et = et.clone();
                    let mut ok = true;
                    for (end, decl) in [(src, &et.source), (tgt, &et.target)] {
                        match known.get(end) {
                            None => {
                                self.err(span, format!("unknown node `{end}` in rule `{}`", lhs.name));
                                ok = false;
                            }
                            Some(t) if !self.mm.types_overlap(t, decl) => {
                                self.err(span, format!("node `{end}` of type {t} cannot be an endpoint of `{ty}`"));
                                ok = false;
                            }
                            _ => {}
                        }
                    }
                    if ok {
                        actions.push(Action::CreateEdge { ty: ty.clone(), src: src.clone(), tgt: tgt.clone() });
                    }
                }
                ActionDecl::DeleteEdge { name, .. } => {
                    if lhs.edge(name).is_none() {
                        self.err(span, format!("unknown pattern edge `{name}` in rule `{}`", lhs.name));
                    } else {
                        actions.push(Action::DeleteEdge { edge: name.clone() });
                    }
                }
                ActionDecl::DeleteNode { name, .. } => {
                    if lhs.node(name).is_none() {
                        self.err(span, format!("only matched nodes can be deleted; `{name}` is not a pattern node"));
                    } else if !deleted.insert(name.clone()) {
                        self.err(span, format!("node `{name}` deleted twice"));
                    } else {
                        actions.push(Action::DeleteNode { node: name.clone() });
                    }
                }
                ActionDecl::SetAttr { node, attr, value, .. } => {
                    let Some(ty) = known.get(node).cloned() else {
                        self.err(span, format!("unknown node `{node}` in rule `{}`", lhs.name));
                        continue;
                    };
                    if let Some(t) = self.assignment(&ty, attr, value, span, &env, &mut empty.clone()) {
                        actions.push(Action::SetAttr { node: node.clone(), attr: attr.clone(), value: t });
                    }
                }
            }
        }
        Rule { name: lhs.name.clone(), lhs, actions }
    }

    fn assignment(&mut self, node_ty: &str, attr: &str, e: &Expr, span: Span, env: &Env, ctx: &mut Ctx) -> Option<TExpr> {
        let Some(decl) = self.mm.attribute(node_ty, attr) else {
            self.err(span, format!("type {node_ty} has no attribute `{attr}`"));
            return None;
        };
        let kind = decl.kind;
        let t = self.expr(e, env, ctx)?;
        let ok = match kind {
            AttrKind::Int => t.ty == Ty::Int,
            AttrKind::Real => t.ty.numeric(),
            AttrKind::Bool => t.ty == Ty::Bool,
            AttrKind::String => t.ty == Ty::Str,
        };
        if !ok {
            self.err(e.span, format!("attribute `{attr}` has kind {kind}, expression is {}", t.ty.describe()));
            return None;
        }
        Some(t.expr)
    }

    fn context(&mut self, c: &Context, ctx: &Ctx) -> Option<(TypedContext, SelfTy)> {
        let match_ty = |p: &Pattern, has_var: bool| MatchTy {
            nodes: p.nodes.iter().map(|n| (n.name.clone(), n.ty.clone())).collect(),
            has_var,
        };
        match c.kind {
            ContextKind::Class => {
                if self.mm.node_type(&c.target).is_none() {
                    self.err(c.span, format!("unknown type `{}`", c.target));
                    return None;
                }
                Some((TypedContext::Class(c.target.clone()), SelfTy::Node(c.target.clone())))
            }
            ContextKind::Mapping => match ctx.mappings.iter().position(|m| m.name == c.target) {
                Some(i) => {
                    let p = &ctx.rules[ctx.mappings[i].rule].lhs;
                    Some((TypedContext::Mapping(i), SelfTy::Match(match_ty(p, true))))
                }
                None => {
                    self.err(c.span, format!("unknown mapping `{}`", c.target));
                    None
                }
            },
            ContextKind::Pattern => {
                if let Some(i) = ctx.patterns.iter().position(|p| p.name == c.target) {
                    Some((TypedContext::Pattern(PatternRef::Declared(i)), SelfTy::Match(match_ty(&ctx.patterns[i], false))))
                } else if let Some(i) = ctx.rules.iter().position(|r| r.name == c.target) {
                    Some((TypedContext::Pattern(PatternRef::RuleLhs(i)), SelfTy::Match(match_ty(&ctx.rules[i].lhs, false))))
                } else {
                    self.err(c.span, format!("unknown pattern or rule `{}`", c.target));
                    None
                }
            }
        }
    }

    fn global(&mut self, g: &GlobalObjectiveDecl, objectives: &[TypedObjective]) -> Option<GlobalObjective> {
        let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
        let mut constant = 0.0;
        let before = self.diags.len();
        self.weighted(&g.body, 1.0, objectives, &mut weights, &mut constant);
        if self.diags.len() > before {
            return None;
        }
        Some(GlobalObjective { sense: g.sense, weights: weights.into_iter().collect(), constant })
    }

    /// Accumulates `factor * e` into per-objective weights.
    fn weighted(&mut self, e: &Expr, factor: f64, objs: &[TypedObjective], w: &mut BTreeMap<usize, f64>, constant: &mut f64) {
        match &e.kind {
            ExprKind::Int(i) => *constant += factor * *i as f64,
            ExprKind::Real(r) => *constant += factor * r,
            ExprKind::Path(Path { root: PathRoot::Var(name), node: None, attr: None, value: false }) => {
                match objs.iter().position(|o| &o.name == name) {
                    Some(i) => *w.entry(i).or_insert(0.0) += factor,
                    None => self.err(e.span, format!("unknown objective `{name}`")),
                }
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => self.weighted(inner, -factor, objs, w, constant),
            ExprKind::Binary(BinaryOp::Add, a, b) => {
                self.weighted(a, factor, objs, w, constant);
                self.weighted(b, factor, objs, w, constant);
            }
            ExprKind::Binary(BinaryOp::Sub, a, b) => {
                self.weighted(a, factor, objs, w, constant);
                self.weighted(b, -factor, objs, w, constant);
            }
            ExprKind::Binary(BinaryOp::Mul, a, b) => {
                if let Some(k) = const_number(a) {
                    self.weighted(b, factor * k, objs, w, constant);
                } else if let Some(k) = const_number(b) {
                    self.weighted(a, factor * k, objs, w, constant);
                } else {
                    self.err(e.span, "global objective weight is not constant");
                }
            }
            ExprKind::Binary(BinaryOp::Div, a, b) => match const_number(b) {
                Some(k) if k != 0.0 => self.weighted(a, factor / k, objs, w, constant),
                Some(_) => self.err(b.span, "division by zero in global objective weight"),
                None => self.err(e.span, "global objective weight is not constant"),
            },
            _ => self.err(e.span, "global objective must be a weighted sum of objective names"),
        }
    }

    fn expr(&mut self, e: &Expr, env: &Env, ctx: &mut Ctx) -> Option<Typed> {
        match &e.kind {
            ExprKind::Int(i) => Some(Typed { expr: TExpr::Const(Value::Int(*i)), ty: Ty::Int }),
            ExprKind::Real(r) => Some(Typed { expr: TExpr::Const(Value::Real(*r)), ty: Ty::Real }),
            ExprKind::Bool(b) => Some(Typed { expr: TExpr::Const(Value::Bool(*b)), ty: Ty::Bool }),
            ExprKind::Str(s) => Some(Typed { expr: TExpr::Const(Value::Str(s.clone())), ty: Ty::Str }),
            ExprKind::Path(p) => self.path(p, e.span, env),
            ExprKind::Unary(op, inner) => {
                let t = self.expr(inner, env, ctx)?;
                let ty = match op {
                    UnaryOp::Not => {
                        if t.ty != Ty::Bool {
                            self.err(e.span, format!("`!` expects bool, found {}", t.ty.describe()));
                            return None;
                        }
                        Ty::Bool
                    }
                    UnaryOp::Neg => {
                        if !t.ty.numeric() {
                            self.err(e.span, format!("`-` expects a number, found {}", t.ty.describe()));
                            return None;
                        }
                        t.ty.clone()
                    }
                    UnaryOp::Sin | UnaryOp::Cos | UnaryOp::Sqrt => {
                        if !t.ty.numeric() {
                            self.err(e.span, format!("expects a number, found {}", t.ty.describe()));
                            return None;
                        }
                        if t.expr.has_vars() {
                            self.err(e.span, "sin/cos/sqrt are only allowed on constant subexpressions");
                            return None;
                        }
                        Ty::Real
                    }
                };
                Some(Typed { expr: TExpr::Unary(*op, Box::new(t.expr)), ty })
            }
            ExprKind::Binary(op, a, b) => {
                let l = self.expr(a, env, ctx);
                let r = self.expr(b, env, ctx);
                let (l, r) = (l?, r?);
                let ty = self.binary(*op, &l, &r, e.span)?;
                Some(Typed { expr: TExpr::Binary(*op, Box::new(l.expr), Box::new(r.expr)), ty })
            }
            ExprKind::Set(s) => self.set(s, e.span, env, ctx),
        }
    }

    fn binary(&mut self, op: BinaryOp, l: &Typed, r: &Typed, span: Span) -> Option<Ty> {
        use BinaryOp::*;
        let (lv, rv) = (l.expr.has_vars(), r.expr.has_vars());
        match op {
            And | Or => {
                if l.ty != Ty::Bool || r.ty != Ty::Bool {
                    self.err(span, format!("`{}` expects bool operands, found {} and {}", op.symbol(), l.ty.describe(), r.ty.describe()));
                    return None;
                }
                Some(Ty::Bool)
            }
            Add | Sub | Mul | Div => {
                if !l.ty.numeric() || !r.ty.numeric() {
                    self.err(span, format!("`{}` expects numbers, found {} and {}", op.symbol(), l.ty.describe(), r.ty.describe()));
                    return None;
                }
                if op == Mul && lv && rv {
                    self.err(span, "nonlinear term: product of two variable-bearing expressions");
                    return None;
                }
                if op == Div && rv {
                    self.err(span, "nonlinear term: divisor mentions mapping variables");
                    return None;
                }
                if op == Div {
                    if let TExpr::Const(v) = &r.expr {
                        if v.as_f64() == Some(0.0) {
                            self.err(span, "division by zero");
                            return None;
                        }
                    }
                    return Some(Ty::Real);
                }
                Some(if l.ty == Ty::Int && r.ty == Ty::Int { Ty::Int } else { Ty::Real })
            }
            Lt | Le | Gt | Ge => {
                if !l.ty.numeric() || !r.ty.numeric() {
                    self.err(span, format!("`{}` expects numbers, found {} and {}", op.symbol(), l.ty.describe(), r.ty.describe()));
                    return None;
                }
                Some(Ty::Bool)
            }
            Eq | Ne => {
                let ok = match (&l.ty, &r.ty) {
                    (a, b) if a.numeric() && b.numeric() => true,
                    (Ty::Bool, Ty::Bool) => {
                        if lv || rv {
                            self.err(span, "comparing variable-bearing booleans is not supported; use `&`/`|`/`!`");
                            return None;
                        }
                        true
                    }
                    (Ty::Str, Ty::Str) => true,
                    (Ty::Node(a), Ty::Node(b)) => {
                        if !self.mm.types_overlap(a, b) {
                            self.warnings.push(Diagnostic {
                                span,
                                message: format!("comparison between unrelated node types {a} and {b} is always false"),
                            });
                        }
                        true
                    }
                    _ => false,
                };
                if !ok {
                    self.err(span, format!("cannot compare {} with {}", l.ty.describe(), r.ty.describe()));
                    return None;
                }
                Some(Ty::Bool)
            }
        }
    }

    fn path(&mut self, p: &Path, span: Span, env: &Env) -> Option<Typed> {
        let attr_of = |this: &mut Self, node: NodeRef, node_ty: &str, attr: &Option<String>| -> Option<Typed> {
            match attr {
                None => Some(Typed { expr: TExpr::Node(node), ty: Ty::Node(node_ty.to_string()) }),
                Some(a) => match this.mm.attribute(node_ty, a) {
                    Some(d) => Some(Typed { expr: TExpr::Attr(node, a.clone()), ty: Ty::of(d.kind) }),
                    None => {
                        this.err(span, format!("type {node_ty} has no attribute `{a}`"));
                        None
                    }
                },
            }
        };
        let through_match = |this: &mut Self, mt: &MatchTy, mk: fn(String) -> NodeRef, what: &str| -> Option<Typed> {
            match &p.node {
                Some(n) => match mt.nodes.iter().find(|(name, _)| name == n) {
                    Some((_, ty)) => attr_of(this, mk(n.clone()), &ty.clone(), &p.attr),
                    None => {
                        this.err(span, format!("{what} has no node `{n}`"));
                        None
                    }
                },
                None => {
                    this.err(span, format!("{what} is a match; use `.nodes().NAME` to reach its nodes"));
                    None
                }
            }
        };
        match &p.root {
            PathRoot::SelfRef => match env.self_ty.clone() {
                None => {
                    self.err(span, "`self` is not available here");
                    None
                }
                Some(SelfTy::Node(t)) => {
                    if p.node.is_some() {
                        self.err(span, "`self.nodes()` used in class context; `self` is a model element here");
                        return None;
                    }
                    if p.value {
                        self.err(span, "`self.value()` is only available in a mapping context");
                        return None;
                    }
                    attr_of(self, NodeRef::SelfNode, &t, &p.attr)
                }
                Some(SelfTy::Match(mt)) => {
                    if p.value {
                        if !mt.has_var {
                            self.err(span, "`self.value()` is only available in a mapping context");
                            return None;
                        }
                        if !env.allow_vars {
                            self.err(span, env.no_vars_reason);
                            return None;
                        }
                        return Some(Typed { expr: TExpr::SelfVar, ty: Ty::Int });
                    }
                    through_match(self, &mt, NodeRef::SelfMatch, "`self`")
                }
            },
            PathRoot::Var(x) => {
                if let Some((var, mt)) = env.lambda.clone() {
                    if &var == x {
                        if p.value {
                            self.err(span, "`value()` is not available on set elements; the sum already multiplies by the element's variable");
                            return None;
                        }
                        return through_match(self, &mt, NodeRef::Element, &format!("`{x}`"));
                    }
                }
                if let Some((_, ty)) = env.bound.iter().find(|(n, _)| n == x).cloned() {
                    if p.node.is_some() || p.value {
                        self.err(span, format!("`{x}` is a node, not a match"));
                        return None;
                    }
                    return attr_of(self, NodeRef::Bound(x.clone()), &ty, &p.attr);
                }
                self.err(span, format!("unknown name `{x}`"));
                None
            }
        }
    }

    fn set(&mut self, s: &SetExpr, span: Span, env: &Env, ctx: &mut Ctx) -> Option<Typed> {
        if !env.allow_vars {
            self.err(span, env.no_vars_reason);
            return None;
        }
        let Some(mapping) = ctx.mappings.iter().position(|m| m.name == s.mapping) else {
            self.err(span, format!("unknown mapping `{}`", s.mapping));
            return None;
        };
        let lhs = &ctx.rules[ctx.mappings[mapping].rule].lhs;
        let mt = MatchTy { nodes: lhs.nodes.iter().map(|n| (n.name.clone(), n.ty.clone())).collect(), has_var: true };
        let inner = |var: &str, reason: &'static str| Env {
            self_ty: env.self_ty.clone(),
            bound: env.bound.clone(),
            lambda: Some((var.to_string(), mt.clone())),
            allow_vars: false,
            no_vars_reason: reason,
        };
        let filter = match &s.filter {
            None => None,
            Some(f) => {
                let fenv = inner(&f.var, "filter predicate references mapping variables; it must be decidable per match");
                let t = self.expr(&f.body, &fenv, ctx)?;
                if t.ty != Ty::Bool {
                    self.err(f.body.span, format!("filter predicate must be boolean, found {}", t.ty.describe()));
                    return None;
                }
                Some(t.expr)
            }
        };
        let senv = inner(&s.sum.var, "nonlinear term: sum body must be constant per match");
        let body = self.expr(&s.sum.body, &senv, ctx)?;
        if !body.ty.numeric() {
            self.err(s.sum.body.span, format!("sum body must be numeric, found {}", body.ty.describe()));
            return None;
        }
        let ty = if body.ty == Ty::Int { Ty::Int } else { Ty::Real };
        Some(Typed { expr: TExpr::Sum(Box::new(SumExpr { mapping, filter, body: body.expr })), ty })
    }
}

#[derive(Clone, Copy, Default)]
struct Ctx<'r> {
    rules: &'r [Rule],
    patterns: &'r [Pattern],
    mappings: &'r [Mapping],
}

fn const_number(e: &Expr) -> Option<f64> {
    match &e.kind {
        ExprKind::Int(i) => Some(*i as f64),
        ExprKind::Real(r) => Some(*r),
        ExprKind::Unary(UnaryOp::Neg, inner) => const_number(inner).map(|x| -x),
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (const_number(a)?, const_number(b)?);
            match op {
                BinaryOp::Add => Some(a + b),
                BinaryOp::Sub => Some(a - b),
                BinaryOp::Mul => Some(a * b),
                BinaryOp::Div if b != 0.0 => Some(a / b),
                _ => None,
            }
        }
        _ => None,
    }
}
