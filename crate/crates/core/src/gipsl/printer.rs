//! Canonical pretty printer. `parse(&print_spec(s))` reproduces `s`.

use std::fmt::Write;

use super::ast::*;

pub fn print_spec(spec: &Spec) -> String {
    let mut out = String::new();
    for r in &spec.rules {
        print_pattern(&mut out, "rule", &r.lhs, &r.actions);
    }
    for p in &spec.patterns {
        print_pattern(&mut out, "pattern", p, &[]);
    }
    for m in &spec.mappings {
        let _ = writeln!(out, "mapping {} with {};\n", m.name, m.rule);
    }
    for c in &spec.constraints {
        let _ = writeln!(out, "constraint -> {} {{\n    {}\n}}\n", context(&c.context), print_expr(&c.body));
    }
    for o in &spec.objectives {
        let _ = writeln!(out, "objective {} -> {} {{\n    {}\n}}\n", o.name, context(&o.context), print_expr(&o.body));
    }
    if let Some(g) = &spec.global_objective {
        let sense = match g.sense {
            Sense::Min => "min",
            Sense::Max => "max",
        };
        let _ = writeln!(out, "global objective : {sense} {{\n    {}\n}}", print_expr(&g.body));
    }
    out
}

fn context(c: &Context) -> String {
    format!("{}::{}", c.kind.keyword(), c.target)
}

fn print_pattern(out: &mut String, keyword: &str, p: &PatternDecl, actions: &[ActionDecl]) {
    let _ = writeln!(out, "{keyword} {} {{", p.name);
    for n in &p.nodes {
        let _ = writeln!(out, "    node {} : {};", n.name, n.ty);
    }
    for e in &p.edges {
        match &e.name {
            Some(name) => {
                let _ = writeln!(out, "    edge {name} : {}({} -> {});", e.ty, e.src, e.tgt);
            }
            None => {
                let _ = writeln!(out, "    edge {}({} -> {});", e.ty, e.src, e.tgt);
            }
        }
    }
    for c in &p.conditions {
        let _ = writeln!(out, "    condition {};", print_expr(c));
    }
    for a in actions {
        let _ = match a {
            ActionDecl::CreateNode { name, ty, attrs, .. } => {
                let body: Vec<String> = attrs.iter().map(|(k, v)| format!("{k} = {}", print_expr(v))).collect();
                writeln!(out, "    create node {name} : {ty} {{ {} }};", body.join(", "))
            }
            ActionDecl::CreateEdge { ty, src, tgt, .. } => writeln!(out, "    create edge {ty}({src} -> {tgt});"),
            ActionDecl::DeleteEdge { name, .. } => writeln!(out, "    delete edge {name};"),
            ActionDecl::DeleteNode { name, .. } => writeln!(out, "    delete node {name};"),
            ActionDecl::SetAttr { node, attr, value, .. } => {
                writeln!(out, "    set {node}.{attr} = {};", print_expr(value))
            }
        };
    }
    let _ = writeln!(out, "}}\n");
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match &e.kind {
        ExprKind::Int(i) => {
            let _ = write!(out, "{i}");
        }
        ExprKind::Real(r) => {
            let _ = write!(out, "{r:?}");
        }
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        ExprKind::Path(p) => write_path(out, p),
        ExprKind::Unary(op, inner) => {
            let word = match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
                UnaryOp::Sin => "sin",
                UnaryOp::Cos => "cos",
                UnaryOp::Sqrt => "sqrt",
            };
            out.push_str(word);
            // operands of unary operators are always parenthesized unless atomic
            let atomic = matches!(inner.kind, ExprKind::Path(_) | ExprKind::Bool(_) | ExprKind::Set(_))
                || (matches!(inner.kind, ExprKind::Int(_) | ExprKind::Real(_)) && *op != UnaryOp::Neg);
            if atomic && *op == UnaryOp::Not {
                write_expr(out, inner, 6);
            } else if atomic {
                out.push(' ');
                write_expr(out, inner, 6);
            } else {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            }
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            write_expr(out, l, prec);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, prec + 1);
            if paren {
                out.push(')');
            }
        }
        ExprKind::Set(s) => {
            let _ = write!(out, "mappings.{}", s.mapping);
            if let Some(f) = &s.filter {
                let _ = write!(out, "->filter({} | {})", f.var, print_expr(&f.body));
            }
            let _ = write!(out, "->sum({} | {})", s.sum.var, print_expr(&s.sum.body));
        }
    }
}

fn write_path(out: &mut String, p: &Path) {
    match &p.root {
        PathRoot::SelfRef => out.push_str("self"),
        PathRoot::Var(v) => out.push_str(v),
    }
    if p.value {
        out.push_str(".value()");
        return;
    }
    if let Some(n) = &p.node {
        let _ = write!(out, ".nodes().{n}");
    }
    if let Some(a) = &p.attr {
        let _ = write!(out, ".{a}");
    }
}
