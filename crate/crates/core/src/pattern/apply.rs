use std::collections::{BTreeMap, BTreeSet};

use super::{Action, Match, Pattern, PatternError, Rule};
use crate::gipsl::eval::{eval, eval_bool, Scope};
use crate::model::{AttrUpdate, CreatedEdge, CreatedNode, Graph, GraphDelta, Value};

/// True iff `m` still binds existing, correctly typed, distinct nodes that
/// realize every pattern edge and satisfy the condition.
pub fn revalidate(g: &Graph, p: &Pattern, m: &Match) -> bool {
    m.pattern == p.name && binding_valid(g, p, m)
}

pub(super) fn binding_valid(g: &Graph, p: &Pattern, m: &Match) -> bool {
    if m.binding.len() != p.nodes.len() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for (pn, (name, id)) in p.nodes.iter().zip(&m.binding) {
        if &pn.name != name || !seen.insert(id.as_str()) {
            return false;
        }
        match g.node(id) {
            Some(n) if g.metamodel().is_subtype(&n.ty, &pn.ty) => {}
            _ => return false,
        }
    }
    let realized = p.edges.iter().all(|e| match (m.node(&e.src), m.node(&e.tgt)) {
        (Some(s), Some(t)) => g.has_edge(&e.ty, s, t),
        _ => false,
    });
    realized
        && p.condition
            .as_ref()
            .is_none_or(|c| eval_bool(c, &Scope::with_bound(g, m)).unwrap_or(false))
}

/// Computes the delta of applying `r` at `m`. Attribute expressions read the
/// state before application.
pub fn apply_rule(g: &Graph, r: &Rule, m: &Match) -> Result<GraphDelta, PatternError> {
    if !revalidate(g, &r.lhs, m) {
        return Err(PatternError::StaleMatch(m.to_string()));
    }
    let scope = Scope::with_bound(g, m);
    let eval_err = |e: crate::gipsl::eval::EvalError| PatternError::Eval { rule: r.name.clone(), message: e.0 };
    let mm = g.metamodel();
    let mut created: BTreeMap<&str, (String, String)> = BTreeMap::new();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut delta = GraphDelta::default();

    let resolve = |created: &BTreeMap<&str, (String, String)>, name: &str| -> String {
        match created.get(name) {
            Some((id, _)) => id.clone(),
            None => m.node(name).expect("typechecked reference").to_string(),
        }
    };
    let coerce = |ty: &str, attr: &str, v: Value| -> Result<Value, PatternError> {
        let kind = mm.attribute(ty, attr).map(|a| a.kind).ok_or_else(|| PatternError::Eval {
            rule: r.name.clone(),
            message: format!("type {ty} has no attribute `{attr}`"),
        })?;
        let shown = v.to_string();
        v.coerce(kind).ok_or_else(|| PatternError::Eval {
            rule: r.name.clone(),
            message: format!("value {shown} does not fit attribute `{attr}` of kind {kind}"),
        })
    };

    for a in &r.actions {
        match a {
            Action::CreateNode { name, ty, attrs } => {
                let id = g.fresh_id(&format!("{}.{}", r.name, name), &taken);
                taken.insert(id.clone());
                let mut values: BTreeMap<String, Value> =
                    mm.all_attributes(ty).into_iter().map(|d| (d.name.clone(), Value::default_for(d.kind))).collect();
                for (attr, e) in attrs {
                    let v = eval(e, &scope).and_then(|v| v.into_value()).map_err(eval_err)?;
                    values.insert(attr.clone(), coerce(ty, attr, v)?);
                }
                delta.created_nodes.push(CreatedNode { id: id.clone(), ty: ty.clone(), attrs: values });
                created.insert(name.as_str(), (id, ty.clone()));
            }
            Action::CreateEdge { ty, src, tgt } => {
                let (s, t) = (resolve(&created, src), resolve(&created, tgt));
                let id = g.fresh_id(&format!("{ty}:{s}->{t}"), &taken);
                taken.insert(id.clone());
                delta.created_edges.push(CreatedEdge { id, ty: ty.clone(), src: s, tgt: t });
            }
            Action::DeleteEdge { edge } => {
                let pe = r.lhs.edge(edge).expect("typechecked edge");
                let (s, t) = (resolve(&created, &pe.src), resolve(&created, &pe.tgt));
                // with parallel edges the smallest unclaimed id is removed
                let victim = g
                    .out_edges(&s)
                    .filter(|(id, e)| e.ty == pe.ty && e.tgt == t && !delta.deleted_edges.iter().any(|d| d == id))
                    .map(|(id, _)| id.to_string())
                    .min();
                match victim {
                    Some(id) => delta.deleted_edges.push(id),
                    None => return Err(PatternError::StaleMatch(m.to_string())),
                }
            }
            Action::DeleteNode { node } => delta.deleted_nodes.push(resolve(&created, node)),
            Action::SetAttr { node, attr, value } => {
                let id = resolve(&created, node);
                let ty = match created.get(node.as_str()) {
                    Some((_, ty)) => ty.clone(),
                    None => g.node(&id).expect("bound node").ty.clone(),
                };
                let v = eval(value, &scope).and_then(|v| v.into_value()).map_err(eval_err)?;
                let v = coerce(&ty, attr, v)?;
                match delta.created_nodes.iter_mut().find(|n| n.id == id) {
                    Some(n) => {
                        n.attrs.insert(attr.clone(), v);
                    }
                    None => delta.attr_updates.push(AttrUpdate { node: id, attr: attr.clone(), value: v }),
                }
            }
        }
    }
    Ok(delta)
}
