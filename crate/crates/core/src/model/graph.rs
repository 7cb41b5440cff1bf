use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{Metamodel, ModelError};
use crate::model::AttrKind;

/// Attribute value stored on a node.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
}

impl Value {
    pub fn kind(&self) -> AttrKind {
        match self {
            Value::Int(_) => AttrKind::Int,
            Value::Real(_) => AttrKind::Real,
            Value::Bool(_) => AttrKind::Bool,
            Value::Str(_) => AttrKind::String,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Real(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn default_for(kind: AttrKind) -> Value {
        match kind {
            AttrKind::Int => Value::Int(0),
            AttrKind::Real => Value::Real(0.0),
            AttrKind::Bool => Value::Bool(false),
            AttrKind::String => Value::Str(String::new()),
        }
    }

    /// Coerces a value to a declared kind; ints widen to reals, integral reals narrow to ints.
    pub fn coerce(self, kind: AttrKind) -> Option<Value> {
        match (self, kind) {
            (v, k) if v.kind() == k => Some(v),
            (Value::Int(i), AttrKind::Real) => Some(Value::Real(i as f64)),
            (Value::Real(r), AttrKind::Int) if r.fract() == 0.0 && r.abs() < 9.0e15 => {
                Some(Value::Int(r as i64))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub ty: String,
    pub attrs: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

/// Typed attributed instance graph conforming to a [`Metamodel`].
///
/// Nodes and edges are keyed by their opaque string ids; iteration order is
/// the lexicographic id order, which keeps matching and serialization
/// deterministic.
#[derive(Clone)]
pub struct Graph {
    mm: Arc<Metamodel>,
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<String, Edge>,
    out_adj: BTreeMap<String, BTreeSet<String>>,
    in_adj: BTreeMap<String, BTreeSet<String>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && *self.mm == *other.mm
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("nodes", &self.nodes).field("edges", &self.edges).finish()
    }
}

impl Graph {
    pub fn new(mm: Arc<Metamodel>) -> Self {
        Graph {
            mm,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            out_adj: BTreeMap::new(),
            in_adj: BTreeMap::new(),
        }
    }

    pub fn metamodel(&self) -> &Metamodel {
        &self.mm
    }

    pub fn metamodel_arc(&self) -> &Arc<Metamodel> {
        &self.mm
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &Node)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &Edge)> {
        self.edges.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn attr(&self, id: &str, attr: &str) -> Option<&Value> {
        self.nodes.get(id).and_then(|n| n.attrs.get(attr))
    }

    /// Nodes whose type is `ty` or one of its subtypes, in id order.
    pub fn nodes_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.nodes.iter().filter(move |(_, n)| self.mm.is_subtype(&n.ty, ty)).map(|(k, _)| k.as_str())
    }

    /// Ids of edges leaving `node`.
    pub fn out_edges<'a>(&'a self, node: &str) -> impl Iterator<Item = (&'a str, &'a Edge)> + 'a {
        self.out_adj
            .get(node)
            .into_iter()
            .flatten()
            .map(move |e| (e.as_str(), &self.edges[e]))
    }

    /// Ids of edges entering `node`.
    pub fn in_edges<'a>(&'a self, node: &str) -> impl Iterator<Item = (&'a str, &'a Edge)> + 'a {
        self.in_adj
            .get(node)
            .into_iter()
            .flatten()
            .map(move |e| (e.as_str(), &self.edges[e]))
    }

    pub fn has_edge(&self, ty: &str, src: &str, tgt: &str) -> bool {
        self.out_edges(src).any(|(_, e)| e.ty == ty && e.tgt == tgt)
    }

    /// Inserts a node after checking its type and attributes.
    pub fn add_node(&mut self, id: impl Into<String>, node: Node) -> Result<(), ModelError> {
        let id = id.into();
        if self.nodes.contains_key(&id) {
            return Err(ModelError::DuplicateId(id));
        }
        let node = self.conform_node(&id, node)?;
        self.nodes.insert(id, node);
        Ok(())
    }

    /// Inserts an edge after checking its type and endpoint conformance.
    pub fn add_edge(&mut self, id: impl Into<String>, edge: Edge) -> Result<(), ModelError> {
        let id = id.into();
        if self.edges.contains_key(&id) {
            return Err(ModelError::DuplicateId(id));
        }
        self.check_edge(&id, &edge)?;
        self.out_adj.entry(edge.src.clone()).or_default().insert(id.clone());
        self.in_adj.entry(edge.tgt.clone()).or_default().insert(id.clone());
        self.edges.insert(id, edge);
        Ok(())
    }

    pub(crate) fn remove_edge(&mut self, id: &str) -> Option<Edge> {
        let e = self.edges.remove(id)?;
        if let Some(s) = self.out_adj.get_mut(&e.src) {
            s.remove(id);
        }
        if let Some(s) = self.in_adj.get_mut(&e.tgt) {
            s.remove(id);
        }
        Some(e)
    }

    /// Removes a node together with every incident edge. Returns the ids of the removed edges.
    pub(crate) fn remove_node(&mut self, id: &str) -> Option<Vec<String>> {
        self.nodes.remove(id)?;
        let mut incident: BTreeSet<String> = BTreeSet::new();
        incident.extend(self.out_adj.remove(id).unwrap_or_default());
        incident.extend(self.in_adj.remove(id).unwrap_or_default());
        for e in &incident {
            self.remove_edge(e);
        }
        Some(incident.into_iter().collect())
    }

    pub(crate) fn set_attr(&mut self, id: &str, attr: &str, value: Value) -> Result<(), ModelError> {
        let node = self.nodes.get(id).ok_or_else(|| ModelError::MissingNode(id.to_string()))?;
        let decl = self.mm.attribute(&node.ty, attr).ok_or_else(|| ModelError::Nonconforming {
            id: id.to_string(),
            reason: format!("type {} has no attribute {attr}", node.ty),
        })?;
        let kind = decl.kind;
        let value = value.coerce(kind).ok_or_else(|| ModelError::Nonconforming {
            id: id.to_string(),
            reason: format!("attribute {attr} expects {kind}"),
        })?;
        self.nodes.get_mut(id).expect("checked above").attrs.insert(attr.to_string(), value);
        Ok(())
    }

    fn conform_node(&self, id: &str, mut node: Node) -> Result<Node, ModelError> {
        let nonconforming = |reason: String| ModelError::Nonconforming { id: id.to_string(), reason };
        if self.mm.node_type(&node.ty).is_none() {
            return Err(nonconforming(format!("unknown node type {}", node.ty)));
        }
        let decls = self.mm.all_attributes(&node.ty);
        for name in node.attrs.keys() {
            if !decls.iter().any(|d| &d.name == name) {
                return Err(nonconforming(format!("type {} has no attribute {name}", node.ty)));
            }
        }
        for d in decls {
            let v = node
                .attrs
                .remove(&d.name)
                .ok_or_else(|| nonconforming(format!("missing attribute {}", d.name)))?;
            let v = v.coerce(d.kind).ok_or_else(|| {
                nonconforming(format!("attribute {} expects {}", d.name, d.kind))
            })?;
            node.attrs.insert(d.name.clone(), v);
        }
        Ok(node)
    }

    fn check_edge(&self, id: &str, edge: &Edge) -> Result<(), ModelError> {
        let nonconforming = |reason: String| ModelError::Nonconforming { id: id.to_string(), reason };
        let et = self
            .mm
            .edge_type(&edge.ty)
            .ok_or_else(|| nonconforming(format!("unknown edge type {}", edge.ty)))?;
        for (end, decl) in [(&edge.src, &et.source), (&edge.tgt, &et.target)] {
            let n = self.nodes.get(end).ok_or_else(|| nonconforming(format!("endpoint {end} does not exist")))?;
            if !self.mm.is_subtype(&n.ty, decl) {
                return Err(nonconforming(format!(
                    "endpoint {end} has type {}, edge type {} expects {decl}",
                    n.ty, edge.ty
                )));
            }
        }
        Ok(())
    }

    /// Re-checks every node and edge against the metamodel.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (id, n) in &self.nodes {
            let checked = self.conform_node(id, n.clone())?;
            if &checked != n {
                return Err(ModelError::Nonconforming {
                    id: id.clone(),
                    reason: "attribute kinds differ from declaration".into(),
                });
            }
        }
        for (id, e) in &self.edges {
            self.check_edge(id, e)?;
        }
        Ok(())
    }

    /// Smallest id of the form `base`, `base#1`, `base#2`, ... not used by any node or edge.
    pub fn fresh_id(&self, base: &str, taken: &BTreeSet<String>) -> String {
        let free = |c: &str| !self.nodes.contains_key(c) && !self.edges.contains_key(c) && !taken.contains(c);
        if free(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}#{k}"))
            .find(|c| free(c))
            .expect("unbounded id space")
    }

    /// Adds every node and edge of `other` (same metamodel) to this graph.
    pub fn merge(&mut self, other: &Graph) -> Result<(), ModelError> {
        for (id, n) in &other.nodes {
            self.add_node(id.clone(), n.clone())?;
        }
        for (id, e) in &other.edges {
            self.add_edge(id.clone(), e.clone())?;
        }
        Ok(())
    }
}
