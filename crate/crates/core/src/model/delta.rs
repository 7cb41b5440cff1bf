use std::collections::BTreeMap;

use super::{Edge, Graph, ModelError, Node, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct CreatedNode {
    pub id: String,
    pub ty: String,
    pub attrs: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreatedEdge {
    pub id: String,
    pub ty: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrUpdate {
    pub node: String,
    pub attr: String,
    pub value: Value,
}

/// A batch of graph modifications.
///
/// Applied in a fixed order: node creation, edge creation, attribute
/// updates, edge deletion, node deletion. Deleting a node also deletes its
/// incident edges (single-pushout).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphDelta {
    pub created_nodes: Vec<CreatedNode>,
    pub created_edges: Vec<CreatedEdge>,
    pub deleted_edges: Vec<String>,
    pub deleted_nodes: Vec<String>,
    pub attr_updates: Vec<AttrUpdate>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.created_nodes.is_empty()
            && self.created_edges.is_empty()
            && self.deleted_edges.is_empty()
            && self.deleted_nodes.is_empty()
            && self.attr_updates.is_empty()
    }

    /// Node ids read or written by this delta, including endpoints of created edges.
    pub fn touched_nodes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        out.extend(self.created_nodes.iter().map(|n| n.id.as_str()));
        for e in &self.created_edges {
            out.push(&e.src);
            out.push(&e.tgt);
        }
        out.extend(self.deleted_nodes.iter().map(String::as_str));
        out.extend(self.attr_updates.iter().map(|u| u.node.as_str()));
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl Graph {
    /// Applies `delta` to a copy of this graph.
    ///
    /// The receiver is left untouched on error.
    pub fn apply_delta(&self, delta: &GraphDelta) -> Result<Graph, ModelError> {
        let mut g = self.clone();
        g.apply_delta_in_place(delta)?;
        Ok(g)
    }

    /// In-place variant of [`Graph::apply_delta`]. On error the graph may be
    /// partially modified; callers needing atomicity should use `apply_delta`.
    pub fn apply_delta_in_place(&mut self, delta: &GraphDelta) -> Result<Vec<String>, ModelError> {
        for n in &delta.created_nodes {
            self.add_node(n.id.clone(), Node { ty: n.ty.clone(), attrs: n.attrs.clone() })?;
        }
        for e in &delta.created_edges {
            self.add_edge(e.id.clone(), Edge { ty: e.ty.clone(), src: e.src.clone(), tgt: e.tgt.clone() })?;
        }
        for u in &delta.attr_updates {
            self.set_attr(&u.node, &u.attr, u.value.clone())?;
        }
        let mut removed_edges = Vec::new();
        for e in &delta.deleted_edges {
            self.remove_edge(e).ok_or_else(|| ModelError::MissingEdge(e.clone()))?;
            removed_edges.push(e.clone());
        }
        for n in &delta.deleted_nodes {
            let dangling = self.remove_node(n).ok_or_else(|| ModelError::MissingNode(n.clone()))?;
            removed_edges.extend(dangling);
        }
        Ok(removed_edges)
    }
}
