//! Text format shared by schema and instance documents.
//!
//! A document is a JSON object with up to four sections, always written in
//! this order: `nodetypes`, `edgetypes`, `nodes`, `edges`.
//!
//! ```json
//! {
//!   "nodetypes": [{"name": "SubstrateServer", "supertype": "SubstrateElement",
//!                  "attributes": [{"name": "cpu", "kind": "int"}]}],
//!   "edgetypes": [{"name": "host", "source": "VirtualElement", "target": "SubstrateElement"}],
//!   "nodes": [{"id": "s1", "type": "SubstrateServer", "attrs": {"cpu": 32}}],
//!   "edges": [{"id": "h1", "type": "host", "src": "v1", "tgt": "s1"}]
//! }
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AttrKind, Edge, EdgeType, Graph, Metamodel, ModelError, Node, NodeType, Value};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nodetypes: Vec<NodeType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    edgetypes: Vec<EdgeType>,
    #[serde(default)]
    nodes: Vec<NodeRecord>,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: String,
    #[serde(rename = "type")]
    ty: String,
    #[serde(default)]
    attrs: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    id: String,
    #[serde(rename = "type")]
    ty: String,
    src: String,
    tgt: String,
}

fn parse_document(text: &str) -> Result<Document, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads the `nodetypes`/`edgetypes` sections of a document. Instance sections are ignored.
pub fn load_metamodel(text: &str) -> Result<Metamodel, ModelError> {
    let doc = parse_document(text)?;
    Metamodel::new(doc.nodetypes, doc.edgetypes)
}

/// Reads the `nodes`/`edges` sections of a document against `mm`.
pub fn load_graph(text: &str, mm: Arc<Metamodel>) -> Result<Graph, ModelError> {
    let doc = parse_document(text)?;
    let mut g = Graph::new(mm);
    for rec in doc.nodes {
        let nt = g
            .metamodel()
            .node_type(&rec.ty)
            .ok_or_else(|| ModelError::Nonconforming {
                id: rec.id.clone(),
                reason: format!("unknown node type {}", rec.ty),
            })?
            .name
            .clone();
        let mut attrs = BTreeMap::new();
        for (name, raw) in rec.attrs {
            let kind = g
                .metamodel()
                .attribute(&nt, &name)
                .map(|d| d.kind)
                .ok_or_else(|| ModelError::Nonconforming {
                    id: rec.id.clone(),
                    reason: format!("type {nt} has no attribute {name}"),
                })?;
            let v = json_to_value(&raw, kind).ok_or_else(|| ModelError::Nonconforming {
                id: rec.id.clone(),
                reason: format!("attribute {name} expects {kind}, found {raw}"),
            })?;
            attrs.insert(name, v);
        }
        g.add_node(rec.id, Node { ty: rec.ty, attrs })?;
    }
    for rec in doc.edges {
        g.add_edge(rec.id, Edge { ty: rec.ty, src: rec.src, tgt: rec.tgt })?;
    }
    Ok(g)
}

/// Loads schema and instance from one document.
pub fn load_model(text: &str) -> Result<Graph, ModelError> {
    let mm = Arc::new(load_metamodel(text)?);
    load_graph(text, mm)
}

fn json_to_value(raw: &serde_json::Value, kind: AttrKind) -> Option<Value> {
    match kind {
        AttrKind::Int => raw.as_i64().map(Value::Int),
        AttrKind::Real => raw.as_f64().map(Value::Real),
        AttrKind::Bool => raw.as_bool().map(Value::Bool),
        AttrKind::String => raw.as_str().map(|s| Value::Str(s.to_string())),
    }
}

fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(i) => (*i).into(),
        Value::Real(r) => serde_json::Number::from_f64(*r).map_or(serde_json::Value::Null, Into::into),
        Value::Bool(b) => (*b).into(),
        Value::Str(s) => s.clone().into(),
    }
}

fn graph_records(g: &Graph) -> (Vec<NodeRecord>, Vec<EdgeRecord>) {
    let nodes = g
        .nodes()
        .map(|(id, n)| NodeRecord {
            id: id.to_string(),
            ty: n.ty.clone(),
            attrs: n.attrs.iter().map(|(k, v)| (k.clone(), value_to_json(v))).collect(),
        })
        .collect();
    let edges = g
        .edges()
        .map(|(id, e)| EdgeRecord { id: id.to_string(), ty: e.ty.clone(), src: e.src.clone(), tgt: e.tgt.clone() })
        .collect();
    (nodes, edges)
}

fn write_document(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serialization is infallible");
    s.push('\n');
    s
}

/// Writes schema and instance into one document.
pub fn serialize_model(g: &Graph) -> String {
    let (nodes, edges) = graph_records(g);
    write_document(&Document {
        nodetypes: g.metamodel().node_types().to_vec(),
        edgetypes: g.metamodel().edge_types().to_vec(),
        nodes,
        edges,
    })
}

/// Writes only the instance sections.
pub fn serialize_graph(g: &Graph) -> String {
    let (nodes, edges) = graph_records(g);
    write_document(&Document { nodes, edges, ..Default::default() })
}

pub fn serialize_metamodel(mm: &Metamodel) -> String {
    write_document(&Document {
        nodetypes: mm.node_types().to_vec(),
        edgetypes: mm.edge_types().to_vec(),
        ..Default::default()
    })
}
