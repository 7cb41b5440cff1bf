use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Kind of an attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Int,
    Real,
    Bool,
    String,
}

impl AttrKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, AttrKind::Int | AttrKind::Real)
    }
}

impl std::fmt::Display for AttrKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AttrKind::Int => "int",
            AttrKind::Real => "real",
            AttrKind::Bool => "bool",
            AttrKind::String => "string",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttrDecl {
    pub name: String,
    pub kind: AttrKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeType {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supertype: Option<String>,
    #[serde(default)]
    pub attributes: Vec<AttrDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeType {
    pub name: String,
    pub source: String,
    pub target: String,
}

/// Validated schema for instance graphs.
///
/// Node types form a single-inheritance forest. Attribute lookups walk the
/// supertype chain, so a subtype sees every inherited attribute.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metamodel {
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
    node_index: BTreeMap<String, usize>,
    edge_index: BTreeMap<String, usize>,
}

impl Metamodel {
    /// Builds and validates a metamodel from raw type declarations.
    pub fn new(node_types: Vec<NodeType>, edge_types: Vec<EdgeType>) -> Result<Self, ModelError> {
        let mut node_index = BTreeMap::new();
        for (i, nt) in node_types.iter().enumerate() {
            if node_index.insert(nt.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateType(nt.name.clone()));
            }
        }
        let mut edge_index = BTreeMap::new();
        for (i, et) in edge_types.iter().enumerate() {
            if node_index.contains_key(&et.name) || edge_index.insert(et.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateType(et.name.clone()));
            }
        }
        let mm = Metamodel { node_types, edge_types, node_index, edge_index };

        for nt in &mm.node_types {
            if let Some(sup) = &nt.supertype {
                if !mm.node_index.contains_key(sup) {
                    return Err(ModelError::UnknownType(sup.clone()));
                }
            }
        }
        for nt in &mm.node_types {
            let mut seen = BTreeSet::new();
            let mut cur = Some(nt.name.as_str());
            while let Some(name) = cur {
                if !seen.insert(name) {
                    return Err(ModelError::CyclicSupertype(nt.name.clone()));
                }
                cur = mm.node_type(name).and_then(|t| t.supertype.as_deref());
            }
            let mut attrs = BTreeSet::new();
            for a in mm.all_attributes(&nt.name) {
                if !attrs.insert(a.name.as_str()) {
                    return Err(ModelError::DuplicateAttribute {
                        node_type: nt.name.clone(),
                        attribute: a.name.clone(),
                    });
                }
            }
        }
        for et in &mm.edge_types {
            for end in [&et.source, &et.target] {
                if !mm.node_index.contains_key(end) {
                    return Err(ModelError::UnknownType(end.clone()));
                }
            }
        }
        Ok(mm)
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn node_type(&self, name: &str) -> Option<&NodeType> {
        self.node_index.get(name).map(|&i| &self.node_types[i])
    }

    pub fn edge_type(&self, name: &str) -> Option<&EdgeType> {
        self.edge_index.get(name).map(|&i| &self.edge_types[i])
    }

    /// Own and inherited attributes, most general first.
    pub fn all_attributes(&self, node_type: &str) -> Vec<&AttrDecl> {
        let mut chain = Vec::new();
        let mut cur = self.node_type(node_type);
        while let Some(t) = cur {
            chain.push(t);
            // the chain is acyclic once the metamodel is validated, but this
            // also runs during validation, so bound it
            if chain.len() > self.node_types.len() {
                break;
            }
            cur = t.supertype.as_deref().and_then(|s| self.node_type(s));
        }
        chain.iter().rev().flat_map(|t| t.attributes.iter()).collect()
    }

    pub fn attribute(&self, node_type: &str, attr: &str) -> Option<&AttrDecl> {
        self.all_attributes(node_type).into_iter().find(|a| a.name == attr)
    }

    /// True if `sub` equals `sup` or inherits from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = Some(sub);
        let mut steps = 0;
        while let Some(name) = cur {
            if name == sup {
                return true;
            }
            steps += 1;
            if steps > self.node_types.len() {
                return false;
            }
            cur = self.node_type(name).and_then(|t| t.supertype.as_deref());
        }
        false
    }

    /// Two node types can denote the same element only if one inherits from the other.
    pub fn types_overlap(&self, a: &str, b: &str) -> bool {
        self.is_subtype(a, b) || self.is_subtype(b, a)
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty() && self.edge_types.is_empty()
    }
}
