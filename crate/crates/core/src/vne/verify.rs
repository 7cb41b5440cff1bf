//! Solver-independent checks of a finished embedding run.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::embed::{EmbeddingReport, VnrStatus};
use crate::model::{Graph, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ExactlyOnce,
    AllOrNothing,
    Resources,
    Contiguity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: Check,
    pub element: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.check, self.element, self.detail)
    }
}

/// Demand attribute on the virtual side for each residual attribute.
const SERVER_RESOURCES: [(&str, &str); 3] = [("resCpu", "cpu"), ("resMem", "mem"), ("resSto", "sto")];

fn int(g: &Graph, id: &str, attr: &str) -> Option<i64> {
    match g.attr(id, attr) {
        Some(Value::Int(v)) => Some(*v),
        _ => None,
    }
}

fn target(g: &Graph, node: &str, ty: &str) -> Option<String> {
    g.out_edges(node).find(|(_, e)| e.ty == ty).map(|(_, e)| e.tgt.clone())
}

/// Recomputes exactly-once hosting, resource conservation and contiguity
/// from the graphs alone. `before` is the substrate the run started from.
pub fn verify_embedding(report: &EmbeddingReport, before: &Graph, after: &Graph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |check, element: &str, detail: String| out.push(Violation { check, element: element.to_string(), detail });
    let hosts = |id: &str| -> Vec<String> {
        after.out_edges(id).filter(|(_, e)| e.ty == "host").map(|(_, e)| e.tgt.clone()).collect()
    };

    for r in &report.records {
        for id in &r.elements {
            let h = hosts(id);
            match r.status {
                VnrStatus::Embedded => {
                    if h.len() != 1 {
                        v(Check::ExactlyOnce, id, format!("hosted {} times", h.len()));
                    }
                    if after.attr(id, "mapped") != Some(&Value::Bool(true)) {
                        v(Check::ExactlyOnce, id, "not marked mapped".into());
                    }
                }
                VnrStatus::Rejected => {
                    if !h.is_empty() {
                        v(Check::AllOrNothing, id, format!("rejected request element hosted on {}", h.join(", ")));
                    }
                }
            }
        }
    }

    // host edges added by the run
    let new_hosts: Vec<(String, String)> = after
        .edges()
        .filter(|(id, e)| e.ty == "host" && before.edge(id).is_none())
        .map(|(_, e)| (e.src.clone(), e.tgt.clone()))
        .collect();
    let mm = after.metamodel();
    let mut demand: BTreeMap<(String, &str), i64> = BTreeMap::new();
    for (virt, sub) in &new_hosts {
        let Some(n) = after.node(virt) else { continue };
        if mm.is_subtype(&n.ty, "VirtualServer") {
            for (res, dem) in SERVER_RESOURCES {
                *demand.entry((sub.clone(), res)).or_default() += int(after, virt, dem).unwrap_or(0);
            }
        } else if mm.is_subtype(&n.ty, "VirtualLink") {
            let bw = int(after, virt, "bw").unwrap_or(0);
            let sub_ty = after.node(sub).map(|n| n.ty.as_str()).unwrap_or("");
            if mm.is_subtype(sub_ty, "SubstratePath") {
                for hop in ["hop1", "hop2"] {
                    if let Some(l) = target(after, sub, hop) {
                        *demand.entry((l, "resBw")).or_default() += bw;
                    }
                }
            } else if mm.is_subtype(sub_ty, "SubstrateLink") {
                *demand.entry((sub.clone(), "resBw")).or_default() += bw;
            }
        }
    }
    for (id, n) in before.nodes() {
        let residuals: Vec<&str> = if mm.is_subtype(&n.ty, "SubstrateServer") {
            SERVER_RESOURCES.iter().map(|r| r.0).collect()
        } else if mm.is_subtype(&n.ty, "SubstrateLink") {
            vec!["resBw"]
        } else {
            continue;
        };
        for res in residuals {
            let (Some(start), Some(end)) = (int(before, id, res), int(after, id, res)) else {
                v(Check::Resources, id, format!("{res} missing"));
                continue;
            };
            let used = demand.get(&(id.to_string(), res)).copied().unwrap_or(0);
            if start - used != end {
                v(Check::Resources, id, format!("{res}: {start} - {used} hosted != {end} residual"));
            }
            if end < 0 {
                v(Check::Resources, id, format!("{res} oversubscribed: {end}"));
            }
        }
    }

    let host_of = |id: &str| -> Option<String> {
        let h = hosts(id);
        (h.len() == 1).then(|| h[0].clone())
    };
    for (virt, sub) in &new_hosts {
        let Some(n) = after.node(virt) else { continue };
        if !mm.is_subtype(&n.ty, "VirtualLink") {
            continue;
        }
        let sub_ty = after.node(sub).map(|n| n.ty.clone()).unwrap_or_default();
        let ends = if mm.is_subtype(&sub_ty, "SubstrateServer") {
            Some((sub.clone(), sub.clone()))
        } else if mm.is_subtype(&sub_ty, "SubstrateLink") {
            target(after, sub, "ssrc").zip(target(after, sub, "stgt"))
        } else if mm.is_subtype(&sub_ty, "SubstratePath") {
            target(after, sub, "psrc").zip(target(after, sub, "ptgt"))
        } else {
            None
        };
        let Some((src_end, tgt_end)) = ends else {
            v(Check::Contiguity, virt, format!("hosted on {sub}, which has no endpoints"));
            continue;
        };
        let vs = target(after, virt, "vsrc").and_then(|x| host_of(&x));
        let vt = target(after, virt, "vtgt").and_then(|x| host_of(&x));
        if vs.as_deref() != Some(src_end.as_str()) || vt.as_deref() != Some(tgt_end.as_str()) {
            v(
                Check::Contiguity,
                virt,
                format!("ends on {vs:?} and {vt:?}, but {sub} connects {src_end} and {tgt_end}"),
            );
        }
    }
    out
}
