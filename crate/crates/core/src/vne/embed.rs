use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

use log::info;
use serde::Serialize;

use super::VneError;
use crate::encode::{apply_selection, generate};
use crate::gipsl::TypedSpec;
use crate::model::{Graph, Value};
use crate::solve::{solve, Limits, Status};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VnrStatus {
    Embedded,
    Rejected,
}

/// One line of the report per request.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnrRecord {
    pub vnr: usize,
    pub status: VnrStatus,
    pub solver: Status,
    pub objective: Option<f64>,
    pub vars: usize,
    pub rows: usize,
    pub solve_ms: f64,
    pub nodes: u64,
    /// Virtual element ids of the request.
    pub elements: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub version: u32,
    pub records: Vec<VnrRecord>,
    /// Residual attributes per substrate element after the run.
    pub residuals: BTreeMap<String, BTreeMap<String, i64>>,
    /// Sum of the objective values of embedded requests.
    pub objective: f64,
    pub total_ms: f64,
}

impl EmbeddingReport {
    pub fn embedded(&self) -> usize {
        self.records.iter().filter(|r| r.status == VnrStatus::Embedded).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "embedding report v{}", self.version);
        let _ = writeln!(out, "{:>4}  {:<9} {:<10} {:>12} {:>6} {:>6} {:>10}", "vnr", "status", "solver", "objective", "vars", "rows", "solve_ms");
        for r in &self.records {
            let status = match r.status {
                VnrStatus::Embedded => "embedded",
                VnrStatus::Rejected => "rejected",
            };
            let obj = r.objective.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                out,
                "{:>4}  {:<9} {:<10} {:>12} {:>6} {:>6} {:>10.1}",
                r.vnr,
                status,
                r.solver.to_string(),
                obj,
                r.vars,
                r.rows,
                r.solve_ms
            );
        }
        let _ = writeln!(out, "embedded {} of {}, objective {:.4}, {:.1} ms", self.embedded(), self.records.len(), self.objective, self.total_ms);
        out
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub report: EmbeddingReport,
    /// Substrate plus every embedded request.
    pub model: Graph,
}

fn virtual_elements(vnr: &Graph) -> Vec<String> {
    let mm = vnr.metamodel();
    vnr.nodes().filter(|(_, n)| mm.is_subtype(&n.ty, "VirtualElement")).map(|(id, _)| id.to_string()).collect()
}

fn fully_mapped(g: &Graph, elements: &[String]) -> bool {
    elements.iter().all(|id| {
        g.attr(id, "mapped") == Some(&Value::Bool(true)) && g.out_edges(id).filter(|(_, e)| e.ty == "host").count() == 1
    })
}

/// Residual (`res*`) integer attributes of every substrate element.
pub fn residuals(g: &Graph) -> BTreeMap<String, BTreeMap<String, i64>> {
    let mm = g.metamodel();
    let mut out = BTreeMap::new();
    for (id, n) in g.nodes() {
        if !mm.is_subtype(&n.ty, "SubstrateElement") {
            continue;
        }
        let res: BTreeMap<String, i64> = n
            .attrs
            .iter()
            .filter(|(k, _)| k.starts_with("res"))
            .filter_map(|(k, v)| match v {
                Value::Int(i) => Some((k.clone(), *i)),
                _ => None,
            })
            .collect();
        if !res.is_empty() {
            out.insert(id.to_string(), res);
        }
    }
    out
}

/// Embeds the requests one after another. A request is kept only if the
/// solver finds a feasible selection that maps all of its virtual elements;
/// otherwise the working model is left as it was before the request.
pub fn embed_incremental(substrate: &Graph, vnrs: &[Graph], spec: &TypedSpec, limits: Limits) -> Result<Embedding, VneError> {
    let start = Instant::now();
    let mut model = substrate.clone();
    let mut records = Vec::with_capacity(vnrs.len());
    let mut objective = 0.0;
    for (k, vnr) in vnrs.iter().enumerate() {
        let elements = virtual_elements(vnr);
        let mut working = model.clone();
        working.merge(vnr).map_err(|e| VneError::Pipeline { vnr: k, message: e.to_string() })?;
        let enc = generate(spec, &working).map_err(|e| VneError::Pipeline { vnr: k, message: e.to_string() })?;
        let sol = solve(&enc.problem, limits).map_err(|e| VneError::Pipeline { vnr: k, message: e.to_string() })?;
        let mut record = VnrRecord {
            vnr: k,
            status: VnrStatus::Rejected,
            solver: sol.status,
            objective: sol.objective_value,
            vars: enc.problem.variables.len(),
            rows: enc.problem.rows.len(),
            solve_ms: sol.stats.wall_ms,
            nodes: sol.stats.nodes,
            elements,
            reason: None,
        };
        if sol.objective_value.is_none() {
            record.reason = Some(format!("no feasible selection ({})", sol.status));
        } else {
            match apply_selection(spec, &working, &enc.table, &sol.assignment) {
                Ok(next) if fully_mapped(&next, &record.elements) => {
                    record.status = VnrStatus::Embedded;
                    objective += sol.objective_value.unwrap_or(0.0);
                    model = next;
                }
                Ok(_) => record.reason = Some("selection leaves elements unmapped".into()),
                Err(e) => record.reason = Some(e.to_string()),
            }
        }
        info!("vnr {k}: {:?} ({} vars, {} rows, {:.1} ms)", record.status, record.vars, record.rows, record.solve_ms);
        records.push(record);
    }
    let report = EmbeddingReport {
        version: REPORT_VERSION,
        records,
        residuals: residuals(&model),
        objective,
        total_ms: start.elapsed().as_secs_f64() * 1000.0,
    };
    Ok(Embedding { report, model })
}
