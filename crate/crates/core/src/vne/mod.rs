//! Virtual network embedding: scenario generation, the shipped
//! specification, incremental embedding and independent verification.

mod embed;
mod scenario;
mod verify;

use std::sync::Arc;

use thiserror::Error;

pub use embed::{embed_incremental, residuals, Embedding, EmbeddingReport, VnrRecord, VnrStatus, REPORT_VERSION};
pub use scenario::{generate_scenario, Range, Scenario, ScenarioConfig};
pub use verify::{verify_embedding, Check, Violation};

use crate::gipsl::{compile, TypedSpec};
use crate::model::{load_metamodel, Metamodel};

/// The embedding specification.
pub const MDVNE_SPEC: &str = include_str!("../../specs/mdvne.gipsl");
/// Its metamodel.
pub const MDVNE_SCHEMA: &str = include_str!("../../specs/mdvne.schema.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VneError {
    #[error("invalid scenario config: {0}")]
    Config(String),
    #[error("request {vnr}: {message}")]
    Pipeline { vnr: usize, message: String },
}

pub fn mdvne_metamodel() -> Arc<Metamodel> {
    Arc::new(load_metamodel(MDVNE_SCHEMA).expect("shipped schema is valid"))
}

pub fn mdvne_spec(mm: &Metamodel) -> TypedSpec {
    compile(MDVNE_SPEC, mm).expect("shipped spec compiles")
}
