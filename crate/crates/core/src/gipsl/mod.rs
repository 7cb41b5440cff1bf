//! The specification language: rules, patterns, mappings, constraints and objectives.
//!
//! ```text
//! rule server2server {
//!     node vsrv : VirtualServer;
//!     node ssrv : SubstrateServer;
//!     condition ssrv.resCpu >= vsrv.cpu;
//!     create edge host(vsrv -> ssrv);
//!     set ssrv.resCpu = ssrv.resCpu - vsrv.cpu;
//! }
//!
//! mapping srv2srv with server2server;
//!
//! constraint -> class::SubstrateServer {
//!     mappings.srv2srv->filter(m | m.nodes().ssrv == self)->sum(m | m.nodes().vsrv.cpu) <= self.resCpu
//! }
//!
//! objective srvObj -> mapping::srv2srv {
//!     self.nodes().ssrv.resCpu / self.nodes().ssrv.cpu
//! }
//!
//! global objective : min { srvObj }
//! ```

pub mod ast;
pub mod eval;
mod lexer;
mod parser;
mod printer;
mod typecheck;
mod typed;

pub use ast::Spec;
pub use parser::{parse, parse_expr};
pub use printer::{print_expr, print_spec};
pub use typecheck::typecheck;
pub use typed::*;

use std::fmt;

use thiserror::Error;

use crate::model::Metamodel;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub span: ast::Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GipslError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: u32, col: u32, message: String, expected: Vec<String> },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Type(Vec<Diagnostic>),
}

/// Parses and typechecks in one step.
pub fn compile(src: &str, mm: &Metamodel) -> Result<TypedSpec, GipslError> {
    typecheck(&parse(src)?, mm)
}
