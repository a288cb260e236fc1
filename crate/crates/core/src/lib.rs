//! Executable kernel for multitensors, graph monads and globular
//! higher-categorical constructions on finite inputs.

pub mod base_kernel;
pub mod coequaliser;
pub mod contractibility;
pub mod enriched_graph;
pub mod formats;
pub mod graph_monad;
pub mod multitensor;
pub mod operad;
pub mod term;
pub mod unionfind;

pub mod cli;

pub use enriched_graph::{Graph, Morphism, Value};
pub use term::Term;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
