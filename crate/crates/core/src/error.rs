use thiserror::Error;

use crate::protocol::Diagnostic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state is not in the W class (three-tangle {tangle:.3e})")]
    NotWClass { tangle: f64 },

    #[error("cannot extract {pair} pair state: {reason}")]
    Extraction { pair: String, reason: String },

    #[error("measurement is not complete (max |ΣM†M − I| = {deviation:.3e})")]
    IncompleteMeasurement { deviation: f64 },

    #[error("matrix is not unitary (max |U†U − I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("infeasible conversion: {0}")]
    Infeasible(String),

    #[error("{}", render_diagnostics(.0))]
    Parse(Vec<Diagnostic>),

    #[error("halt assertion failed at node {node}: {reason}")]
    HaltAssertion { node: String, reason: String },

    #[error("protocol shape not supported: {0}")]
    Shape(String),

    #[error("execution error at node {node}: {reason}")]
    Execution { node: String, reason: String },
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
