use thiserror::Error;

use crate::linear::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("no assignment for variable `{0}`")]
    MissingAssignment(VarId),

    #[error("no value for marker `{0}`")]
    MissingMarker(VarId),

    #[error("namespace `{0}` already used in formula")]
    NamespaceCollision(String),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{line}:{column}: nonlinear expression: {message}")]
    Nonlinear {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{line}:{column}: undeclared variable `{name}`")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },

    #[error("{line}:{column}: variable `{name}` declared twice")]
    Redeclared {
        line: usize,
        column: usize,
        name: String,
    },

    #[error("control flow is irreducible at node {0}")]
    Irreducible(usize),

    #[error("solver budget exhausted: {0}")]
    Budget(String),

    #[error("parity constraints requested in rational-relaxation mode")]
    ModeMismatch,

    #[error("abstracted states belong to different nodes ({0} vs {1})")]
    NodeMismatch(usize, usize),

    #[error("two distinct abstracted states for node {0} while following backpointers")]
    InfluenceCollision(usize),

    #[error("internal analysis error: {0}")]
    Internal(String),

    #[error("invalid template `{0}`")]
    InvalidTemplate(String),
}
