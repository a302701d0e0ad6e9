//! The mini imperative language: lexing, parsing and lowering to a CFA.

pub mod ast;
mod lexer;
mod lower;
mod parser;

pub use lower::{linearize, lower, lower_cond};
pub use parser::parse;

/// Parses and lowers in one step.
pub fn compile(src: &str) -> crate::Result<crate::cfa::Cfa> {
    Ok(lower(&parse(src)?))
}
