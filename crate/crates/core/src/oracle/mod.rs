//! Ground truth for testing: a bounded concrete interpreter and Kleene
//! iteration in the template domain.

mod interp;
mod kleene;

pub use interp::{check_soundness, interpret, ConcreteRun, Limits, Violation};
pub use kleene::{kleene_tcd, path_branches, KleeneOutcome, TemplateValues};
