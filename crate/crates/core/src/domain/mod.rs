//! Template constraint domain.

mod state;
mod template;

pub use state::{AbstractedState, IntermediateState, PolicyBound};
pub use template::Template;
