pub mod cfa;
pub mod congruence;
pub mod domain;
pub mod engine;
pub mod error;
pub mod formula;
pub mod frontend;
pub mod linear;
pub mod lp;
pub mod opt;
pub mod oracle;
pub mod report;
pub mod templates;

pub use error::{Error, Result};
