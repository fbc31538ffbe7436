//! Ordered symbolic derivation diagrams for probabilistic logic programs.

pub mod constraint;
pub mod error;
pub mod term;
pub mod diagram;
pub mod frontend;
pub mod inference;
pub mod oracle;
pub mod prolog;
pub mod sampling;
pub mod switch;
