//! A Prolog subset with PRISM switch declarations.

mod dcg;
mod lexer;
mod parser;
mod program;
mod term;

pub use parser::{read_term, read_terms, ReadTerm};
pub use program::{Clause, PredKey, Program};
pub use term::{Display, Term};
