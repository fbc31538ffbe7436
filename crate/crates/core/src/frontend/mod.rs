//! Builds OSDDs for ground queries by tabled evaluation of a program.

mod machine;
mod transform;

use crate::diagram::Osdd;
use crate::error::{EvalError, ParseError};
use crate::prolog::{read_term, Program, Term};
use crate::term::{GroundTerm, SwitchInstance};

pub use transform::{transform, Transformed};

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Maximum nesting of predicate calls.
    pub max_depth: usize,
    /// Stack size of the evaluation thread.
    pub stack_bytes: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_depth: 10_000, stack_bytes: 1 << 30 }
    }
}

/// Parses a query such as `same_birthday(3)`.
pub fn parse_query(text: &str) -> Result<Term, ParseError> {
    let r = read_term(text)?;
    if r.var_names.is_empty() {
        Ok(r.term)
    } else {
        Err(ParseError { line: 1, col: 1, msg: format!("query `{}` is not ground", text.trim()) })
    }
}

pub fn evaluate(program: &Program, query: &Term) -> Result<Osdd, EvalError> {
    evaluate_with(program, query, &EvalOptions::default())
}

/// The disjunction of the diagrams of all derivations of `query`.
pub fn evaluate_with(program: &Program, query: &Term, opts: &EvalOptions) -> Result<Osdd, EvalError> {
    if query.max_var().is_some() {
        return Err(EvalError::Instantiation(format!("query `{query}` is not ground")));
    }
    if !query.is_callable() {
        return Err(EvalError::Type(format!("`{query}` is not callable")));
    }
    on_big_stack(opts, || {
        let mut m = machine::Machine::new(program, opts.max_depth);
        let mut acc = Osdd::zero();
        m.solve(query, Osdd::one(), 0, &mut |_, o| {
            acc = acc.or(&o)?;
            Ok(machine::Flow::Continue)
        })?;
        Ok(acc)
    })
}

/// Whether `query` succeeds when every switch instance takes the outcome
/// given by `world`. Fails with [`EvalError::NeedInstance`] when an
/// instance the derivation depends on is undecided.
pub fn succeeds_in_world(
    program: &Program,
    query: &Term,
    world: &(dyn Fn(&SwitchInstance) -> Option<GroundTerm> + Sync),
    opts: &EvalOptions,
) -> Result<bool, EvalError> {
    on_big_stack(opts, || succeeds_here(program, query, world, opts.max_depth))
}

/// As [`succeeds_in_world`] on the current thread.
pub(crate) fn succeeds_here(
    program: &Program,
    query: &Term,
    world: &dyn Fn(&SwitchInstance) -> Option<GroundTerm>,
    max_depth: usize,
) -> Result<bool, EvalError> {
    let mut m = machine::Machine::new(program, max_depth).with_world(world);
    let mut found = false;
    m.solve(query, Osdd::one(), 0, &mut |_, _| {
        found = true;
        Ok(machine::Flow::Cut(0))
    })?;
    Ok(found)
}

/// Runs `f` on a thread with the configured stack size.
pub fn on_big_stack<T: Send>(opts: &EvalOptions, f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(opts.stack_bytes)
            .spawn_scoped(s, f)
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|p| std::panic::resume_unwind(p))
    })
}
