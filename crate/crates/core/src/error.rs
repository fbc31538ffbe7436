use thiserror::Error;

use crate::term::SwitchInstance;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("type `{0}` has no values")]
    Empty(String),
    #[error("type `{0}` lists value `{1}` twice")]
    Duplicate(String, String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConstraintError {
    /// The exhaustive fallback of the satisfiability check ran out of budget.
    #[error("constraint solver limit exceeded after {explored} search nodes")]
    SolverLimit { explored: u64 },
    #[error("malformed constraint formula: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("constraint `{atom}` mentions variables never bound on a path to a 1-leaf")]
    UnboundConstraint { atom: String },
    #[error("no edge of node {node} accepts value {value}")]
    Incomplete { node: SwitchInstance, value: String },
    #[error("grounding requires values for free variables: {0}")]
    FreeVariables(String),
    #[error("OSDD syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// Parse errors carry a 1-based line and column.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProgramError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("switch `{0}`: {1}")]
    BadSwitch(String, String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("unknown procedure {0}")]
    UnknownProcedure(String),
    #[error("switch `{0}` is not declared")]
    UndeclaredSwitch(String),
    #[error("value `{value}` is outside the outcome space of switch `{switch}`")]
    OutsideDomain { switch: String, value: String },
    #[error("instantiation error: {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("recursion depth limit {0} exceeded")]
    DepthLimit(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("world is missing switch instance {0}")]
    NeedInstance(SwitchInstance),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InferenceError {
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("switch `{0}` has no distribution")]
    MissingDistribution(String),
    #[error("diagram is not proper: {0}")]
    Improper(String),
    #[error("measurable fast path not applicable ({0}); use the general exact computation")]
    NotApplicable(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("more than {0} possible worlds")]
    WorldLimit(u64),
    #[error("switch `{0}` has no distribution")]
    MissingDistribution(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SamplingError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("cannot sample from the diagram: {0}")]
    Improper(String),
    #[error("the sample budget must be at least 1")]
    EmptyBudget,
}
