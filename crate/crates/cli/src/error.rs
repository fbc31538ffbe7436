use osdd::error::{EvalError, InferenceError, OracleError, ParseError, ProgramError, SamplingError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }

    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::User(format!("parse error: {e}"))
    }
}

impl From<ProgramError> for CliError {
    fn from(e: ProgramError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Diagram(_) | EvalError::Constraint(_) | EvalError::NeedInstance(_) => {
                CliError::Internal(e.to_string())
            }
            e => CliError::User(e.to_string()),
        }
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Improper(_) => CliError::Internal(e.to_string()),
            e => CliError::User(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Eval(e) => e.into(),
            e => CliError::User(e.to_string()),
        }
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::Eval(e) => e.into(),
            SamplingError::Inference(e) => e.into(),
            SamplingError::Improper(_) => CliError::Internal(e.to_string()),
            SamplingError::EmptyBudget => CliError::User(e.to_string()),
        }
    }
}

impl From<osdd::error::DiagramError> for CliError {
    fn from(e: osdd::error::DiagramError) -> Self {
        CliError::User(format!("diagram: {e}"))
    }
}
