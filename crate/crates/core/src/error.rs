use thiserror::Error;

/// Every failure the pipeline can report. The `E_*` code is the stable part of
/// the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("E_SYNTAX at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("E_UNDECLARED at {line}:{col}: `{name}` is not declared")]
    Undeclared { name: String, line: usize, col: usize },
    #[error("E_REDECLARED at {line}:{col}: `{name}` is already declared")]
    Redeclared { name: String, line: usize, col: usize },
    #[error("E_INVALID: {0}")]
    Invalid(String),
    #[error("E_NEGATE_EQ: equality `{0}` cannot be negated")]
    NegateEq(String),
    #[error("E_DOMAIN: {0}")]
    Domain(String),
    #[error("E_NO_PRIOR_DEF: `{0}` is assigned in only some branches and has no prior definition")]
    NoPriorDef(String),
    #[error("E_UNBOUNDED_DISAGG: variable `{0}` must have finite bounds to be disaggregated")]
    UnboundedDisagg(String),
    #[error("E_EMPTY_DISJUNCTION: disjunction `{0}` has no terms")]
    EmptyDisjunction(String),
    #[error("E_TOO_LARGE: {0}")]
    TooLarge(String),
    #[error("E_M_UNBOUNDED: no finite big-M for constraint `{0}`")]
    MUnbounded(String),
    #[error("E_EPS_NONPOSITIVE: eps must be > 0, got {0}")]
    EpsNonpositive(f64),
    #[error("E_COUNT_MISMATCH: {0}")]
    CountMismatch(String),
    #[error("E_PROVENANCE_MISSING: {0}")]
    ProvenanceMissing(String),
    #[error("E_TOO_MANY_BINARIES: {0} binary assignments exceed the enumeration cap")]
    TooManyBinaries(u128),
    #[error("E_NO_BRANCH: no branch of block {0} applies")]
    NoBranch(usize),
    #[error("E_UNBOUNDED_INPUT: input `{0}` needs finite bounds to be gridded")]
    UnboundedInput(String),
    #[error("E_JSON: {0}")]
    Json(String),
    #[error("E_IO: {0}")]
    Io(String),
    #[error("E_USAGE: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for usage problems, 1 for model errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EpsNonpositive(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
