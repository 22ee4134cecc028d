use thiserror::Error;

/// Crate-wide error type.  Variants mirror the failure modes of the
/// individual stages: distribution validation, graph decomposition, the
/// sup optimizers, bound assembly, and protocol simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a probability distribution: {0}")]
    NotAProbability(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable sets overlap on `{0}`")]
    OverlappingVariableSets(String),

    #[error("expected a bivariate distribution, got {0} variables")]
    WrongArity(usize),

    #[error("graph too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("assignment is not marginal-feasible: max residual {0:.3e}")]
    InfeasibleAssignment(f64),

    #[error("symbols belong to different classes ({0} vs {1})")]
    ClassMismatch(usize, usize),

    #[error("instance too large for the brute-force oracle: {0}")]
    TooLargeForOracle(String),

    #[error("k must be >= 2, got {0}")]
    BadK(u64),

    #[error("inputs are dependent (I(X;Y) = {0:.3e} bits); the bound requires independent inputs")]
    DependentInputs(f64),

    #[error("a search-only sup value cannot certify a lower bound")]
    UncertifiedSup,

    #[error("upper bound {upper:.9} is below lower bound {lower:.9}")]
    BoundOrderViolation { lower: f64, upper: f64 },

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("protocol depth {0} exceeds cap {1}")]
    DepthExceeded(usize, usize),

    #[error("kernel not stochastic at {0}")]
    KernelNotStochastic(String),

    #[error("malformed protocol: {0}")]
    ProtocolShape(String),

    #[error("unknown built-in protocol `{0}`")]
    UnknownProtocol(String),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit status: 1 for input files that do not exist or parse,
    /// 2 for infeasible/uncertified/oversized computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Io(_) | Error::NotAProbability(_) => 1,
            _ => 2,
        }
    }
}
