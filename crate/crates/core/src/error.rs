use crate::instance::Edge;
use thiserror::Error;

/// Every failure the library can report.
///
/// [`Error::is_usage`] separates malformed input (bad files, bad numbers)
/// from domain failures on well-formed input; the CLI maps the two to
/// different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("total demand {demand} differs from total supply {supply}")]
    UnbalancedTotals { demand: String, supply: String },
    #[error("negative rate at {side} {index}")]
    NegativeRate { side: Side, index: usize },
    #[error("rate at {side} {index} must be positive")]
    NonPositiveRate { side: Side, index: usize },
    #[error("edge {0} is out of range")]
    EdgeOutOfRange(Edge),
    #[error("edge {0} is listed twice")]
    DuplicateEdge(Edge),
    #[error("edge {0} is already present")]
    EdgeAlreadyPresent(Edge),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("the polytope of feasible flows is empty")]
    Infeasible,
    #[error("not a feasible point: {0}")]
    NotFeasiblePoint(String),
    #[error("vector is identically zero")]
    ZeroVector,
    #[error("greedy choice {0} is not available")]
    InvalidChoice(Edge),
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("{what} has size {size}, limit is {limit}")]
    SizeLimitExceeded { what: &'static str, size: usize, limit: usize },
    #[error("target ERP {d} exceeds the largest achievable value {max}")]
    TargetAboveDstarStar { d: usize, max: usize },
    #[error("target ERP must be at least 1")]
    InvalidTarget,
    #[error("merge phase found no exchangeable edge pair")]
    InternalMergeStuck,
    #[error("graph already satisfies the CRP condition")]
    AlreadyCrp,
    #[error("invalid closing schedule: {0}")]
    InvalidK(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("the CRP gap is undefined for this instance")]
    GapUndefined,
    #[error("server {0} has no compatible queue")]
    IsolatedServer(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid arrival or service model: {0}")]
    InvalidModel(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True for errors caused by unreadable or structurally invalid input.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::ParseRational(_) | Error::Malformed(_))
    }

    /// Variant name, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParseRational(_) => "ParseRational",
            Error::Malformed(_) => "Malformed",
            Error::UnbalancedTotals { .. } => "UnbalancedTotals",
            Error::NegativeRate { .. } => "NegativeRate",
            Error::NonPositiveRate { .. } => "NonPositiveRate",
            Error::EdgeOutOfRange(_) => "EdgeOutOfRange",
            Error::DuplicateEdge(_) => "DuplicateEdge",
            Error::EdgeAlreadyPresent(_) => "EdgeAlreadyPresent",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::Infeasible => "Infeasible",
            Error::NotFeasiblePoint(_) => "NotFeasiblePoint",
            Error::ZeroVector => "ZeroVector",
            Error::InvalidChoice(_) => "InvalidChoice",
            Error::NotAPartition(_) => "NotAPartition",
            Error::SizeLimitExceeded { .. } => "SizeLimitExceeded",
            Error::TargetAboveDstarStar { .. } => "TargetAboveDstarStar",
            Error::InvalidTarget => "InvalidTarget",
            Error::InternalMergeStuck => "InternalMergeStuck",
            Error::AlreadyCrp => "AlreadyCrp",
            Error::InvalidK(_) => "InvalidK",
            Error::InvalidObjective(_) => "InvalidObjective",
            Error::GapUndefined => "GapUndefined",
            Error::IsolatedServer(_) => "IsolatedServer",
            Error::InvalidEpsilon(_) => "InvalidEpsilon",
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvariantViolation(_) => "InvariantViolation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Demand,
    Supply,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Demand => f.write_str("demand"),
            Side::Supply => f.write_str("supply"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
