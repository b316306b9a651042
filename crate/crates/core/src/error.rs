use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two points (or a point and a dataset) disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A group index outside `1..=m`.
    UnknownGroup { group: usize, groups: usize },
    /// A point was routed to a structure that only accepts another group.
    GroupMismatch { expected: usize, found: usize },
    /// Group-ordered stream received a group-1 point after group 2 had started.
    StreamOrder { id: u64 },
    /// Empty point set or center set where a nonempty one is required.
    Empty(&'static str),
    /// Invalid parameter (caps, radius, epsilon, ...).
    InvalidInput(String),
    /// The exhaustive oracle refuses instances above its size guard.
    TooLarge { n: usize, k: usize, max_n: usize, max_k: usize },
    /// No fairness-feasible center set exists.
    Infeasible(String),
    /// Center placement for the planted generator ran out of attempts.
    RetryBudgetExceeded { placed: usize, wanted: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::UnknownGroup { group, groups } => {
                write!(f, "group {group} outside 1..={groups}")
            }
            Error::GroupMismatch { expected, found } => {
                write!(f, "expected a point of group {expected}, got group {found}")
            }
            Error::StreamOrder { id } => {
                write!(f, "point {id} of group 1 arrived after group 2 started")
            }
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::TooLarge { n, k, max_n, max_k } => write!(
                f,
                "instance too large for exhaustive search (n={n}, k={k}; limits n<={max_n}, k<={max_k})"
            ),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::RetryBudgetExceeded { placed, wanted } => write!(
                f,
                "could only place {placed} of {wanted} centers at the requested separation"
            ),
        }
    }
}

impl core::error::Error for Error {}
