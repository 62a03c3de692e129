use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} is out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    /// A prime factor of `value` exceeds the sieve limit.
    #[error("cannot factor {value}: prime table only reaches {limit}")]
    IncompleteTable { value: u64, limit: u64 },

    #[error("resource limit exceeded: {what} passed the cap of {cap}")]
    ResourceLimit { what: &'static str, cap: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("threshold not met: N = {n} but minimum N is {min_n}")]
    ThresholdNotMet { n: u64, min_n: u64 },

    /// Search stopped before proving optimality. `lower..=upper` brackets the optimum.
    #[error("node budget of {budget} exhausted; optimum lies in [{lower}, {upper}]")]
    BudgetExhausted {
        budget: u64,
        lower: usize,
        upper: usize,
        incumbent: Vec<u64>,
    },
}
