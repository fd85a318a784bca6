use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A numeric parameter fell outside its admissible range.
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("ancilla index {index} is outside 1..={n_splitters}")]
    IndexOutOfRange { index: u32, n_splitters: u32 },
    #[error("invalid detection pattern: {0}")]
    InvalidPattern(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    /// An input reached an operation whose precondition it violates
    /// (unnormalized state, negative probability, disagreeing assembly paths).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dense oracle refuses cutoff {n_max} (limit {limit})")]
    DimensionGuard { n_max: usize, limit: usize },
    #[error("Li_(-1/2) series did not converge at x = {x} within {terms} terms")]
    NoConvergence { x: f64, terms: usize },
}

impl Error {
    /// True for errors caused by caller-supplied values rather than by an
    /// internal inconsistency.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::IndexOutOfRange { .. }
                | Error::InvalidPattern(_)
                | Error::EmptyGrid
                | Error::DimensionGuard { .. }
        )
    }

    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
