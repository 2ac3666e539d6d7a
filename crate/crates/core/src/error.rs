use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reported by the library.
///
/// Variants split into input problems (bad models, bad arguments) and
/// numerical failures (no tilt, non-convergence, overflow); the CLI maps the
/// two groups to different exit codes via [`Error::is_numerical`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown state value {0}")]
    UnknownState(f64),

    #[error("unstable queue: mean service time {mean_service} must be below mean inter-arrival time {mean_interarrival}")]
    Unstable {
        mean_service: f64,
        mean_interarrival: f64,
    },

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("NoTilt: Perron eigenvalue stays below 1 for every theta up to the cap {cap}, so no theta makes E(exp(-theta S_n)) converge to a positive finite limit")]
    NoTilt { cap: f64 },

    #[error("NoRoot: g(theta) = phi(-theta) A(theta) - 1 has no sign change on (0, {upper})")]
    NoRoot { upper: f64 },

    #[error("DegenerateCase: 1 + 2R = {one_plus_two_r} (partial sums have bounded variance; no tilt exists)")]
    DegenerateCase { one_plus_two_r: f64 },

    #[error("{what} did not converge after {iterations} iterations (last delta {last_delta:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_delta: f64,
    },

    #[error("exponential overflow: exponent {exponent} exceeds the guard (theta past its critical value?)")]
    Overflow { exponent: f64 },

    #[error("transform argument {argument} outside its domain of finiteness")]
    Domain { argument: f64 },

    #[error("covariance block of size {size} is not positive definite")]
    NotPositiveDefinite { size: usize },

    #[error("insufficient tail mass: {positive} strictly positive waits, need at least {required}")]
    InsufficientTailMass { positive: usize, required: usize },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoTilt { .. }
                | Error::NoRoot { .. }
                | Error::DegenerateCase { .. }
                | Error::NonConvergence { .. }
                | Error::Overflow { .. }
                | Error::Domain { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::InsufficientTailMass { .. }
        )
    }
}
