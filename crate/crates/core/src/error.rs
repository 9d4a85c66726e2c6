use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lattice of {requested} atoms exceeds the limit of {limit}")]
    TooManyAtoms { requested: usize, limit: usize },

    #[error("atoms {i} and {j} coincide (k_L r = {distance:e})")]
    CoincidentAtoms { i: usize, j: usize, distance: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("coupling matrix is defective: eigenvector condition estimate {condition:e}")]
    Defective { condition: f64 },

    #[error("mode {mode} has rate {rate:e} but carries amplitude {amplitude:e}; emission kernel is singular")]
    SubradiantSingularity {
        mode: usize,
        rate: f64,
        amplitude: f64,
    },

    #[error("mode {mode} does not decay (rate {rate:e}); no outgoing photon")]
    NonDecayingMode { mode: usize, rate: f64 },

    #[error("{what} residual {residual:e} exceeds tolerance {tolerance:e}")]
    Inaccurate {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("distribution has no unique peak")]
    NoUniquePeak,

    #[error("{resource} of {requested} entries exceeds the guard of {limit}")]
    ResourceGuard {
        resource: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
