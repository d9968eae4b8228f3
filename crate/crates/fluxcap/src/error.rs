//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the region where a quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A config document failed to parse as JSON.
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A config document parsed but violated a declared invariant.
    #[error("config invariant violated in `{field}`: {message}")]
    ConfigInvariant { field: String, message: String },

    /// A circuit quantity could not be formed (singular or non-positive
    /// capacitance matrix, inconsistent network, ...).
    #[error("model error: {0}")]
    Model(String),

    /// The iterative eigensolver failed to reach its residual target and no
    /// dense fallback was possible.
    #[error(
        "eigensolver did not converge: residual {residual:.3e} after {iterations} iterations \
         (target {target:.3e})"
    )]
    SolverNoConvergence {
        residual: f64,
        target: f64,
        iterations: usize,
    },

    /// The charge-cutoff search hit its cap before meeting the tolerance.
    #[error("charge cutoff search exhausted: spectra still move {shift:.3e} GHz at nc = {cap}")]
    CutoffExhausted { cap: u32, shift: f64 },

    /// A coupling ratio was requested but the reference coupling is too small
    /// to divide by.
    #[error("coupling ratio undefined: |g(1)| = {g1:.3e} GHz is below the numeric floor")]
    RatioUndefined { g1: f64 },

    /// A correlated-error sum does not converge for the given ratio.
    #[error("correlated error sum diverges: decay ratio {ratio} is not inside (-1, 1)")]
    DivergentSum { ratio: f64 },

    /// A pulse schedule violated a structural invariant.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// A statevector was requested beyond the supported size.
    #[error("statevector cap exceeded: {sites} sites > {cap}")]
    StatevectorCap { sites: usize, cap: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub(crate) fn schedule(msg: impl Into<String>) -> Self {
        Error::Schedule(msg.into())
    }

    pub(crate) fn invariant(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::ConfigInvariant {
            field: field.into(),
            message: msg.into(),
        }
    }
}
