use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter or argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An infinite product did not reach its tail tolerance within the term cap.
    #[error("infinite product did not converge within {max_terms} terms (last factor deviation {last_deviation:e})")]
    Convergence {
        max_terms: usize,
        last_deviation: f64,
    },

    /// The Stieltjes-Wigert shifted argument is nonpositive, so the
    /// approximation is undefined at this lattice point.
    #[error("approximation undefined at x = {x}: shifted argument {shifted} is not positive")]
    OutOfSupport { x: usize, shifted: f64 },

    /// Exhaustive enumeration was requested over more points than allowed.
    #[error("enumeration of {points} points exceeds the cap of {cap}; reduce n (at most {suggested_n} for k = {k}) or the category count")]
    Size {
        points: f64,
        cap: u64,
        k: usize,
        suggested_n: usize,
    },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
