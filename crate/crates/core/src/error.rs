use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Adaptive subdivision ran out of budget. `best` holds the components
    /// of the estimate reached so far (real integrands have zero imaginary part).
    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error_estimate:.3e})")]
    NoConvergence {
        best: Vec<Complex64>,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// A Dirac-delta field has no pointwise joint density; the caller must
    /// use one of the closed-form operations instead.
    #[error("analytic path required: {0}")]
    AnalyticPathRequired(&'static str),

    #[error("Fock truncation too small: tail weight {tail:.3e} at n = {n_max}")]
    Truncation { n_max: usize, tail: f64 },

    #[error("unsupported observable: {0}")]
    UnsupportedSymbol(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
