use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("static divergence: Drude permittivity is singular at ω = 0, use the born_strength limit")]
    StaticDivergence,
    #[error("range error: {0}")]
    Range(String),
    #[error("no convergence: {message} (best estimate {best:e})")]
    NonConvergence { message: String, best: f64 },
    #[error("Born series divergent, use direct_solve (term norms {norms:?})")]
    BornDivergent { norms: Vec<f64> },
    #[error("ill-conditioned system: pivot ratio {pivot_ratio:e}")]
    Conditioning { pivot_ratio: f64 },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("fit quality: {0}")]
    Fit(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. }
            | Error::BornDivergent { .. }
            | Error::Conditioning { .. }
            | Error::Fit(_) => 2,
            _ => 1,
        }
    }
}
