use thiserror::Error;

/// Errors raised by the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("energy {lambda} too close to a threshold ({detail})")]
    Threshold { lambda: f64, detail: String },
    #[error("wrong energy regime: {0}")]
    Regime(String),
    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("numerical method did not converge: {0}")]
    Convergence(String),
    #[error("mesh: {0}")]
    Mesh(String),
}

pub type Result<T> = std::result::Result<T, Error>;
