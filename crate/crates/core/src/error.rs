use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("singular or incompatible system: {0}")]
    Singular(String),

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error(
        "success probability {prob:.3e} is below threshold: \
         inversion constant too small or b orthogonal to solution space"
    )]
    ZeroSuccessProbability { prob: f64 },

    #[error("Newton-Raphson diverged after {iterations} iterations (mismatch {mismatch:.3e})")]
    Divergence { iterations: usize, mismatch: f64 },

    #[error("cannot decompose circuit: {0}")]
    Undecomposable(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
