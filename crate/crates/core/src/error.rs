use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particle number must be even and positive, got {0}")]
    OddParticleNumber(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is not normalized: |psi|^2 = {0}")]
    NotNormalized(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("aliasing detected: spectral energy {energy:.3e} above frequency {cutoff}")]
    Aliasing { energy: f64, cutoff: usize },

    #[error("negative reconstructed probability {value:.3e} at outcome ({mu1}, {mu2})")]
    NegativeProbability { value: f64, mu1: i64, mu2: i64 },

    #[error("all outcome probabilities vanish")]
    VanishingProbabilities,

    #[error("density matrix is not positive semidefinite: eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("dimension guard exceeded: N = {n} > {limit}")]
    DimensionGuard { n: usize, limit: usize },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddParticleNumber(n));
    }
    Ok(())
}
