use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclotomic index must be an odd prime, got {0}")]
    InvalidCyclotomicIndex(u64),

    #[error("cannot parse polynomial `{0}`")]
    ParsePolynomial(String),

    #[error("polynomial is not separable")]
    NotSeparable,

    #[error("content {0} of the polynomial is not square-free")]
    SquareContent(BigUint),

    /// `δ_f(p²) = p²`: every residue class is a root, so no value is square-free at `p`.
    #[error("local solubility fails at p = {0}")]
    SolubilityFailure(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("journal: {0}")]
    Journal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
