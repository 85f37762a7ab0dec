use thiserror::Error;

/// Errors raised by the library.
///
/// `Internal` marks a broken invariant (for example a non-integral Möbius
/// inversion); callers should treat it as a bug, never as bad input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is reducible over F_{0}")]
    ReducibleModulus(u64),
    #[error("singular curve: discriminant vanishes")]
    SingularCurve,
    #[error("characteristic {0} not supported (short Weierstrass form needs p > 3)")]
    UnsupportedCharacteristic(u64),
    #[error("pole of the zeta function at s = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("degenerate fixed point: |det(I - M)| = {0:e}")]
    Degenerate(f64),
    #[error("matrix is not invertible over Z_p (det has valuation {0})")]
    NonUnit(u32),
    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),
    #[error("carry escaped the digit window at level {0}")]
    DepthExhausted(i64),
    #[error("table of size {0} exceeds the dense limit")]
    TooLarge(u128),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
