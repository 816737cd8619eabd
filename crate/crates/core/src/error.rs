use thiserror::Error;

use crate::arith::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("n must be a nonsquare positive integer (got {0}, which fails the squareness check)")]
    NonsquareRequired(Nat),
    #[error("modulus must be at least 1")]
    InvalidModulus,
    #[error("modulus {k} is too large: k^2 must be below n = {n}")]
    ModulusTooLarge { k: Nat, n: Nat },
    #[error("residue {r} is not reduced modulo {k}")]
    ResidueOutOfRange { r: Nat, k: Nat },
    #[error("oracle budget too small: {0}")]
    Budget(String),
    #[error("twin branches disagree: {0}")]
    BranchMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
