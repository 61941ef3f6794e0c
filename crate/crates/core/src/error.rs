use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{a} is not a quadratic residue modulo {p}")]
    NonResidue { a: u64, p: u64 },

    #[error("{p} is inert in the field of discriminant {d}; no representation exists")]
    InertPrime { d: i64, p: u64 },

    #[error("{p} ramifies in the field of discriminant {d}")]
    RamifiedPrime { d: i64, p: u64 },

    #[error("unsupported discriminant {0}: not a class-number-one imaginary quadratic field")]
    UnsupportedDiscriminant(i64),

    #[error("conductor {conductor} is not divisible by |d_K| = {abs_disc}")]
    NotIntegral { conductor: u64, abs_disc: u64 },

    #[error("curve {label} has bad reduction at {p}")]
    BadReduction { label: String, p: u64 },

    #[error("a_p = {a_p} violates the Hasse bound at p = {p}")]
    HasseViolation { a_p: i64, p: u64 },

    #[error("range [{lo}, {hi}] exceeds the sieve budget of {budget} integers")]
    RangeTooLarge { lo: u64, hi: u64, budget: u64 },

    #[error("interval [{alpha}, {beta}] is degenerate")]
    DegenerateInterval { alpha: f64, beta: f64 },

    #[error("support upper end {required:.3e} exceeds the configured budget {budget:.3e}")]
    BudgetExceeded { required: f64, budget: f64 },

    #[error("corrupt trace cache {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error("trace cache {0} is locked by another writer")]
    CacheLocked(PathBuf),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown curve label {0:?}")]
    UnknownCurve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
