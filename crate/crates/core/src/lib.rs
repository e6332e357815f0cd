//! Exact growth computations in finite-dimensional algebras over finite fields.
//!
//! The workbench builds classical and exceptional simple Lie algebras over
//! GF(p^k), computes set growth under addition and bracket exactly, certifies
//! extremal bases, and runs the dimensional-estimate / descent pipelines at
//! desk scale. All verdicts are exact integer comparisons; floating point
//! appears only in reported (non-normative) measurements.

pub mod algebra;
pub mod descent;
pub mod exec;
pub mod extremal;
pub mod field;
pub mod growth;
pub mod linalg;
pub mod sumprod;

use thiserror::Error;

/// Unified error type. `BudgetExceeded` is the only "soft" variant: callers
/// that can produce a partial result wrap it in an explicit inconclusive
/// marker instead of returning this error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("inversion of zero in GF({p}^{k})")]
    ZeroInverse { p: u64, k: u32 },
    #[error("operands belong to different field contexts")]
    FieldMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus polynomial is not irreducible over GF({p})")]
    NotIrreducible { p: u64 },
    #[error("invalid field context: {0}")]
    BadFieldCtx(String),
    #[error("rank {n} out of range for type {ty}")]
    RankOutOfRange { ty: String, n: usize },
    #[error("characteristic 2 not supported by the classical constructors")]
    CharTwo,
    #[error("characteristic {p} below required bound {need}")]
    CharTooSmall { p: u64, need: u64 },
    #[error("set is not symmetric (needs 0 and closure under negation)")]
    NotSymmetric,
    #[error("set does not generate the algebra")]
    NotGenerating,
    #[error("budget exceeded: {what} (limit {limit})")]
    BudgetExceeded { what: String, limit: usize },
    #[error("zero element rejected: {0}")]
    ZeroElement(String),
    #[error("collinear pair rejected: y is a scalar multiple of x")]
    CollinearPair,
    #[error("certified lemma violated: {0}")]
    LemmaViolation(String),
    #[error("witness search exhausted: {0}")]
    WitnessSearchExhausted(String),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
