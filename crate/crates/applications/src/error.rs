//! Error type for the family constructions.

use lll_core::{CoreError, Rational};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Engine(#[from] infinite_engine::EngineError),
    #[error("clause size {m} cannot satisfy the uniform-CNF condition: {detail}")]
    ClauseSizeTooSmall { m: u64, detail: String },
    #[error("clause {clause} has {count} neighbors, above the 2^(m-2) = {bound} limit")]
    NeighborBound { clause: u64, count: u64, bound: u64 },
    #[error("no finite clause size: (1-eps) * 2^(-beta) <= 1/2 at alpha {alpha}, eps {eps}")]
    NoFiniteClauseSize { alpha: Rational, eps: Rational },
    #[error("neighbor profile at size {size} has {count} entries, above the k*2^(alpha*m) budget")]
    ProfileExceeded { size: u64, count: u64 },
    #[error("forbidden set lists {count} words of length {length}, above the 2^(alpha*n) budget")]
    SparsityViolation { length: u64, count: u64 },
    #[error("enumerated word of length {length} is rejected by the set's own decider")]
    EnumeratorDeciderMismatch { length: u64 },
    #[error("trimming removed every variable of a clause of size {size}")]
    TrimmedToNothing { size: u64 },
    #[error("{0}")]
    Invalid(String),
}
