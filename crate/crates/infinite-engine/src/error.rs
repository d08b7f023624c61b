//! Error type for the staged engine.

use lll_core::types::{Value, VarId};
use lll_core::{CoreError, Rational};
use mt_finite::MtError;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Mt(#[from] MtError),

    /// An enumerator answered inconsistently with the instance contract.
    #[error("instance inconsistency: {0}")]
    Inconsistent(String),

    /// A stage hit its resample budget before satisfying its events.
    #[error("stage {stage} exhausted its budget of {budget} resamples")]
    StageBudgetExhausted { stage: VarId, budget: u64 },

    /// Stabilization needs a strictly positive instance slack when the
    /// per-variable weight sum does not already fit under the target.
    #[error(
        "instance has zero slack and the weight sum {weight_sum} around variable {var} exceeds \
         the stabilization target {target}; no finite depth works"
    )]
    SlackRequired {
        var: VarId,
        weight_sum: Rational,
        target: Rational,
    },

    /// An iteration guard tripped; parameters are far outside expected range.
    #[error("no depth up to {limit} brought the weight sum under the target")]
    ConvergenceGuard { limit: u64 },

    /// Exact enumeration requires power-of-two probability denominators.
    #[error("variable {var} has a non-dyadic distribution; exact mode requires dyadic")]
    NonDyadic { var: VarId },

    /// No value at `position` passed the extraction threshold. `achieved`
    /// reports what each candidate value attained (exact mass lower bound or
    /// surviving-replica fraction).
    #[error("extraction failed at position {position}: no value passed the threshold")]
    ThresholdFailure {
        position: VarId,
        achieved: Vec<(Value, Rational)>,
    },

    /// Certified extraction ran out of extra stages before the freeze
    /// certificate closed.
    #[error("freeze certificate did not close within {stages_run} stages")]
    CertificateNotClosed { stages_run: u64 },

    #[error("{0}")]
    Invalid(String),
}
