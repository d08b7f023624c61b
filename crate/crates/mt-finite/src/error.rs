//! Error type for the finite solver.

use lll_core::{ConditionReport, CoreError};

use crate::log::ExecutionLog;

#[derive(Debug, thiserror::Error)]
pub enum MtError {
    #[error(transparent)]
    Core(#[from] CoreError),

    /// The local-lemma condition fails; the report lists every failing event.
    #[error("condition check failed for {} event(s)", .0.rows.iter().filter(|r| !r.pass).count())]
    ConditionFailed(Box<ConditionReport>),

    /// The resample budget ran out before all events were satisfied. Carries
    /// the log up to the stopping point.
    #[error("budget exhausted after {} resamples", .0.records.len())]
    BudgetExhausted(Box<ExecutionLog>),

    /// A scripted tape ran out of bits mid-sample.
    #[error("tape exhausted while sampling variable {var}")]
    TapeExhausted { var: u64 },

    #[error("ordering is not a permutation of the instance's event ids: {0}")]
    InvalidOrdering(String),

    #[error("log line {line}: {msg}")]
    LogParse { line: usize, msg: String },

    #[error("log does not replay: {0}")]
    Replay(String),

    #[error("resample statistics need at least one log")]
    EmptyLogs,

    #[error("step {step} out of range (log has {len} records)")]
    StepOutOfRange { step: u64, len: usize },

    #[error("{0}")]
    Invalid(String),
}
