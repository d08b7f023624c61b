//! Staged resampling over instances with infinitely many variables.
//!
//! A finite solver needs the whole instance up front. This crate works a
//! stage at a time: stage `i` samples variable `i` lazily, extends the
//! event ordering to everything whose variables lie inside `0..=i`, and
//! resamples until no materialized event is violated. Because each stage
//! replays the same per-variable bit streams, the staged run is
//! bit-for-bit the finite run whenever the instance happens to be finite.
//!
//! On top of the runner sit the tools that make infinite instances
//! tractable: stabilization bounds (after how many steps is a variable
//! settled with high probability), exact distribution enumeration over
//! short random tapes, freeze certificates proving a prefix can never
//! change again, and prefix extraction in exact, monte-carlo, and
//! certified flavors.

pub mod error;
pub mod exact;
pub mod extract;
pub mod freeze;
pub mod instance;
pub mod ordering;
pub mod reach;
pub mod stage;

pub use error::EngineError;
pub use exact::{enumerate_exact_distribution, ExactDistribution};
pub use extract::{
    extract_computable_prefix, verify_prefix, ExtractedPrefix, ExtractionMode, PrefixMode,
    PrefixReport,
};
pub use freeze::{GreedyFreeze, NeverFrozen};
pub use instance::{
    effective_event_probability, CertificateRule, ConsistencyChecked, EffectiveInstance,
    EventCertification, FiniteAsEffective,
};
pub use ordering::{order_events, EventOrdering};
pub use reach::{reach, stabilization_bound, StabilizationBound};
pub use stage::{condition_row, run_stages, PrefixSnapshot, StagedRunner};

pub use lll_core::{ConditionRow, Rational};
