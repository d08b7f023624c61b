//! Finite resampling solver.
//!
//! Implements the constructive algorithm for finite instances: sample every
//! variable, then repeatedly pick the first violated event in a fixed
//! priority order and redraw its variables with fresh bits, until no event is
//! violated or the step budget runs out.
//!
//! # Key pieces
//! - [`RandomTape`]: a seeded, per-variable stream of unbiased bits. Every
//!   run is a deterministic function of (seed, ordering, instance).
//! - [`sample_variable`]: exact sampling of arbitrary rational distributions
//!   by arithmetic decoding of tape bits.
//! - [`solve_finite`]: the solver loop, producing an [`ExecutionLog`] that
//!   replays exactly.
//! - [`build_witness_tree`] / [`tree_weight`]: reconstruction of witness
//!   trees from a log and their probability weights.
//! - [`resample_stats`]: per-event empirical resample counts with confidence
//!   half-widths, for checking the `x/(1-x)` bound experimentally.

pub mod assignment;
pub mod error;
pub mod log;
pub mod sampler;
pub mod solver;
pub mod stats;
pub mod tape;
pub mod witness;

pub use assignment::Assignment;
pub use error::MtError;
pub use log::{parse_log, ExecutionLog, ResampleRecord};
pub use sampler::sample_variable;
pub use solver::{
    default_budget, first_violated, priority_ordering, sample_initial, solve_finite,
};
pub use stats::{resample_stats, theoretical_bound, EventStats, Z99};
pub use tape::{RandomTape, ScriptTape, Tape};
pub use witness::{build_witness_tree, tree_weight, WitnessTree};
