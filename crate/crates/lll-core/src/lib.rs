//! Domain types and exact condition checkers for a constructive Lovász Local
//! Lemma engine.
//!
//! # Key Concepts
//! - [`VariableSpec`]: a discrete random variable with an exact rational
//!   distribution over `{0, .., n-1}`.
//! - [`Event`]: a forbidden event given extensionally, as the finite set of
//!   local evaluations of its variables that trigger it.
//! - [`FiniteInstance`]: variables, events, per-event weights `x(A)` in
//!   `(0,1)`, and a slack parameter `epsilon`.
//! - [`check_lll`]: verifies `Pr[A] <= (1-eps) * x(A) * prod (1-x(E))` over
//!   the punctured neighborhood of each event, in exact rational arithmetic.
//!
//! All arithmetic on probabilities and weights is exact; there is no
//! floating-point path anywhere in a decision.

pub mod error;
pub mod format;
pub mod ops;
pub mod rational;
pub mod types;

pub use error::CoreError;
pub use ops::{build_dependency_graph, check_lll, event_probability};
pub use rational::Rational;
pub use types::{
    ConditionReport, ConditionRow, DependencyGraph, Event, EventId, FiniteInstance, Value, VarId,
    VariableSpec,
};
