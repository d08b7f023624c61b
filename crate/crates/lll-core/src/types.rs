//! Core domain types: variables, events, instances, dependency graphs, and
//! condition reports.
//!
//! All types are immutable after construction and safe to share between
//! threads; the operations over them are pure functions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::rational::{is_dyadic, Rational};

/// Variable index. Variables are a countable family `P_0, P_1, ...`; a finite
/// instance uses a dense prefix `0..count`.
pub type VarId = u64;

/// Event identifier. Unique within an instance but otherwise opaque.
pub type EventId = u64;

/// A value of a variable, in `0..range_size`.
pub type Value = u32;

/// A discrete random variable: its index, range size, and exact distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub index: VarId,
    pub range_size: u32,
    /// `distribution[v]` is the probability of value `v`; all entries are
    /// positive and sum to exactly 1.
    pub distribution: Vec<Rational>,
}

impl VariableSpec {
    pub fn new(index: VarId, distribution: Vec<Rational>) -> Result<Self, CoreError> {
        let spec = VariableSpec {
            index,
            range_size: distribution.len() as u32,
            distribution,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A fair coin over `{0, 1}`.
    pub fn uniform_bit(index: VarId) -> Self {
        let half = Rational::new(1.into(), 2.into());
        VariableSpec {
            index,
            range_size: 2,
            distribution: vec![half.clone(), half],
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.range_size == 0 {
            return Err(CoreError::invalid(format!(
                "variable {} has empty range",
                self.index
            )));
        }
        if self.distribution.len() != self.range_size as usize {
            return Err(CoreError::invalid(format!(
                "variable {}: distribution length {} does not match range size {}",
                self.index,
                self.distribution.len(),
                self.range_size
            )));
        }
        let mut total = Rational::zero();
        for (v, p) in self.distribution.iter().enumerate() {
            if *p <= Rational::zero() {
                return Err(CoreError::invalid(format!(
                    "variable {}: probability of value {} is not positive",
                    self.index, v
                )));
            }
            total += p;
        }
        if !total.is_one() {
            return Err(CoreError::invalid(format!(
                "variable {}: probabilities sum to {}, not 1",
                self.index, total
            )));
        }
        Ok(())
    }

    /// True if every probability has a power-of-two denominator.
    pub fn is_dyadic(&self) -> bool {
        self.distribution.iter().all(is_dyadic)
    }
}

/// A forbidden event: a sorted set of variables and the explicit list of local
/// evaluations (tuples over those variables) that trigger it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    /// Strictly increasing, nonempty.
    pub vars: Vec<VarId>,
    /// Sorted, duplicate-free; each tuple has length `vars.len()`.
    pub forbidden: Vec<Vec<Value>>,
}

impl Event {
    pub fn new(
        id: EventId,
        vars: Vec<VarId>,
        mut forbidden: Vec<Vec<Value>>,
    ) -> Result<Self, CoreError> {
        if vars.is_empty() {
            return Err(CoreError::invalid(format!("event {id} has no variables")));
        }
        if !vars.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::invalid(format!(
                "event {id}: variables must be strictly increasing"
            )));
        }
        for t in &forbidden {
            if t.len() != vars.len() {
                return Err(CoreError::invalid(format!(
                    "event {id}: tuple length {} does not match {} variables",
                    t.len(),
                    vars.len()
                )));
            }
        }
        forbidden.sort();
        if forbidden.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::invalid(format!(
                "event {id}: duplicate forbidden tuple"
            )));
        }
        Ok(Event {
            id,
            vars,
            forbidden,
        })
    }

    /// Largest variable index the event depends on.
    pub fn max_var(&self) -> VarId {
        *self.vars.last().expect("events have at least one variable")
    }

    /// True if the local evaluation `tuple` is forbidden.
    pub fn is_forbidden(&self, tuple: &[Value]) -> bool {
        self.forbidden
            .binary_search_by(|t| t.as_slice().cmp(tuple))
            .is_ok()
    }

    /// True if the event shares a variable with `other` (or is `other`).
    pub fn intersects(&self, other: &Event) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            match self.vars[i].cmp(&other.vars[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// A finite instance: variables `0..n`, events, weights `x(A)`, and the slack
/// parameter `epsilon`.
///
/// `epsilon = 0` is accepted so the no-slack condition can be expressed as the
/// slack condition with zero slack; the staged infinite engine separately
/// requires a strictly positive slack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteInstance {
    /// Dense: `variables[i].index == i`.
    pub variables: Vec<VariableSpec>,
    /// Sorted by id, ids unique.
    pub events: Vec<Event>,
    pub weights: BTreeMap<EventId, Rational>,
    pub epsilon: Rational,
}

impl FiniteInstance {
    pub fn new(
        variables: Vec<VariableSpec>,
        mut events: Vec<Event>,
        weights: BTreeMap<EventId, Rational>,
        epsilon: Rational,
    ) -> Result<Self, CoreError> {
        events.sort_by_key(|e| e.id);
        let instance = FiniteInstance {
            variables,
            events,
            weights,
            epsilon,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        for (i, spec) in self.variables.iter().enumerate() {
            if spec.index != i as VarId {
                return Err(CoreError::invalid(format!(
                    "variable at position {} has index {}; variables must be dense",
                    i, spec.index
                )));
            }
            spec.validate()?;
        }
        let mut seen = BTreeSet::new();
        for event in &self.events {
            if !seen.insert(event.id) {
                return Err(CoreError::invalid(format!("duplicate event id {}", event.id)));
            }
            for (k, &var) in event.vars.iter().enumerate() {
                let spec = self
                    .variables
                    .get(var as usize)
                    .ok_or(CoreError::MissingVariable {
                        event: event.id,
                        var,
                    })?;
                for t in &event.forbidden {
                    if t[k] >= spec.range_size {
                        return Err(CoreError::invalid(format!(
                            "event {}: tuple value {} out of range for variable {}",
                            event.id, t[k], var
                        )));
                    }
                }
            }
            let x = self.weights.get(&event.id).ok_or_else(|| {
                CoreError::invalid(format!("event {} has no weight", event.id))
            })?;
            if *x <= Rational::zero() || *x >= Rational::one() {
                return Err(CoreError::invalid(format!(
                    "event {}: weight {} is not in (0,1)",
                    event.id, x
                )));
            }
            // An event whose forbidden set covers the whole local cube is
            // unavoidable; reject it here rather than loop forever resampling.
            let cube: Rational = crate::ops::event_probability(event, &self.variables)?;
            if cube.is_one() {
                return Err(CoreError::invalid(format!(
                    "event {} has probability 1 and can never be avoided",
                    event.id
                )));
            }
        }
        if self.epsilon < Rational::zero() || self.epsilon >= Rational::one() {
            return Err(CoreError::invalid(format!(
                "epsilon {} is not in [0,1)",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn variable(&self, var: VarId) -> Option<&VariableSpec> {
        self.variables.get(var as usize)
    }

    /// Lookup by id (events are sorted by id).
    pub fn event(&self, id: EventId) -> Option<&Event> {
        self.events
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.events[i])
    }

    pub fn weight(&self, id: EventId) -> Option<&Rational> {
        self.weights.get(&id)
    }

    pub fn event_ids(&self) -> Vec<EventId> {
        self.events.iter().map(|e| e.id).collect()
    }

    /// Largest variable index any event touches; `None` when there are no
    /// events.
    pub fn max_event_var(&self) -> Option<VarId> {
        self.events.iter().map(|e| e.max_var()).max()
    }
}

/// Punctured-neighborhood adjacency: `B` is adjacent to `A` iff `A != B` and
/// they share a variable. Symmetric by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub adjacency: BTreeMap<EventId, Vec<EventId>>,
}

impl DependencyGraph {
    /// Sorted neighbor list; empty for unknown ids.
    pub fn neighbors(&self, id: EventId) -> &[EventId] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// True if `b` is `a` itself or one of its neighbors.
    pub fn in_closed_neighborhood(&self, a: EventId, b: EventId) -> bool {
        a == b || self.neighbors(a).binary_search(&b).is_ok()
    }
}

/// One row of a condition report, all entries exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionRow {
    pub event: EventId,
    /// `Pr[A]` under the product measure.
    pub lhs: Rational,
    /// `(1-eps) * x(A) * prod_{E in Gamma(A)} (1-x(E))`, or the same without
    /// the `(1-eps)` factor when checked without slack.
    pub rhs: Rational,
    /// `rhs - lhs`; nonnegative iff the row passes.
    pub slack: Rational,
    pub pass: bool,
}

/// Exact per-event condition report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    /// One row per event, ordered by event id.
    pub rows: Vec<ConditionRow>,
    /// True iff every row passes.
    pub pass: bool,
}

impl ConditionReport {
    pub fn failing(&self) -> impl Iterator<Item = &ConditionRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}
