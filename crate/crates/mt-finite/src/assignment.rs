//! Variable assignments.

use std::collections::BTreeMap;

use lll_core::types::{Event, Value, VarId};

/// A (possibly partial) evaluation of variables. Values are produced by
/// exact sampling against each variable's spec, so every stored value is
/// range-valid by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub values: BTreeMap<VarId, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: VarId) -> Option<Value> {
        self.values.get(&var).copied()
    }

    pub fn set(&mut self, var: VarId, value: Value) {
        self.values.insert(var, value);
    }

    pub fn is_assigned(&self, var: VarId) -> bool {
        self.values.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The tuple of values over `vars`, or `None` if any is unassigned.
    pub fn local_tuple(&self, vars: &[VarId]) -> Option<Vec<Value>> {
        vars.iter().map(|&v| self.get(v)).collect()
    }

    /// True if `event`'s variables are all assigned and their tuple is
    /// forbidden. Events with unassigned variables count as not violated.
    pub fn violates(&self, event: &Event) -> bool {
        match self.local_tuple(&event.vars) {
            Some(tuple) => event.is_forbidden(&tuple),
            None => false,
        }
    }

    /// Values of variables `0..=max` in index order, for snapshot export.
    /// `None` if any of them is unassigned.
    pub fn dense_prefix(&self, max: VarId) -> Option<Vec<Value>> {
        (0..=max).map(|v| self.get(v)).collect()
    }
}
