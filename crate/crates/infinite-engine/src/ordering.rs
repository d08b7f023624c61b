//! Deterministic event ordering for staged runs.
//!
//! Events are processed by (max variable, id): all events whose variables
//! fit inside the current prefix come before any event needing a later
//! variable, and ties break on the numeric id. The ordering is therefore a
//! pure function of the instance, independent of run history, and every
//! stage extends the previous stage's ordering instead of reshuffling it.

use std::collections::BTreeSet;

use lll_core::types::{EventId, VarId};

use crate::error::EngineError;
use crate::instance::EffectiveInstance;

/// The materialized ordering of all events with max variable `<= upto`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventOrdering {
    pub upto: VarId,
    pub ids: Vec<EventId>,
}

impl EventOrdering {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Enumerates and validates the ordering for prefix `0..=upto`.
///
/// Validation re-derives each event's max variable and checks that the
/// instance's enumeration is sorted by (max variable, id), within bound,
/// and duplicate-free; any violation is an `Inconsistent` error naming the
/// offending event.
pub fn order_events(
    instance: &dyn EffectiveInstance,
    upto: VarId,
) -> Result<EventOrdering, EngineError> {
    let ids = instance.events_upto(upto);
    let mut seen = BTreeSet::new();
    let mut last_key: Option<(VarId, EventId)> = None;
    for &id in &ids {
        if !seen.insert(id) {
            return Err(EngineError::Inconsistent(format!(
                "event {id} listed twice in ordering up to variable {upto}"
            )));
        }
        let event = instance.event_def(id);
        let max_var = event.max_var();
        if max_var > upto {
            return Err(EngineError::Inconsistent(format!(
                "event {id} has max variable {max_var}, beyond ordering bound {upto}"
            )));
        }
        let key = (max_var, id);
        if let Some(prev) = last_key {
            if prev > key {
                return Err(EngineError::Inconsistent(format!(
                    "event {id} out of order: key {key:?} follows {prev:?}"
                )));
            }
        }
        last_key = Some(key);
    }
    Ok(EventOrdering { upto, ids })
}
