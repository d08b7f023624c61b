//! Freeze certificates: sound proofs that a prefix of variables can never
//! change again.
//!
//! Soundness rests on one induction. Call a finite set `F` of assigned
//! variables *closed* when, for every event `A` sharing a variable with `F`
//! and every forbidden tuple `t` of `A`, some variable `v` in `F ∩ vbl(A)`
//! currently disagrees with `t`. Resampling only happens to a violated
//! event, i.e. one whose current tuple IS forbidden; an event whose every
//! forbidden tuple disagrees with the current `F`-values at an `F`-variable
//! cannot become violated while the `F`-values stand, so it never fires, so
//! it never rewrites an `F`-variable. Events not touching `F` cannot rewrite
//! `F` either. Hence the `F`-values stand forever, whatever the future tape
//! bits: closure is a certificate that every variable in `F` is frozen.

use lll_core::types::{EventId, VarId};
use mt_finite::Assignment;

use crate::instance::{CertificateRule, EffectiveInstance};

/// Generic certificate search: start from `F = {0..=s}` and greedily grow.
/// Whenever some event's forbidden tuple is not yet contradicted inside `F`,
/// add the first (lowest-index) instantiated variable of the event that
/// disagrees with the tuple; fail if none exists. Terminates because `F`
/// only grows within the instantiated variables, and each event is processed
/// once (a contradiction inside `F` survives any growth of `F`).
///
/// The rule is sound but not complete: answering `false` only means this
/// greedy search found no certificate at the current stage.
pub struct GreedyFreeze;

impl CertificateRule for GreedyFreeze {
    fn prefix_frozen(
        &self,
        instance: &dyn EffectiveInstance,
        s: VarId,
        stage: VarId,
        assignment: &Assignment,
    ) -> bool {
        if s > stage || (0..=s).any(|v| !assignment.is_assigned(v)) {
            return false;
        }
        let mut frontier: Vec<VarId> = (0..=s).collect();
        let mut in_f: std::collections::BTreeSet<VarId> = frontier.iter().copied().collect();
        let mut processed: std::collections::BTreeSet<EventId> = std::collections::BTreeSet::new();
        while let Some(v) = frontier.pop() {
            for id in instance.events_of_variable(v) {
                if !processed.insert(id) {
                    continue;
                }
                let event = instance.event_def(id);
                for tuple in &event.forbidden {
                    let killed = event.vars.iter().zip(tuple).any(|(&u, &t)| {
                        in_f.contains(&u) && assignment.get(u).is_some_and(|cur| cur != t)
                    });
                    if killed {
                        continue;
                    }
                    let witness = event.vars.iter().zip(tuple).find_map(|(&u, &t)| {
                        match assignment.get(u) {
                            Some(cur) if cur != t => Some(u),
                            _ => None,
                        }
                    });
                    match witness {
                        Some(u) => {
                            in_f.insert(u);
                            frontier.push(u);
                        }
                        None => return false,
                    }
                }
            }
        }
        true
    }
}

/// Rule for families whose finite prefixes provably admit no freeze
/// certificate (the 2D construction: any finite region is poked by
/// placements overlapping it in arbitrarily few cells). Always answers
/// `false`, so certificate-based extraction fails honestly instead of
/// searching forever.
pub struct NeverFrozen;

impl CertificateRule for NeverFrozen {
    fn prefix_frozen(
        &self,
        _instance: &dyn EffectiveInstance,
        _s: VarId,
        _stage: VarId,
        _assignment: &Assignment,
    ) -> bool {
        false
    }
}
