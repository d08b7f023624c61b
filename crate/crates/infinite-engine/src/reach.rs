//! Dependency reach and stabilization bounds.
//!
//! Once stage `j` completes, a later change of variable `P_i` requires a
//! chain of resamples walking from some event on `P_i` through `m` or more
//! neighbor hops out past variable `j`, and the probability of such a chain
//! decays like `(1 - eps)^m`. Picking `m` so the decayed event weight around
//! `P_i` is at most `eps/2`, then capping the number of steps stage `j` may
//! take via the expected-resample bound (first-moment tail, another `eps/2`),
//! gives a computable step count `N` after which `P_i` changes with
//! probability at most `eps`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use lll_core::rational::ceil_u64;
use lll_core::types::VarId;
use lll_core::Rational;

use crate::error::EngineError;
use crate::instance::EffectiveInstance;

/// Computable stabilization data for one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizationBound {
    pub variable: VarId,
    /// The failure probability the bound was computed for.
    pub epsilon: Rational,
    /// After this many resample steps, the variable changes with probability
    /// at most `epsilon`.
    pub steps: u64,
    /// Neighbor-closure depth `m` used.
    pub reach_depth: u64,
    /// Max variable `j` in the depth-`m` closure; completing stage `j`
    /// within the step budget freezes the variable up to probability
    /// `epsilon`.
    pub reach_var: VarId,
}

/// Max variable index in the depth-`m` neighbor closure of the events
/// involving `var`: start from those events and take dependency-graph
/// neighbors `m` times. A variable in no events reaches only itself.
pub fn reach(instance: &dyn EffectiveInstance, var: VarId, depth: u64) -> VarId {
    let mut max_var = var;
    let mut closure = BTreeSet::new();
    let mut frontier: Vec<Vec<VarId>> = Vec::new();
    for id in instance.events_of_variable(var) {
        if closure.insert(id) {
            let vars = instance.event_def(id).vars;
            max_var = max_var.max(*vars.last().expect("events are never empty"));
            frontier.push(vars);
        }
    }
    for _ in 0..depth {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for vars in &frontier {
            for &v in vars {
                for nbr in instance.events_of_variable(v) {
                    if closure.insert(nbr) {
                        let nvars = instance.event_def(nbr).vars;
                        max_var = max_var.max(*nvars.last().expect("events are never empty"));
                        next.push(nvars);
                    }
                }
            }
        }
        frontier = next;
    }
    max_var
}

/// Computes `N(i, eps)` such that `P_i` changes after step `N` with
/// probability at most `eps`:
///
/// 1. smallest `m` with `(1 - eps_instance)^m * S_i <= eps/2`, where
///    `S_i = sum over events A containing P_i of x(A)/(1-x(A))`;
/// 2. `j = reach(i, m)`;
/// 3. `N = ceil(T_j * 2/eps)` with `T_j` the expected-resample bound over
///    events with max variable `<= j` (first-moment tail: the chance stage
///    `j` needs more than `N` steps is at most `eps/2`).
///
/// Requires `eps` in (0,1). With instance slack 0 the geometric decay is
/// absent, so a positive `S_i` above the target is a `SlackRequired` error.
pub fn stabilization_bound(
    instance: &dyn EffectiveInstance,
    var: VarId,
    eps: &Rational,
) -> Result<StabilizationBound, EngineError> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(EngineError::Invalid(format!(
            "stabilization failure probability must be in (0,1), got {eps}"
        )));
    }
    let weight_sum = instance.var_weight_bound(var);
    let target = eps / Rational::from_integer(2.into());
    let decay = Rational::one() - instance.epsilon();
    const GUARD: u64 = 1_000_000;
    let mut depth = 0u64;
    let mut current = weight_sum.clone();
    while current > target {
        if decay.is_one() {
            return Err(EngineError::SlackRequired {
                var,
                weight_sum,
                target,
            });
        }
        depth += 1;
        if depth > GUARD {
            return Err(EngineError::ConvergenceGuard { limit: GUARD });
        }
        current *= &decay;
    }
    let reach_var = reach(instance, var, depth);
    let expected = instance.prefix_weight_bound(reach_var);
    let steps = ceil_u64(&(expected * Rational::from_integer(2.into()) / eps));
    Ok(StabilizationBound {
        variable: var,
        epsilon: eps.clone(),
        steps,
        reach_depth: depth,
        reach_var,
    })
}
