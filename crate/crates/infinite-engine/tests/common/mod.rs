// Shared by several integration-test targets; each uses a different subset.
#![allow(dead_code)]

use std::collections::BTreeMap;

use infinite_engine::FiniteAsEffective;
use lll_core::rational::rat;
use lll_core::types::{Event, FiniteInstance, VariableSpec};

/// Twenty 4-clauses forbidding all-zeros, clause `k` on variables
/// `3k..=3k+3`, so consecutive clauses overlap in exactly one variable.
/// Weights 1/4 with slack 1/10 satisfy the local condition.
pub fn chain_cnf() -> FiniteInstance {
    let clauses: Vec<Event> = (0..20)
        .map(|k| Event::new(k, (3 * k..=3 * k + 3).collect(), vec![vec![0, 0, 0, 0]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..20).map(|k| (k, rat(1, 4))).collect();
    FiniteInstance::new(
        (0..=60).map(VariableSpec::uniform_bit).collect(),
        clauses,
        weights,
        rat(1, 10),
    )
    .unwrap()
}

pub fn chain_effective() -> FiniteAsEffective {
    FiniteAsEffective::new(chain_cnf())
}

/// Pairwise chain: clause `k` forbids (0,0) on variables `k, k+1`. No
/// weight assignment can satisfy the local condition for interior clauses
/// (the best possible product is 4/27 < 1/4), which makes this the
/// canonical instance whose condition diagnostics fire while runs still
/// converge.
pub fn pair_chain(clauses: u64) -> FiniteAsEffective {
    let events: Vec<Event> = (0..clauses)
        .map(|k| Event::new(k, vec![k, k + 1], vec![vec![0, 0]]).unwrap())
        .collect();
    let weights: BTreeMap<_, _> = (0..clauses).map(|k| (k, rat(1, 2))).collect();
    FiniteAsEffective::new(
        FiniteInstance::new(
            (0..=clauses).map(VariableSpec::uniform_bit).collect(),
            events,
            weights,
            rat(0, 1),
        )
        .unwrap(),
    )
}
