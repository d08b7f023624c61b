//! Property tests for the finite solver over randomly generated chain
//! instances (clause k on a window sharing one variable with each neighbor),
//! which always pass the no-slack condition check.

use std::collections::BTreeMap;

use proptest::prelude::*;

use lll_core::rational::rat;
use lll_core::types::{Event, FiniteInstance, Value, VariableSpec};
use mt_finite::{
    first_violated, parse_log, priority_ordering, solve_finite, RandomTape, Tape,
};

/// A chain of `len` k-uniform clauses, clause j on variables
/// `j*(k-1) .. j*(k-1)+k-1`, each forbidding one arbitrary tuple. With
/// x = 1/4 and at most 2 neighbors, the no-slack check holds:
/// (1/4)(3/4)^2 = 9/64 >= 2^-k for k >= 3.
fn chain_instance(len: usize, k: usize, tuples: &[Vec<Value>]) -> FiniteInstance {
    let var_count = (len * (k - 1) + 1) as u64;
    let variables: Vec<VariableSpec> = (0..var_count).map(VariableSpec::uniform_bit).collect();
    let events: Vec<Event> = (0..len)
        .map(|j| {
            let start = (j * (k - 1)) as u64;
            let vars: Vec<u64> = (start..start + k as u64).collect();
            Event::new(j as u64, vars, vec![tuples[j].clone()]).unwrap()
        })
        .collect();
    let weights: BTreeMap<_, _> = events.iter().map(|e| (e.id, rat(1, 4))).collect();
    FiniteInstance::new(variables, events, weights, rat(0, 1)).unwrap()
}

fn arb_chain() -> impl Strategy<Value = (FiniteInstance, u64)> {
    (1usize..=8, 3usize..=5)
        .prop_flat_map(|(len, k)| {
            (
                prop::collection::vec(prop::collection::vec(0u32..2, k..=k), len..=len),
                any::<u64>(),
            )
                .prop_map(move |(tuples, seed)| (chain_instance(len, k, &tuples), seed))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every success leaves no violated event.
    #[test]
    fn solver_output_satisfies_all_events((instance, seed) in arb_chain()) {
        let ordering = priority_ordering(&instance);
        let mut tape = RandomTape::new(seed);
        let (assignment, _) = solve_finite(&instance, &ordering, &mut tape, 100_000).unwrap();
        prop_assert_eq!(first_violated(&instance, &assignment, &ordering), None);
        for event in &instance.events {
            prop_assert!(!assignment.violates(event));
        }
    }

    /// (seed, ordering, instance) determine the log bit for bit.
    #[test]
    fn reruns_are_bitwise_identical((instance, seed) in arb_chain()) {
        let ordering = priority_ordering(&instance);
        let mut t1 = RandomTape::new(seed);
        let mut t2 = RandomTape::new(seed);
        let (a1, l1) = solve_finite(&instance, &ordering, &mut t1, 100_000).unwrap();
        let (a2, l2) = solve_finite(&instance, &ordering, &mut t2, 100_000).unwrap();
        prop_assert_eq!(a1, a2);
        prop_assert_eq!(l1.export(), l2.export());
        prop_assert_eq!(l1, l2);
    }

    /// Replaying the records over the initial assignment gives the final
    /// assignment, and the text form round-trips through parse_log.
    #[test]
    fn logs_replay_and_round_trip((instance, seed) in arb_chain()) {
        let ordering = priority_ordering(&instance);
        let mut tape = RandomTape::new(seed);
        let (assignment, log) = solve_finite(&instance, &ordering, &mut tape, 100_000).unwrap();
        prop_assert_eq!(log.replay(&instance).unwrap(), assignment.clone());
        prop_assert_eq!(&log.final_values, &assignment);

        let parsed = parse_log(&log.export(), &instance).unwrap();
        prop_assert_eq!(&parsed.records, &log.records);
        prop_assert_eq!(&parsed.initial_values, &log.initial_values);
        prop_assert_eq!(&parsed.final_values, &log.final_values);
    }

    /// Every record's before-tuple is forbidden, steps are numbered 1..n,
    /// and bits are accounted for exactly: initial bits plus record bits
    /// equal the tape cursor.
    #[test]
    fn records_are_wellformed_and_bits_balance((instance, seed) in arb_chain()) {
        let ordering = priority_ordering(&instance);
        let mut tape = RandomTape::new(seed);
        let (_, log) = solve_finite(&instance, &ordering, &mut tape, 100_000).unwrap();
        for (i, record) in log.records.iter().enumerate() {
            prop_assert_eq!(record.step, i as u64 + 1);
            let event = instance.event(record.event).unwrap();
            prop_assert!(event.is_forbidden(&record.values_before));
            prop_assert_eq!(record.values_after.len(), event.vars.len());
        }
        prop_assert_eq!(log.initial_bits + log.resample_bits(), tape.bits_consumed());
        // Uniform bits: the initial sample costs exactly one bit per variable.
        prop_assert_eq!(log.initial_bits, instance.variables.len() as u64);
    }

    /// The solver is sound under any permutation, not just the priority
    /// order: reversing the ordering still yields a satisfying assignment.
    #[test]
    fn reversed_ordering_is_still_sound((instance, seed) in arb_chain()) {
        let mut ordering = priority_ordering(&instance);
        ordering.reverse();
        let mut tape = RandomTape::new(seed);
        let (assignment, _) = solve_finite(&instance, &ordering, &mut tape, 100_000).unwrap();
        prop_assert_eq!(first_violated(&instance, &assignment, &ordering), None);
    }
}
