//! The finite resampling solver.

use num_traits::{One, Zero};

use lll_core::rational::{ceil_u64, Rational};
use lll_core::types::{EventId, FiniteInstance};
use lll_core::{build_dependency_graph, check_lll};

use crate::assignment::Assignment;
use crate::error::MtError;
use crate::log::{ExecutionLog, ResampleRecord};
use crate::sampler::sample_variable;
use crate::tape::Tape;

/// The deterministic priority order used throughout: events sorted by
/// (largest variable index, event id). The staged engine extends exactly
/// this order as new variables appear, which is what makes staged and
/// one-shot runs comparable.
pub fn priority_ordering(instance: &FiniteInstance) -> Vec<EventId> {
    let mut ids: Vec<EventId> = instance.event_ids();
    ids.sort_by_key(|&id| {
        let e = instance.event(id).expect("own event id");
        (e.max_var(), e.id)
    });
    ids
}

/// Default resample budget: 100 times the expected-resample bound
/// `sum_A x(A)/(1-x(A))`, clamped to at least 10^4.
pub fn default_budget(instance: &FiniteInstance) -> u64 {
    let mut bound = Rational::zero();
    for event in &instance.events {
        let x = &instance.weights[&event.id];
        bound += x / (Rational::one() - x);
    }
    ceil_u64(&(bound * Rational::from_integer(100.into()))).max(10_000)
}

/// Sample every variable in increasing index order.
pub fn sample_initial(
    instance: &FiniteInstance,
    tape: &mut dyn Tape,
) -> Result<Assignment, MtError> {
    let mut assignment = Assignment::new();
    for spec in &instance.variables {
        let value = sample_variable(spec, tape)?;
        assignment.set(spec.index, value);
    }
    Ok(assignment)
}

/// The earliest event in `ordering` whose local tuple is forbidden, or
/// `None` when every event is satisfied. Events with unassigned variables
/// are treated as not violated.
pub fn first_violated(
    instance: &FiniteInstance,
    assignment: &Assignment,
    ordering: &[EventId],
) -> Option<EventId> {
    ordering.iter().copied().find(|&id| {
        instance
            .event(id)
            .is_some_and(|event| assignment.violates(event))
    })
}

fn validate_ordering(instance: &FiniteInstance, ordering: &[EventId]) -> Result<(), MtError> {
    let mut sorted = ordering.to_vec();
    sorted.sort_unstable();
    if sorted != instance.event_ids() {
        return Err(MtError::InvalidOrdering(format!(
            "got {} ids for {} events",
            ordering.len(),
            instance.events.len()
        )));
    }
    Ok(())
}

/// Run the resampling algorithm to completion.
///
/// Samples all variables, then repeatedly replaces the first violated event
/// (in `ordering`) by redrawing its variables in increasing index order with
/// fresh tape bits. Requires the no-slack condition check to pass; fails
/// with the offending [`lll_core::ConditionReport`] otherwise. Stops with
/// [`MtError::BudgetExhausted`] (carrying the log so far) after `max_steps`
/// resamples.
pub fn solve_finite(
    instance: &FiniteInstance,
    ordering: &[EventId],
    tape: &mut dyn Tape,
    max_steps: u64,
) -> Result<(Assignment, ExecutionLog), MtError> {
    validate_ordering(instance, ordering)?;
    if max_steps == 0 {
        return Err(MtError::Invalid("max_steps must be positive".into()));
    }
    let graph = build_dependency_graph(instance);
    let report = check_lll(instance, &graph, false)?;
    if !report.pass {
        return Err(MtError::ConditionFailed(Box::new(report)));
    }

    let bits_at_start = tape.bits_consumed();
    let assignment = sample_initial(instance, tape)?;
    let initial_bits = tape.bits_consumed() - bits_at_start;
    let mut state = assignment.clone();
    let mut records: Vec<ResampleRecord> = Vec::new();

    loop {
        let Some(id) = first_violated(instance, &state, ordering) else {
            let log = ExecutionLog {
                initial_values: assignment,
                records,
                final_values: state.clone(),
                initial_bits,
            };
            return Ok((state, log));
        };
        if records.len() as u64 == max_steps {
            return Err(MtError::BudgetExhausted(Box::new(ExecutionLog {
                initial_values: assignment,
                records,
                final_values: state,
                initial_bits,
            })));
        }
        let event = instance.event(id).expect("validated ordering");
        let values_before = state
            .local_tuple(&event.vars)
            .expect("violated events are fully assigned");
        let bits_before = tape.bits_consumed();
        let mut values_after = Vec::with_capacity(event.vars.len());
        for &var in &event.vars {
            let spec = instance.variable(var).expect("validated instance");
            let value = sample_variable(spec, tape)?;
            state.set(var, value);
            values_after.push(value);
        }
        records.push(ResampleRecord {
            step: records.len() as u64 + 1,
            event: id,
            values_before,
            values_after,
            bits_consumed: tape.bits_consumed() - bits_before,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{RandomTape, ScriptTape};
    use lll_core::rational::rat;
    use lll_core::types::{Event, VariableSpec};
    use std::collections::BTreeMap;

    fn uniform_bits(n: u64) -> Vec<VariableSpec> {
        (0..n).map(VariableSpec::uniform_bit).collect()
    }

    fn instance_or(variables: u64, events: Vec<Event>, x: lll_core::Rational) -> FiniteInstance {
        let weights: BTreeMap<_, _> = events.iter().map(|e| (e.id, x.clone())).collect();
        FiniteInstance::new(uniform_bits(variables), events, weights, rat(0, 1)).unwrap()
    }

    #[test]
    fn empty_instance_returns_initial_sample() {
        let instance = instance_or(0, vec![], rat(1, 2));
        let mut tape = RandomTape::new(1);
        let (assignment, log) = solve_finite(&instance, &[], &mut tape, 10).unwrap();
        assert!(assignment.is_empty());
        assert!(log.records.is_empty());
        assert_eq!(log.initial_bits, 0);
    }

    #[test]
    fn forced_two_bit_example() {
        // Two uniform bits, tape bits 1,0 -> values (1,0); no violation since
        // the clause forbids (0,0).
        let event = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(2, vec![event], rat(1, 4));
        let mut tape = ScriptTape::new(vec![true, false]);
        let (assignment, log) = solve_finite(&instance, &[0], &mut tape, 10).unwrap();
        assert_eq!(assignment.get(0), Some(1));
        assert_eq!(assignment.get(1), Some(0));
        assert!(log.records.is_empty());
        assert_eq!(log.initial_bits, 2);
    }

    #[test]
    fn ordering_respected_when_both_violated() {
        // Events 0 and 1 both forbid the all-zero start; ordering (1, 0)
        // must resample event 1 first.
        let e0 = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let e1 = Event::new(1, vec![2, 3], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(4, vec![e0, e1], rat(1, 4));
        // Initial bits all zero, then ones for every redraw.
        let mut tape = ScriptTape::new(vec![false, false, false, false, true, true, true, true]);
        let (_, log) = solve_finite(&instance, &[1, 0], &mut tape, 10).unwrap();
        assert_eq!(log.records[0].event, 1);
        assert_eq!(log.records[1].event, 0);
    }

    #[test]
    fn first_violated_examples() {
        let e0 = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(2, vec![e0], rat(1, 4));
        let mut sat = Assignment::new();
        sat.set(0, 1);
        sat.set(1, 0);
        assert_eq!(first_violated(&instance, &sat, &[0]), None);
        let mut unsat = Assignment::new();
        unsat.set(0, 0);
        unsat.set(1, 0);
        assert_eq!(first_violated(&instance, &unsat, &[0]), Some(0));
    }

    #[test]
    fn two_clause_cnf_forces_x1_true() {
        // (x0 or x1) and (not x0 or x1): every satisfying assignment has
        // x1 = 1 (brute force over the 4 assignments confirms).
        // With both clauses on the same two variables each sees one
        // neighbor, so the no-slack check needs x(1-x) >= 1/4: take x = 1/2,
        // which passes with equality.
        let c0 = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let c1 = Event::new(1, vec![0, 1], vec![vec![1, 0]]).unwrap();
        let instance = instance_or(2, vec![c0, c1], rat(1, 2));
        let satisfying: Vec<(u32, u32)> = (0..4)
            .map(|m| (m & 1, m >> 1))
            .filter(|&(a, b)| {
                let mut s = Assignment::new();
                s.set(0, a);
                s.set(1, b);
                !instance.events.iter().any(|e| s.violates(e))
            })
            .collect();
        assert!(satisfying.iter().all(|&(_, b)| b == 1));
        for seed in 0..50 {
            let mut tape = RandomTape::new(seed);
            let ordering = priority_ordering(&instance);
            let (assignment, log) = solve_finite(&instance, &ordering, &mut tape, 10_000).unwrap();
            assert_eq!(assignment.get(1), Some(1));
            assert_eq!(log.replay(&instance).unwrap(), assignment);
        }
    }

    #[test]
    fn rerun_with_same_seed_reproduces_log() {
        let c0 = Event::new(0, vec![0, 1, 2], vec![vec![0, 0, 0]]).unwrap();
        let c1 = Event::new(1, vec![2, 3, 4], vec![vec![1, 1, 1]]).unwrap();
        let instance = instance_or(5, vec![c0, c1], rat(1, 4));
        let ordering = priority_ordering(&instance);
        let mut t1 = RandomTape::new(33);
        let mut t2 = RandomTape::new(33);
        let (a1, l1) = solve_finite(&instance, &ordering, &mut t1, 10_000).unwrap();
        let (a2, l2) = solve_finite(&instance, &ordering, &mut t2, 10_000).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(l1, l2);
        assert_eq!(l1.export(), l2.export());
    }

    #[test]
    fn budget_exhaustion_returns_partial_log() {
        // A two-bit event forbidding 3 of 4 tuples: x = 7/8 gives a passing
        // no-slack check (3/4 <= 7/8 with no neighbors), but reaching the
        // single allowed tuple can take more than one resample; budget 1
        // forces exhaustion on seeds whose second sample still violates.
        let event =
            Event::new(0, vec![0, 1], vec![vec![0, 0], vec![0, 1], vec![1, 0]]).unwrap();
        let instance = instance_or(2, vec![event], rat(7, 8));
        let mut hit = false;
        for seed in 0..200 {
            let mut tape = RandomTape::new(seed);
            match solve_finite(&instance, &[0], &mut tape, 1) {
                Ok(_) => {}
                Err(MtError::BudgetExhausted(log)) => {
                    assert_eq!(log.records.len(), 1);
                    hit = true;
                }
                Err(other) => panic!("unexpected error {other}"),
            }
        }
        assert!(hit, "no seed exhausted a budget of 1");
    }

    #[test]
    fn failing_condition_is_reported() {
        // Forbid (0,0) on each pair of a triangle with weight 1/2 each and
        // probability 1/4: rhs = (1/2)(1/2)^2 = 1/8 < 1/4.
        let e01 = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let e12 = Event::new(1, vec![1, 2], vec![vec![0, 0]]).unwrap();
        let e02 = Event::new(2, vec![0, 2], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(3, vec![e01, e12, e02], rat(1, 2));
        let mut tape = RandomTape::new(5);
        match solve_finite(&instance, &[0, 1, 2], &mut tape, 100) {
            Err(MtError::ConditionFailed(report)) => {
                assert!(report.rows.iter().all(|r| !r.pass));
            }
            other => panic!("expected condition failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_ordering() {
        let event = Event::new(0, vec![0], vec![vec![0]]).unwrap();
        let instance = instance_or(1, vec![event], rat(1, 2));
        let mut tape = RandomTape::new(0);
        assert!(matches!(
            solve_finite(&instance, &[0, 0], &mut tape, 10),
            Err(MtError::InvalidOrdering(_))
        ));
        let mut tape = RandomTape::new(0);
        assert!(matches!(
            solve_finite(&instance, &[], &mut tape, 10),
            Err(MtError::InvalidOrdering(_))
        ));
    }

    #[test]
    fn default_budget_is_clamped() {
        let event = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(2, vec![event], rat(1, 4));
        // 100 * (1/3) rounds up to 34, clamped to 10^4.
        assert_eq!(default_budget(&instance), 10_000);
    }

    #[test]
    fn priority_order_sorts_by_max_var_then_id() {
        let e0 = Event::new(0, vec![0, 9], vec![vec![0, 0]]).unwrap();
        let e1 = Event::new(1, vec![1, 2], vec![vec![0, 0]]).unwrap();
        let e2 = Event::new(2, vec![2, 9], vec![vec![0, 0]]).unwrap();
        let instance = instance_or(10, vec![e0, e1, e2], rat(1, 8));
        assert_eq!(priority_ordering(&instance), vec![1, 0, 2]);
    }
}
