//! Staged execution over an effective instance.
//!
//! Stage `i` instantiates variables `0..=i` (lazily, each on its first
//! stage) and then runs the priority resampling loop restricted to the
//! events whose max variable is `<= i`, stopping when all of them hold.
//! Because those events form a prefix of the global (max variable, id)
//! ordering, a run of stages `0..=n` on an instance whose events all fit
//! under variable `n` performs exactly the moves of the one-shot finite
//! solver with the same tape.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use lll_core::rational::ceil_u64;
use lll_core::types::{Event, EventId, Value, VarId};
use lll_core::{ConditionRow, Rational};
use mt_finite::{sample_variable, Assignment, ExecutionLog, ResampleRecord, Tape};

use crate::error::EngineError;
use crate::instance::{effective_event_probability, EffectiveInstance, EventCertification};
use crate::ordering::order_events;

/// End-of-stage state: the values of variables `0..=stage` once every event
/// with max variable `<= stage` holds, and the total resamples so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixSnapshot {
    pub stage: VarId,
    pub values: Vec<Value>,
    pub steps_elapsed: u64,
}

/// Exact slack-form condition row for one event of an effective instance:
/// lhs is the event probability, rhs is `(1 - eps) * x(A)` times the product
/// of `(1 - x(B))` over the events sharing a variable with `A`.
pub fn condition_row(instance: &dyn EffectiveInstance, event: &Event) -> ConditionRow {
    let lhs = effective_event_probability(instance, event);
    let x = instance.weight(event.id);
    let mut rhs = (Rational::one() - instance.epsilon()) * &x;
    let mut neighbors = BTreeSet::new();
    for &var in &event.vars {
        for id in instance.events_of_variable(var) {
            if id != event.id {
                neighbors.insert(id);
            }
        }
    }
    for nbr in neighbors {
        rhs *= Rational::one() - instance.weight(nbr);
    }
    let slack = &rhs - &lhs;
    let pass = slack >= Rational::zero();
    ConditionRow {
        event: event.id,
        lhs,
        rhs,
        slack,
        pass,
    }
}

/// Incremental stage executor. Owns the tape and the growing assignment;
/// stages must be run in order `0, 1, 2, ...`.
pub struct StagedRunner<'a, T: Tape> {
    instance: &'a dyn EffectiveInstance,
    tape: T,
    /// Current values of variables `0..values.len()` (dense).
    values: Vec<Value>,
    /// First-sample value of each variable, untouched by resampling.
    initial: Vec<Value>,
    initial_bits: u64,
    records: Vec<ResampleRecord>,
    ordering: Vec<EventId>,
    /// `defs[k]` is the definition of `ordering[k]`.
    defs: Vec<Event>,
    next_stage: VarId,
    condition_failures: Vec<ConditionRow>,
    check_conditions: bool,
    budget_override: Option<u64>,
}

impl<'a, T: Tape> StagedRunner<'a, T> {
    pub fn new(instance: &'a dyn EffectiveInstance, tape: T) -> Self {
        StagedRunner {
            instance,
            tape,
            values: Vec::new(),
            initial: Vec::new(),
            initial_bits: 0,
            records: Vec::new(),
            ordering: Vec::new(),
            defs: Vec::new(),
            next_stage: 0,
            condition_failures: Vec::new(),
            check_conditions: true,
            budget_override: None,
        }
    }

    /// Disable the per-event condition diagnostics. Used by machines that
    /// replay the same instance many times (exact enumeration, monte-carlo
    /// replicas), where the diagnostics of one real run already cover every
    /// event.
    pub fn with_condition_checks(mut self, check: bool) -> Self {
        self.check_conditions = check;
        self
    }

    /// Replace the default per-stage resample budget (100 times the expected
    /// total through this stage, at least 10^4).
    pub fn with_stage_budget(mut self, budget: u64) -> Self {
        self.budget_override = Some(budget);
        self
    }

    /// Run stage `stage` (which must be `next_stage`): instantiate variables
    /// through `stage` in ascending index order, extend the event ordering,
    /// and resample until no event with max variable `<= stage` is violated.
    ///
    /// Events whose exact condition row fails are recorded in
    /// [`condition_failures`](Self::condition_failures) rather than aborting
    /// the run: the stage loop is well-defined for any instance, and the
    /// per-stage budget is the safety net when the condition's convergence
    /// guarantee is absent.
    pub fn run_stage(&mut self, stage: VarId) -> Result<PrefixSnapshot, EngineError> {
        if stage != self.next_stage {
            return Err(EngineError::Invalid(format!(
                "stages must run in order: expected stage {}, got {stage}",
                self.next_stage
            )));
        }
        while (self.values.len() as VarId) <= stage {
            let var = self.values.len() as VarId;
            let spec = self.instance.variable_spec(var);
            let before = self.tape.bits_consumed();
            let value = sample_variable(&spec, &mut self.tape)?;
            self.initial_bits += self.tape.bits_consumed() - before;
            self.values.push(value);
            self.initial.push(value);
        }
        self.extend_ordering(stage)?;
        let budget = self.stage_budget(stage);
        let mut steps_this_stage = 0u64;
        while let Some(pos) = self.first_violated() {
            if steps_this_stage == budget {
                return Err(EngineError::StageBudgetExhausted { stage, budget });
            }
            self.resample(pos)?;
            steps_this_stage += 1;
        }
        self.next_stage = stage + 1;
        Ok(PrefixSnapshot {
            stage,
            values: self.values[..=stage as usize].to_vec(),
            steps_elapsed: self.records.len() as u64,
        })
    }

    fn extend_ordering(&mut self, stage: VarId) -> Result<(), EngineError> {
        let ordering = order_events(self.instance, stage)?;
        if ordering.ids.len() < self.ordering.len()
            || ordering.ids[..self.ordering.len()] != self.ordering[..]
        {
            return Err(EngineError::Inconsistent(format!(
                "ordering up to variable {stage} does not extend the previous stage's ordering"
            )));
        }
        for &id in &ordering.ids[self.ordering.len()..] {
            let event = self.instance.event_def(id);
            if self.check_conditions {
                if let EventCertification::CheckExactly = self.instance.certify_event(id) {
                    let row = condition_row(self.instance, &event);
                    if !row.pass {
                        self.condition_failures.push(row);
                    }
                }
            }
            self.ordering.push(id);
            self.defs.push(event);
        }
        Ok(())
    }

    fn stage_budget(&self, stage: VarId) -> u64 {
        match self.budget_override {
            Some(budget) => budget,
            None => {
                let expected = self.instance.prefix_weight_bound(stage);
                ceil_u64(&(expected * Rational::from_integer(100.into()))).max(10_000)
            }
        }
    }

    fn first_violated(&self) -> Option<usize> {
        self.defs.iter().position(|event| {
            event.forbidden.iter().any(|tuple| {
                event
                    .vars
                    .iter()
                    .zip(tuple)
                    .all(|(&var, &v)| self.values[var as usize] == v)
            })
        })
    }

    fn resample(&mut self, pos: usize) -> Result<(), EngineError> {
        let id = self.ordering[pos];
        let vars = self.defs[pos].vars.clone();
        let values_before: Vec<Value> = vars.iter().map(|&v| self.values[v as usize]).collect();
        let bits_before = self.tape.bits_consumed();
        let mut values_after = Vec::with_capacity(vars.len());
        for &var in &vars {
            let spec = self.instance.variable_spec(var);
            let value = sample_variable(&spec, &mut self.tape)?;
            self.values[var as usize] = value;
            values_after.push(value);
        }
        self.records.push(ResampleRecord {
            step: self.records.len() as u64 + 1,
            event: id,
            values_before,
            values_after,
            bits_consumed: self.tape.bits_consumed() - bits_before,
        });
        Ok(())
    }

    /// Current values of all instantiated variables, dense from index 0.
    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, var: VarId) -> Option<Value> {
        self.values.get(var as usize).copied()
    }

    /// Current state as a map-backed assignment.
    pub fn assignment(&self) -> Assignment {
        let mut assignment = Assignment::new();
        for (var, &value) in self.values.iter().enumerate() {
            assignment.set(var as VarId, value);
        }
        assignment
    }

    pub fn steps(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn records(&self) -> &[ResampleRecord] {
        &self.records
    }

    pub fn ordering(&self) -> &[EventId] {
        &self.ordering
    }

    /// The next stage index `run_stage` will accept.
    pub fn next_stage(&self) -> VarId {
        self.next_stage
    }

    /// Exact condition rows that failed among the events certified as
    /// `CheckExactly`, in introduction order.
    pub fn condition_failures(&self) -> &[ConditionRow] {
        &self.condition_failures
    }

    pub fn bits_consumed(&self) -> u64 {
        self.tape.bits_consumed()
    }

    pub fn instance(&self) -> &'a dyn EffectiveInstance {
        self.instance
    }

    /// The run history in the finite solver's log format: initial sample,
    /// resample records, current values.
    pub fn log(&self) -> ExecutionLog {
        let mut initial = Assignment::new();
        for (var, &value) in self.initial.iter().enumerate() {
            initial.set(var as VarId, value);
        }
        ExecutionLog {
            initial_values: initial,
            records: self.records.clone(),
            final_values: self.assignment(),
            initial_bits: self.initial_bits,
        }
    }
}

/// Run stages `0..=upto` from a fresh state. Returns the runner (for its log
/// and final values) together with one snapshot per stage; the snapshots'
/// `steps_elapsed` is nondecreasing.
pub fn run_stages<T: Tape>(
    instance: &dyn EffectiveInstance,
    tape: T,
    upto: VarId,
) -> Result<(StagedRunner<'_, T>, Vec<PrefixSnapshot>), EngineError> {
    let mut runner = StagedRunner::new(instance, tape);
    let mut snapshots = Vec::with_capacity(upto as usize + 1);
    for stage in 0..=upto {
        snapshots.push(runner.run_stage(stage)?);
    }
    Ok((runner, snapshots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::FiniteAsEffective;
    use lll_core::rational::rat;
    use lll_core::types::{FiniteInstance, VariableSpec};
    use mt_finite::{priority_ordering, solve_finite, RandomTape, ScriptTape};
    use std::collections::BTreeMap;

    fn uniform_bits(n: u64) -> Vec<VariableSpec> {
        (0..n).map(VariableSpec::uniform_bit).collect()
    }

    fn effective(
        variables: u64,
        events: Vec<Event>,
        x: Rational,
        epsilon: Rational,
    ) -> FiniteAsEffective {
        let weights: BTreeMap<_, _> = events.iter().map(|e| (e.id, x.clone())).collect();
        FiniteAsEffective::new(
            FiniteInstance::new(uniform_bits(variables), events, weights, epsilon).unwrap(),
        )
    }

    #[test]
    fn eventless_stages_sample_lazily() {
        let eff = effective(0, vec![], rat(1, 2), rat(0, 1));
        let tape = ScriptTape::new(vec![true, false, true]);
        let (runner, snapshots) = run_stages(&eff, tape, 2).unwrap();
        assert_eq!(snapshots.len(), 3);
        assert_eq!(snapshots[0].values, vec![1]);
        assert_eq!(snapshots[1].values, vec![1, 0]);
        assert_eq!(snapshots[2].values, vec![1, 0, 1]);
        assert!(snapshots.iter().all(|s| s.steps_elapsed == 0));
        assert_eq!(runner.bits_consumed(), 3);
        assert_eq!(runner.log().initial_bits, 3);
    }

    #[test]
    fn stages_must_run_in_order() {
        let eff = effective(0, vec![], rat(1, 2), rat(0, 1));
        let mut runner = StagedRunner::new(&eff, ScriptTape::new(vec![true; 4]));
        let err = runner.run_stage(1).unwrap_err();
        assert!(err.to_string().contains("expected stage 0"));
        runner.run_stage(0).unwrap();
        assert!(runner.run_stage(0).is_err());
        assert_eq!(runner.next_stage(), 1);
    }

    #[test]
    fn violated_event_is_resampled_when_it_materializes() {
        let event = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let eff = effective(2, vec![event], rat(1, 4), rat(0, 1));
        let tape = ScriptTape::new(vec![false, false, true, true]);
        let (runner, snapshots) = run_stages(&eff, tape, 1).unwrap();
        // Stage 0 has no events (the event's max variable is 1).
        assert_eq!(snapshots[0].values, vec![0]);
        assert_eq!(snapshots[0].steps_elapsed, 0);
        // Stage 1 sees (0,0), resamples once to (1,1).
        assert_eq!(snapshots[1].values, vec![1, 1]);
        assert_eq!(snapshots[1].steps_elapsed, 1);
        let records = runner.records();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].event, 0);
        assert_eq!(records[0].values_before, vec![0, 0]);
        assert_eq!(records[0].values_after, vec![1, 1]);
        assert_eq!(records[0].bits_consumed, 2);
    }

    #[test]
    fn stage_budget_exhaustion_is_reported() {
        let event = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let eff = effective(2, vec![event], rat(1, 4), rat(0, 1));
        // Every redraw produces (0,0) again.
        let tape = ScriptTape::new(vec![false; 16]);
        let mut runner = StagedRunner::new(&eff, tape).with_stage_budget(1);
        runner.run_stage(0).unwrap();
        match runner.run_stage(1) {
            Err(EngineError::StageBudgetExhausted { stage, budget }) => {
                assert_eq!(stage, 1);
                assert_eq!(budget, 1);
            }
            other => panic!("expected stage budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn failing_condition_rows_are_diagnostics_not_errors() {
        // Two events on the same pair with x = 3/10: each sees one neighbor,
        // rhs = (3/10)(7/10) = 21/100 < 1/4 = lhs, so both rows fail; the
        // run itself still converges (two of the four tuples are allowed).
        let e0 = Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap();
        let e1 = Event::new(1, vec![0, 1], vec![vec![1, 1]]).unwrap();
        let eff = effective(2, vec![e0, e1], rat(3, 10), rat(0, 1));
        let (runner, snapshots) = run_stages(&eff, RandomTape::new(7), 1).unwrap();
        let failures = runner.condition_failures();
        assert_eq!(failures.len(), 2);
        assert_eq!(failures[0].lhs, rat(1, 4));
        assert_eq!(failures[0].rhs, rat(21, 100));
        let last = snapshots.last().unwrap();
        assert_ne!(last.values, vec![0, 0]);
        assert_ne!(last.values, vec![1, 1]);
    }

    #[test]
    fn condition_row_matches_finite_checker() {
        // Chain clause with slack: middle clause of the stride-3 chain has
        // two neighbors, rhs = (9/10)(1/4)(3/4)^2 = 81/640.
        let clauses: Vec<Event> = (0..3)
            .map(|k| {
                Event::new(k, (3 * k..=3 * k + 3).collect(), vec![vec![0, 0, 0, 0]]).unwrap()
            })
            .collect();
        let eff = effective(10, clauses, rat(1, 4), rat(1, 10));
        let middle = eff.event_def(1);
        let row = condition_row(&eff, &middle);
        assert_eq!(row.lhs, rat(1, 16));
        assert_eq!(row.rhs, rat(81, 640));
        assert!(row.pass);
    }

    #[test]
    fn degenerate_runs_match_the_finite_solver() {
        // All events fit under variable 5, so stages 0..=5 must reproduce
        // the one-shot solver's log bit for bit.
        let e0 = Event::new(0, vec![0, 1, 2], vec![vec![0, 0, 0]]).unwrap();
        let e1 = Event::new(1, vec![2, 3, 4], vec![vec![1, 1, 1]]).unwrap();
        let e2 = Event::new(2, vec![4, 5], vec![vec![0, 1]]).unwrap();
        let weights: BTreeMap<_, _> = [(0, rat(1, 4)), (1, rat(3, 10)), (2, rat(2, 5))].into();
        let instance =
            FiniteInstance::new(uniform_bits(6), vec![e0, e1, e2], weights, rat(0, 1)).unwrap();
        let eff = FiniteAsEffective::new(instance.clone());
        let ordering = priority_ordering(&instance);
        for seed in 0..25 {
            let mut finite_tape = RandomTape::new(seed);
            let (finite_state, finite_log) =
                solve_finite(&instance, &ordering, &mut finite_tape, 100_000).unwrap();
            let (runner, snapshots) = run_stages(&eff, RandomTape::new(seed), 5).unwrap();
            assert_eq!(runner.log(), finite_log, "seed {seed}");
            assert_eq!(runner.assignment(), finite_state, "seed {seed}");
            assert_eq!(
                snapshots.last().unwrap().steps_elapsed,
                finite_log.records.len() as u64
            );
        }
    }
}
