//! Effective instances: countable variable/event families presented by
//! computable enumerators.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use lll_core::types::{Event, EventId, FiniteInstance, VarId, VariableSpec};
use lll_core::Rational;
use mt_finite::Assignment;

/// How the engine should validate one queried event against the
/// local-lemma condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventCertification {
    /// Compute the event's condition row exactly on the induced finite
    /// sub-instance (probability vs. weight times neighbor product).
    CheckExactly,
    /// The instance construction carries a once-verified closed-form proof
    /// covering this event; skip the per-event row. Used by the generated
    /// clause families, whose neighbor products have too many factors to
    /// recompute per event.
    FamilyProof,
}

/// A sound rule deciding that the values of variables `0..=s` can never
/// change again, given a state in which every event with max variable
/// `<= stage` is satisfied.
///
/// Rules must only answer `true` when the claim holds for every possible
/// continuation of the run (any future tape bits). The engine's exact and
/// certified extraction modes treat `true` as a proof.
pub trait CertificateRule {
    fn prefix_frozen(
        &self,
        instance: &dyn EffectiveInstance,
        s: VarId,
        stage: VarId,
        assignment: &Assignment,
    ) -> bool;
}

/// A countable instance given by computable enumerators. Variables are
/// indexed 0, 1, 2, ...; each variable belongs to finitely many events, and
/// `events_of_variable` lists them.
///
/// Contract (holds for all built-in instances; `ConsistencyChecked` enforces
/// it in tests): `j ∈ events_of_variable(i)` iff `i ∈ event_def(j).vars`;
/// enumerators are pure (same query, same answer) and safe to query
/// concurrently; `weight` returns values in (0,1); queried ids come from the
/// enumerators (unknown ids may panic).
pub trait EffectiveInstance {
    fn variable_spec(&self, var: VarId) -> VariableSpec;

    /// Sorted, finite list of the events whose (possibly trimmed) variable
    /// set contains `var`.
    fn events_of_variable(&self, var: VarId) -> Vec<EventId>;

    fn event_def(&self, id: EventId) -> Event;

    fn weight(&self, id: EventId) -> Rational;

    fn epsilon(&self) -> Rational;

    /// All events with max variable `<= max_var`, sorted by
    /// (max variable, id). The default enumerates via `events_of_variable`;
    /// families override it with direct enumeration when that is cheaper.
    fn events_upto(&self, max_var: VarId) -> Vec<EventId> {
        let mut seen = BTreeSet::new();
        let mut found: Vec<(VarId, EventId)> = Vec::new();
        for var in 0..=max_var {
            for id in self.events_of_variable(var) {
                if seen.insert(id) {
                    let event = self.event_def(id);
                    if event.max_var() <= max_var {
                        found.push((event.max_var(), id));
                    }
                }
            }
        }
        found.sort_unstable();
        found.into_iter().map(|(_, id)| id).collect()
    }

    /// Upper bound on `sum over events containing var of x/(1-x)`. The
    /// default computes the sum exactly.
    fn var_weight_bound(&self, var: VarId) -> Rational {
        self.events_of_variable(var)
            .into_iter()
            .map(|id| {
                let x = self.weight(id);
                &x / (Rational::one() - &x)
            })
            .sum()
    }

    /// Upper bound on `sum over events with max variable <= max_var of
    /// x/(1-x)` (the expected total resamples through stage `max_var`). The
    /// default computes the sum exactly; families override with a closed
    /// form. Any sound upper bound is valid: it feeds stage budgets and
    /// stabilization step counts, both of which stay correct when enlarged.
    fn prefix_weight_bound(&self, max_var: VarId) -> Rational {
        self.events_upto(max_var)
            .into_iter()
            .map(|id| {
                let x = self.weight(id);
                &x / (Rational::one() - &x)
            })
            .sum()
    }

    fn certify_event(&self, _id: EventId) -> EventCertification {
        EventCertification::CheckExactly
    }

    /// A stabilization certificate rule specific to this instance, if any.
    /// `None` means the engine's generic freeze certificate is used.
    fn certificate(&self) -> Option<&dyn CertificateRule> {
        None
    }
}

/// Probability of `event` under the product measure given by the instance's
/// variable specs: the sum over forbidden tuples of the per-variable value
/// probabilities.
pub fn effective_event_probability(instance: &dyn EffectiveInstance, event: &Event) -> Rational {
    use num_traits::Zero;
    let specs: Vec<VariableSpec> = event
        .vars
        .iter()
        .map(|&v| instance.variable_spec(v))
        .collect();
    let mut total = Rational::zero();
    for tuple in &event.forbidden {
        let mut mass = Rational::one();
        for (k, spec) in specs.iter().enumerate() {
            mass *= &spec.distribution[tuple[k] as usize];
        }
        total += mass;
    }
    total
}

/// A finite instance viewed as an effective one: variables beyond the
/// declared range are padded as fresh uniform bits belonging to no event, so
/// every stage index is valid.
pub struct FiniteAsEffective {
    instance: FiniteInstance,
    by_var: BTreeMap<VarId, Vec<EventId>>,
}

impl FiniteAsEffective {
    pub fn new(instance: FiniteInstance) -> Self {
        let mut by_var: BTreeMap<VarId, Vec<EventId>> = BTreeMap::new();
        for event in &instance.events {
            for &var in &event.vars {
                by_var.entry(var).or_default().push(event.id);
            }
        }
        FiniteAsEffective { instance, by_var }
    }

    pub fn inner(&self) -> &FiniteInstance {
        &self.instance
    }
}

impl EffectiveInstance for FiniteAsEffective {
    fn variable_spec(&self, var: VarId) -> VariableSpec {
        match self.instance.variable(var) {
            Some(spec) => spec.clone(),
            None => VariableSpec::uniform_bit(var),
        }
    }

    fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
        self.by_var.get(&var).cloned().unwrap_or_default()
    }

    fn event_def(&self, id: EventId) -> Event {
        self.instance
            .event(id)
            .unwrap_or_else(|| panic!("unknown event id {id}"))
            .clone()
    }

    fn weight(&self, id: EventId) -> Rational {
        self.instance
            .weight(id)
            .unwrap_or_else(|| panic!("unknown event id {id}"))
            .clone()
    }

    fn epsilon(&self) -> Rational {
        self.instance.epsilon.clone()
    }
}

/// Test wrapper enforcing the enumerator contract on every query: each
/// event listed for a variable must contain it, and each variable of a
/// queried event must list the event. Panics with a diagnostic on violation.
pub struct ConsistencyChecked<I: EffectiveInstance>(pub I);

impl<I: EffectiveInstance> EffectiveInstance for ConsistencyChecked<I> {
    fn variable_spec(&self, var: VarId) -> VariableSpec {
        let spec = self.0.variable_spec(var);
        assert_eq!(spec.index, var, "variable_spec({var}) returned wrong index");
        spec.validate().expect("variable_spec returned invalid spec");
        spec
    }

    fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
        let ids = self.0.events_of_variable(var);
        assert!(
            ids.windows(2).all(|w| w[0] < w[1]),
            "events_of_variable({var}) not sorted/unique"
        );
        for &id in &ids {
            let event = self.0.event_def(id);
            assert!(
                event.vars.contains(&var),
                "event {id} listed for variable {var} but does not contain it"
            );
        }
        ids
    }

    fn event_def(&self, id: EventId) -> Event {
        let event = self.0.event_def(id);
        assert_eq!(event.id, id, "event_def({id}) returned wrong id");
        for &var in &event.vars {
            assert!(
                self.0.events_of_variable(var).contains(&id),
                "event {id} contains variable {var} but is not listed for it"
            );
        }
        event
    }

    fn weight(&self, id: EventId) -> Rational {
        let x = self.0.weight(id);
        assert!(
            x > Rational::from_integer(0.into()) && x < Rational::one(),
            "weight({id}) = {x} outside (0,1)"
        );
        x
    }

    fn epsilon(&self) -> Rational {
        self.0.epsilon()
    }

    fn events_upto(&self, max_var: VarId) -> Vec<EventId> {
        let ids = self.0.events_upto(max_var);
        for &id in &ids {
            let event = self.0.event_def(id);
            assert!(
                event.max_var() <= max_var,
                "events_upto({max_var}) listed event {id} with max variable {}",
                event.max_var()
            );
        }
        ids
    }

    fn var_weight_bound(&self, var: VarId) -> Rational {
        let bound = self.0.var_weight_bound(var);
        let exact: Rational = self
            .events_of_variable(var)
            .into_iter()
            .map(|id| {
                let x = self.weight(id);
                &x / (Rational::one() - &x)
            })
            .sum();
        assert!(
            bound >= exact,
            "var_weight_bound({var}) = {bound} below the exact sum {exact}"
        );
        bound
    }

    fn prefix_weight_bound(&self, max_var: VarId) -> Rational {
        let bound = self.0.prefix_weight_bound(max_var);
        let exact: Rational = self
            .events_upto(max_var)
            .into_iter()
            .map(|id| {
                let x = self.weight(id);
                &x / (Rational::one() - &x)
            })
            .sum();
        assert!(
            bound >= exact,
            "prefix_weight_bound({max_var}) = {bound} below the exact sum {exact}"
        );
        bound
    }

    fn certify_event(&self, id: EventId) -> EventCertification {
        self.0.certify_event(id)
    }

    fn certificate(&self) -> Option<&dyn CertificateRule> {
        self.0.certificate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lll_core::rational::rat;

    fn small_finite() -> FiniteInstance {
        let variables: Vec<VariableSpec> = (0..4).map(VariableSpec::uniform_bit).collect();
        let events = vec![
            Event::new(0, vec![0, 1], vec![vec![0, 0]]).unwrap(),
            Event::new(1, vec![1, 2, 3], vec![vec![1, 1, 1]]).unwrap(),
        ];
        let weights = events.iter().map(|e| (e.id, rat(1, 4))).collect();
        FiniteInstance::new(variables, events, weights, rat(1, 10)).unwrap()
    }

    #[test]
    fn finite_wrapper_pads_variables() {
        let eff = FiniteAsEffective::new(small_finite());
        assert_eq!(eff.variable_spec(2).range_size, 2);
        let padded = eff.variable_spec(100);
        assert_eq!(padded.index, 100);
        assert_eq!(padded.range_size, 2);
        assert!(eff.events_of_variable(100).is_empty());
    }

    #[test]
    fn finite_wrapper_maps_events() {
        let eff = FiniteAsEffective::new(small_finite());
        assert_eq!(eff.events_of_variable(1), vec![0, 1]);
        assert_eq!(eff.events_of_variable(0), vec![0]);
        assert_eq!(eff.event_def(1).vars, vec![1, 2, 3]);
        assert_eq!(eff.weight(0), rat(1, 4));
        assert_eq!(eff.epsilon(), rat(1, 10));
    }

    #[test]
    fn default_events_upto_filters_and_sorts() {
        let eff = FiniteAsEffective::new(small_finite());
        assert_eq!(eff.events_upto(0), Vec::<EventId>::new());
        assert_eq!(eff.events_upto(1), vec![0]);
        assert_eq!(eff.events_upto(3), vec![0, 1]);
    }

    #[test]
    fn default_weight_bounds_sum_exactly() {
        let eff = FiniteAsEffective::new(small_finite());
        // Variable 1 is in both events: 2 * (1/4)/(3/4) = 2/3.
        assert_eq!(eff.var_weight_bound(1), rat(2, 3));
        assert_eq!(eff.prefix_weight_bound(1), rat(1, 3));
        assert_eq!(eff.prefix_weight_bound(3), rat(2, 3));
    }

    #[test]
    fn consistency_wrapper_accepts_valid_instance() {
        let eff = ConsistencyChecked(FiniteAsEffective::new(small_finite()));
        assert_eq!(eff.events_of_variable(1), vec![0, 1]);
        assert_eq!(eff.event_def(0).vars, vec![0, 1]);
        assert_eq!(eff.events_upto(3), vec![0, 1]);
        assert_eq!(eff.var_weight_bound(1), rat(2, 3));
    }

    struct Broken(FiniteAsEffective);

    impl EffectiveInstance for Broken {
        fn variable_spec(&self, var: VarId) -> VariableSpec {
            self.0.variable_spec(var)
        }
        fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
            // Claims every event touches every variable.
            if var < 4 {
                vec![0, 1]
            } else {
                vec![]
            }
        }
        fn event_def(&self, id: EventId) -> Event {
            self.0.event_def(id)
        }
        fn weight(&self, id: EventId) -> Rational {
            self.0.weight(id)
        }
        fn epsilon(&self) -> Rational {
            self.0.epsilon()
        }
    }

    #[test]
    #[should_panic(expected = "does not contain it")]
    fn consistency_wrapper_catches_bad_enumerator() {
        let eff = ConsistencyChecked(Broken(FiniteAsEffective::new(small_finite())));
        eff.events_of_variable(3);
    }
}
