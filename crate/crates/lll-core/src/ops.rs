//! Exact operations over instances: event probabilities, the dependency
//! graph, and the local-lemma condition check.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::CoreError;
use crate::rational::Rational;
use crate::types::{
    ConditionReport, ConditionRow, DependencyGraph, Event, EventId, FiniteInstance, VarId,
    VariableSpec,
};

/// Probability of `event` under the product measure: the sum, over its
/// forbidden tuples, of the product of the per-variable value probabilities.
///
/// `variables` must be dense (`variables[i].index == i`).
pub fn event_probability(
    event: &Event,
    variables: &[VariableSpec],
) -> Result<Rational, CoreError> {
    let mut total = Rational::zero();
    for tuple in &event.forbidden {
        let mut mass = Rational::one();
        for (k, &var) in event.vars.iter().enumerate() {
            let spec = variables
                .get(var as usize)
                .ok_or(CoreError::MissingVariable {
                    event: event.id,
                    var,
                })?;
            mass *= &spec.distribution[tuple[k] as usize];
        }
        total += mass;
    }
    Ok(total)
}

/// Build the variable-sharing dependency graph: events `A != B` are adjacent
/// iff they use a common variable. The result maps every event id to its
/// sorted neighbor list (possibly empty).
pub fn build_dependency_graph(instance: &FiniteInstance) -> DependencyGraph {
    let mut adjacency: BTreeMap<EventId, Vec<EventId>> = instance
        .events
        .iter()
        .map(|e| (e.id, Vec::new()))
        .collect();
    // Bucket events by variable, then join within each bucket. Sparse
    // instances (few events per variable) stay near-linear this way.
    let mut by_var: BTreeMap<VarId, Vec<usize>> = BTreeMap::new();
    for (idx, event) in instance.events.iter().enumerate() {
        for &var in &event.vars {
            by_var.entry(var).or_default().push(idx);
        }
    }
    for bucket in by_var.values() {
        for (pos, &i) in bucket.iter().enumerate() {
            for &j in &bucket[pos + 1..] {
                let (a, b) = (instance.events[i].id, instance.events[j].id);
                adjacency.get_mut(&a).unwrap().push(b);
                adjacency.get_mut(&b).unwrap().push(a);
            }
        }
    }
    for list in adjacency.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    DependencyGraph { adjacency }
}

/// Check the local-lemma condition exactly, one row per event:
///
/// ```text
/// Pr[A]  <=  (1 - eps) * x(A) * prod_{E in Gamma(A)} (1 - x(E))
/// ```
///
/// where `Gamma(A)` is the punctured neighborhood of `A` in `graph`. With
/// `with_slack = false` the `(1 - eps)` factor is dropped, which is the same
/// as checking with zero slack.
pub fn check_lll(
    instance: &FiniteInstance,
    graph: &DependencyGraph,
    with_slack: bool,
) -> Result<ConditionReport, CoreError> {
    let slack_factor = if with_slack {
        Rational::one() - &instance.epsilon
    } else {
        Rational::one()
    };
    let mut rows = Vec::with_capacity(instance.events.len());
    for event in &instance.events {
        let lhs = event_probability(event, &instance.variables)?;
        let x = instance
            .weights
            .get(&event.id)
            .ok_or_else(|| CoreError::invalid(format!("event {} has no weight", event.id)))?;
        let mut rhs = &slack_factor * x;
        for &nbr in graph.neighbors(event.id) {
            let y = instance
                .weights
                .get(&nbr)
                .ok_or_else(|| CoreError::invalid(format!("event {nbr} has no weight")))?;
            rhs *= Rational::one() - y;
        }
        let slack = &rhs - &lhs;
        let pass = slack >= Rational::zero();
        rows.push(ConditionRow {
            event: event.id,
            lhs,
            rhs,
            slack,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ConditionReport { rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn uniform_bits(n: u64) -> Vec<VariableSpec> {
        (0..n).map(VariableSpec::uniform_bit).collect()
    }

    /// A 4-variable all-positive clause on the given variables.
    fn clause_event(id: EventId, vars: Vec<VarId>) -> Event {
        let width = vars.len();
        Event::new(id, vars, vec![vec![0; width]]).unwrap()
    }

    #[test]
    fn probability_sums_forbidden_tuples() {
        // One ternary variable with distribution (1/2, 1/3, 1/6); forbidding
        // values {0, 2} has probability 1/2 + 1/6 = 2/3.
        let spec = VariableSpec::new(0, vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
        let event = Event::new(0, vec![0], vec![vec![0], vec![2]]).unwrap();
        assert_eq!(event_probability(&event, &[spec]).unwrap(), rat(2, 3));
    }

    #[test]
    fn probability_of_uniform_clause() {
        // A clause over 4 fair bits with a single forbidden tuple has
        // probability 2^-4.
        let vars = uniform_bits(4);
        let event = clause_event(0, vec![0, 1, 2, 3]);
        assert_eq!(event_probability(&event, &vars).unwrap(), rat(1, 16));
    }

    /// The 20-clause chain: clause k lives on variables {3k,...,3k+3}, so
    /// consecutive clauses share exactly one variable.
    fn chain_instance(epsilon: Rational) -> FiniteInstance {
        let variables = uniform_bits(61);
        let events: Vec<Event> = (0..20)
            .map(|k| clause_event(k, (3 * k..3 * k + 4).collect()))
            .collect();
        let weights = (0..20).map(|id| (id, rat(1, 4))).collect();
        FiniteInstance::new(variables, events, weights, epsilon).unwrap()
    }

    #[test]
    fn chain_adjacency_is_path() {
        let instance = chain_instance(rat(1, 10));
        let graph = build_dependency_graph(&instance);
        assert_eq!(graph.neighbors(0), &[1]);
        assert_eq!(graph.neighbors(7), &[6, 8]);
        assert_eq!(graph.neighbors(19), &[18]);
        assert!(graph.in_closed_neighborhood(7, 7));
        assert!(graph.in_closed_neighborhood(7, 8));
        assert!(!graph.in_closed_neighborhood(7, 9));
    }

    #[test]
    fn chain_satisfies_slack_condition() {
        // Middle clause: rhs = (9/10)(1/4)(3/4)^2 = 81/640, lhs = 1/16.
        let instance = chain_instance(rat(1, 10));
        let graph = build_dependency_graph(&instance);
        let report = check_lll(&instance, &graph, true).unwrap();
        assert!(report.pass);
        let middle = &report.rows[7];
        assert_eq!(middle.lhs, rat(1, 16));
        assert_eq!(middle.rhs, rat(81, 640));
    }

    #[test]
    fn slack_zero_matches_no_slack_check() {
        let with_eps_zero = chain_instance(rat(0, 1));
        let graph = build_dependency_graph(&with_eps_zero);
        let slack = check_lll(&with_eps_zero, &graph, true).unwrap();
        let plain = check_lll(&with_eps_zero, &graph, false).unwrap();
        assert_eq!(slack, plain);
    }

    #[test]
    fn four_neighbor_star_example() {
        // Five 4-variable clauses all sharing variable 0: each clause sees 4
        // neighbors, so rhs = (9/10)(1/4)(3/4)^4 = 729/10240 >= 1/16.
        let variables = uniform_bits(16);
        let events: Vec<Event> = (0..5)
            .map(|k| clause_event(k, vec![0, 3 * k + 1, 3 * k + 2, 3 * k + 3]))
            .collect();
        let weights = (0..5).map(|id| (id, rat(1, 4))).collect();
        let instance = FiniteInstance::new(variables, events, weights, rat(1, 10)).unwrap();
        let graph = build_dependency_graph(&instance);
        for id in 0..5 {
            assert_eq!(graph.neighbors(id).len(), 4);
        }
        let report = check_lll(&instance, &graph, true).unwrap();
        assert!(report.pass);
        assert_eq!(report.rows[0].rhs, rat(729, 10240));
    }

    #[test]
    fn three_clause_star_fails_with_slack() {
        // Three 3-variable clauses sharing variable 0, x = 1/2: the slack
        // check needs (9/10)(1/2)(1/2)^2 = 9/80 >= 1/8, which fails; with no
        // slack it holds with equality (1/8 = 1/8).
        let variables = uniform_bits(7);
        let events: Vec<Event> = (0..3)
            .map(|k| clause_event(k, vec![0, 2 * k + 1, 2 * k + 2]))
            .collect();
        let weights = (0..3).map(|id| (id, rat(1, 2))).collect();
        let instance = FiniteInstance::new(variables, events, weights, rat(1, 10)).unwrap();
        let graph = build_dependency_graph(&instance);
        let report = check_lll(&instance, &graph, true).unwrap();
        assert!(!report.pass);
        assert_eq!(report.rows[0].lhs, rat(1, 8));
        assert_eq!(report.rows[0].rhs, rat(9, 80));
        let no_slack = check_lll(&instance, &graph, false).unwrap();
        assert!(no_slack.pass);
        assert_eq!(no_slack.rows[0].slack, rat(0, 1));
    }

    #[test]
    fn isolated_event_has_empty_neighborhood() {
        let variables = uniform_bits(2);
        let event = Event::new(0, vec![0, 1], vec![vec![1, 1]]).unwrap();
        let weights = [(0, rat(1, 2))].into_iter().collect();
        let instance = FiniteInstance::new(variables, vec![event], weights, rat(0, 1)).unwrap();
        let graph = build_dependency_graph(&instance);
        assert!(graph.neighbors(0).is_empty());
        let report = check_lll(&instance, &graph, true).unwrap();
        // lhs = 1/4 <= rhs = 1/2.
        assert!(report.pass);
        assert_eq!(report.rows[0].slack, rat(1, 4));
    }
}
