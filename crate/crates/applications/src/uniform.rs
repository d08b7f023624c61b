//! Uniform-width CNF instances: every clause has exactly m variables,
//! every clause gets weight 2^(2-m), and every clause may intersect at
//! most 2^(m-2) others.
//!
//! Under those caps the local condition holds with room to spare once
//!
//!   (1-eps) * (1 - 2^(2-m))^(2^(m-2)) >= 1/4,
//!
//! because a clause is violated with probability 2^(-m) = 2^(2-m) / 4 and
//! its weighted neighbor product is at worst the left-hand side.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive};

use lll_core::rational::rat;
use lll_core::types::{Event, EventId, VarId, VariableSpec};
use lll_core::Rational;

use infinite_engine::{EffectiveInstance, EventCertification};

use crate::clause::Clause;
use crate::error::AppError;

/// Exact value of (1 - 2^(-j))^(2^j), increasing in j.
fn shrink_factor(j: u64) -> Rational {
    let base = Rational::one() - Rational::new(1.into(), (num_bigint::BigUint::one() << j).into());
    base.pow(1i32 << j)
}

/// Exponent above which the feasibility check switches from the exact
/// power to the monotone lower bound at this exponent.
const EXACT_SHRINK_LIMIT: u64 = 16;

/// Render a rational exactly when short, approximately otherwise.
fn compact(x: &Rational) -> String {
    let exact = x.to_string();
    if exact.len() <= 24 {
        exact
    } else {
        format!("~{:.6}", x.to_f64().unwrap_or(f64::NAN))
    }
}

/// Verify (1-eps) * (1 - 2^(2-m))^(2^(m-2)) >= 1/4, reporting the failing
/// comparison as event probability vs. weighted bound. For m > 18 the
/// power is replaced by its exact value at m = 18, a valid lower bound
/// because (1 - 2^(-j))^(2^j) increases in j; the check stays sufficient.
fn check_feasibility(m: u64, eps: &Rational) -> Result<(), AppError> {
    if m < 3 {
        return Err(AppError::ClauseSizeTooSmall {
            m,
            detail: "weights 2^(2-m) require m >= 3".into(),
        });
    }
    let j = m - 2;
    let factor = shrink_factor(j.min(EXACT_SHRINK_LIMIT));
    if (Rational::one() - eps) * &factor >= rat(1, 4) {
        return Ok(());
    }
    // Report in per-event terms: probability 2^(-m) vs. weight times
    // neighbor product x * (1-eps) * (1-x)^(2^(m-2)).
    let prob = Rational::new(1.into(), (num_bigint::BigUint::one() << m).into());
    let bound = Rational::new(1.into(), (num_bigint::BigUint::one() << j).into())
        * (Rational::one() - eps)
        * &factor;
    Err(AppError::ClauseSizeTooSmall {
        m,
        detail: format!(
            "event probability {} exceeds the weighted neighbor bound {}",
            compact(&prob),
            compact(&bound)
        ),
    })
}

/// An m-uniform CNF presented as an effective instance: uniform bits,
/// one event per clause (ids are input positions), weight 2^(2-m).
#[derive(Debug)]
pub struct UniformCnf {
    m: u64,
    eps: Rational,
    weight: Rational,
    events: Vec<Event>,
    by_var: BTreeMap<VarId, Vec<EventId>>,
}

/// Build the instance, validating clause widths, the neighbor cap
/// 2^(m-2), and the feasibility inequality for (m, eps).
pub fn uniform_cnf_instance(
    clauses: &[Clause],
    m: u64,
    eps: &Rational,
) -> Result<UniformCnf, AppError> {
    if *eps < num_traits::Zero::zero() || *eps >= Rational::one() {
        return Err(AppError::Invalid(format!(
            "slack eps must lie in [0, 1), got {eps}"
        )));
    }
    check_feasibility(m, eps)?;
    let mut events = Vec::with_capacity(clauses.len());
    let mut by_var: BTreeMap<VarId, Vec<EventId>> = BTreeMap::new();
    for (id, clause) in clauses.iter().enumerate() {
        if clause.len() != m {
            return Err(AppError::Invalid(format!(
                "clause {id} has {} variables, expected {m}",
                clause.len()
            )));
        }
        let event = clause.to_event(id as EventId);
        for &var in &event.vars {
            by_var.entry(var).or_default().push(event.id);
        }
        events.push(event);
    }
    // Neighbor cap: each clause may share variables with at most 2^(m-2)
    // others. Counts are bounded by the clause count, so a cap at or above
    // 2^63 can never be exceeded.
    if m - 2 < 63 {
        let cap = 1u64 << (m - 2);
        for event in &events {
            let mut neighbors: Vec<EventId> = event
                .vars
                .iter()
                .flat_map(|v| by_var[v].iter().copied())
                .filter(|&id| id != event.id)
                .collect();
            neighbors.sort_unstable();
            neighbors.dedup();
            if neighbors.len() as u64 > cap {
                return Err(AppError::NeighborBound {
                    clause: event.id,
                    count: neighbors.len() as u64,
                    bound: cap,
                });
            }
        }
    }
    Ok(UniformCnf {
        m,
        eps: eps.clone(),
        weight: Rational::new(1.into(), (num_bigint::BigUint::one() << (m - 2)).into()),
        events,
        by_var,
    })
}

impl UniformCnf {
    pub fn clause_width(&self) -> u64 {
        self.m
    }

    pub fn event_count(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.events.iter().map(Event::max_var).max()
    }
}

impl EffectiveInstance for UniformCnf {
    fn variable_spec(&self, var: VarId) -> VariableSpec {
        VariableSpec::uniform_bit(var)
    }

    fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
        self.by_var.get(&var).cloned().unwrap_or_default()
    }

    fn event_def(&self, id: EventId) -> Event {
        self.events[id as usize].clone()
    }

    fn weight(&self, _id: EventId) -> Rational {
        self.weight.clone()
    }

    fn epsilon(&self) -> Rational {
        self.eps.clone()
    }

    fn certify_event(&self, _id: EventId) -> EventCertification {
        EventCertification::CheckExactly
    }
}
