//! Disjunctive clauses over binary variables and their compilation into
//! bad events.
//!
//! A clause is a set of literals; it is satisfied when at least one
//! literal holds. The corresponding bad event is "every literal is
//! falsified", a single forbidden assignment of the clause's variables.

use lll_core::{Event, EventId, Value, VarId};

use crate::error::AppError;
use crate::params::trim_count;
use lll_core::Rational;

/// One clause: literals as (variable, positive) pairs, kept sorted by
/// variable. A positive literal holds when its variable is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<(VarId, bool)>,
}

impl Clause {
    /// Build a clause from literals. Variables must be distinct.
    pub fn new(mut literals: Vec<(VarId, bool)>) -> Result<Self, AppError> {
        if literals.is_empty() {
            return Err(AppError::Invalid("clause has no literals".into()));
        }
        literals.sort_unstable_by_key(|&(v, _)| v);
        if literals.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(AppError::Invalid(
                "clause mentions a variable twice".into(),
            ));
        }
        Ok(Clause { literals })
    }

    /// The clause forbidding word w at position p over variables
    /// p..p+|w|: its bad event is "the next |w| variables spell w", so
    /// the literal at offset i demands a value different from w[i].
    pub fn forbid_word_at(word: &[Value], p: VarId) -> Result<Self, AppError> {
        if word.iter().any(|&c| c > 1) {
            return Err(AppError::Invalid("word has a non-binary symbol".into()));
        }
        Clause::new(
            word.iter()
                .enumerate()
                .map(|(i, &c)| (p + i as VarId, c == 0))
                .collect(),
        )
    }

    pub fn len(&self) -> u64 {
        self.literals.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literals(&self) -> &[(VarId, bool)] {
        &self.literals
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.literals.iter().map(|&(v, _)| v)
    }

    /// The single assignment of this clause's variables that falsifies
    /// every literal, in variable order.
    pub fn falsifying_tuple(&self) -> Vec<Value> {
        self.literals
            .iter()
            .map(|&(_, positive)| if positive { 0 } else { 1 })
            .collect()
    }

    /// Compile into the bad event "all literals falsified".
    pub fn to_event(&self, id: EventId) -> Event {
        Event::new(
            id,
            self.variables().collect(),
            vec![self.falsifying_tuple()],
        )
        .expect("clause invariants produce a valid event")
    }

    /// Drop the `count` lowest-variable literals.
    pub fn drop_lowest(&self, count: u64) -> Result<Self, AppError> {
        if count >= self.len() {
            return Err(AppError::TrimmedToNothing { size: self.len() });
        }
        Ok(Clause {
            literals: self.literals[count as usize..].to_vec(),
        })
    }
}

/// Trim every clause by its own delta-fraction: a clause of size n loses
/// its floor(delta*n) lowest-index literals. A clause of {3,7,9,12} at
/// delta = 1/4 keeps {7,9,12}.
pub fn trim_clauses(clauses: &[Clause], delta: &Rational) -> Result<Vec<Clause>, AppError> {
    clauses
        .iter()
        .map(|c| c.drop_lowest(trim_count(c.len(), delta)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lll_core::rational::rat;

    #[test]
    fn literals_sort_and_reject_duplicates() {
        let c = Clause::new(vec![(9, true), (3, false), (7, true)]).unwrap();
        assert_eq!(c.literals(), &[(3, false), (7, true), (9, true)]);
        assert!(Clause::new(vec![(3, true), (3, false)]).is_err());
        assert!(Clause::new(vec![]).is_err());
    }

    #[test]
    fn falsifying_tuple_inverts_the_literals() {
        let c = Clause::new(vec![(0, true), (1, false), (2, true)]).unwrap();
        assert_eq!(c.falsifying_tuple(), vec![0, 1, 0]);
        let e = c.to_event(5);
        assert_eq!(e.id, 5);
        assert_eq!(e.vars, vec![0, 1, 2]);
        assert_eq!(e.forbidden, vec![vec![0, 1, 0]]);
    }

    #[test]
    fn word_occurrence_clause_forbids_exactly_the_word() {
        let c = Clause::forbid_word_at(&[0, 1, 1, 0], 10).unwrap();
        assert_eq!(c.literals(), &[(10, true), (11, false), (12, false), (13, true)]);
        assert_eq!(c.falsifying_tuple(), vec![0, 1, 1, 0]);
        assert!(Clause::forbid_word_at(&[0, 2], 0).is_err());
    }

    #[test]
    fn trimming_drops_the_lowest_quarter() {
        let c = Clause::new(vec![(3, true), (7, true), (9, true), (12, true)]).unwrap();
        let trimmed = trim_clauses(std::slice::from_ref(&c), &rat(1, 4)).unwrap();
        let vars: Vec<VarId> = trimmed[0].variables().collect();
        assert_eq!(vars, vec![7, 9, 12]);
        // Size 3 at delta = 1/4 trims floor(3/4) = 0 literals.
        let small = trim_clauses(&trimmed, &rat(1, 4)).unwrap();
        assert_eq!(small[0], trimmed[0]);
    }

    #[test]
    fn trimming_to_nothing_is_an_error() {
        let c = Clause::new(vec![(0, true)]).unwrap();
        match trim_clauses(std::slice::from_ref(&c), &rat(99, 100)) {
            Ok(_) => {}
            Err(e) => panic!("size 1 trims floor(99/100) = 0, got {e}"),
        }
        match c.drop_lowest(1) {
            Err(AppError::TrimmedToNothing { size: 1 }) => {}
            other => panic!("expected trim error, got {other:?}"),
        }
    }
}
