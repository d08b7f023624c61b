//! Exact distribution lower bounds by tape-tree enumeration.
//!
//! With dyadic variable distributions, the run of the staged algorithm is a
//! deterministic function of the bit tape, and the set of tapes sharing a
//! prefix of `b` consumed bits is a cylinder of probability exactly
//! `2^{-b}`. Enumerating tape prefixes depth-first therefore partitions the
//! probability space: a prefix whose run reaches a freeze certificate for
//! variables `0..=s` contributes its full cylinder mass to the certified
//! tuple (the values can never change again, whatever the remaining bits),
//! and prefixes still undecided at the depth limit are banked as unresolved
//! mass. The resulting per-tuple masses are exact lower bounds on the limit
//! distribution, and they sum with the unresolved mass to exactly 1.

use std::collections::BTreeMap;

use num_traits::Zero;

use lll_core::rational::two_pow_neg;
use lll_core::types::{Value, VarId};
use lll_core::Rational;
use mt_finite::{MtError, ScriptTape};

use crate::error::EngineError;
use crate::freeze::GreedyFreeze;
use crate::instance::EffectiveInstance;
use crate::stage::StagedRunner;

/// Lower bounds on the limit distribution of the values of `P_0..P_s`,
/// computed from all tapes of depth `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    /// Certified mass per value tuple; absent tuples have bound 0.
    pub masses: BTreeMap<Vec<Value>, Rational>,
    /// Mass of tapes not resolved within the depth (or the stage cap).
    pub unresolved: Rational,
    pub depth: u64,
}

impl ExactDistribution {
    /// The certified lower bound for one tuple.
    pub fn mass(&self, tuple: &[Value]) -> Rational {
        self.masses.get(tuple).cloned().unwrap_or_else(Rational::zero)
    }

    /// Sum of all certified masses plus the unresolved mass; exactly 1 by
    /// construction.
    pub fn total(&self) -> Rational {
        self.masses.values().sum::<Rational>() + &self.unresolved
    }
}

enum Outcome {
    /// A freeze certificate covered `0..=s`; the tuple is final.
    Certified(Vec<Value>),
    /// The tape prefix ran out of bits mid-run.
    Exhausted,
    /// Defensive cap on the stage count (only reachable when variables can
    /// be sampled without consuming bits).
    StageCapped,
}

fn run_machine(
    instance: &dyn EffectiveInstance,
    s: VarId,
    stage_cap: VarId,
    bits: &[bool],
) -> Result<Outcome, EngineError> {
    let tape = ScriptTape::new(bits.to_vec());
    let mut runner = StagedRunner::new(instance, tape).with_condition_checks(false);
    let rule = instance.certificate().unwrap_or(&GreedyFreeze);
    for stage in 0..=stage_cap {
        match runner.run_stage(stage) {
            Ok(_) => {}
            Err(EngineError::Mt(MtError::TapeExhausted { .. })) => return Ok(Outcome::Exhausted),
            Err(other) => return Err(other),
        }
        if stage >= s && rule.prefix_frozen(instance, s, stage, &runner.assignment()) {
            return Ok(Outcome::Certified(runner.values()[..=s as usize].to_vec()));
        }
    }
    Ok(Outcome::StageCapped)
}

/// Enumerate all tapes of `depth` bits and classify each by the staged run
/// it drives, yielding exact per-tuple lower bounds for the limit values of
/// `P_0..P_s` plus the unresolved mass.
///
/// Requires every variable a depth-`depth` run can touch to be dyadic
/// (otherwise cylinder masses are not powers of two and the tape tree does
/// not partition cleanly); fails with `NonDyadic` if one is not.
///
/// The depth-first search only extends prefixes whose run consumed every
/// bit and asked for more, so each classified prefix was consumed exactly
/// in full, making the cylinder masses a partition of probability 1.
pub fn enumerate_exact_distribution(
    instance: &dyn EffectiveInstance,
    s: VarId,
    depth: u64,
) -> Result<ExactDistribution, EngineError> {
    // Stages are capped defensively: every stage beyond the first consumes
    // at least one bit unless a variable has a singleton range.
    let stage_cap = s + depth + 2;
    for var in 0..=stage_cap {
        if !instance.variable_spec(var).is_dyadic() {
            return Err(EngineError::NonDyadic { var });
        }
    }
    let mut masses: BTreeMap<Vec<Value>, Rational> = BTreeMap::new();
    let mut unresolved = Rational::zero();
    let mut stack: Vec<Vec<bool>> = vec![Vec::new()];
    while let Some(bits) = stack.pop() {
        match run_machine(instance, s, stage_cap, &bits)? {
            Outcome::Certified(tuple) => {
                *masses.entry(tuple).or_insert_with(Rational::zero) +=
                    two_pow_neg(bits.len() as u64);
            }
            Outcome::StageCapped => unresolved += two_pow_neg(bits.len() as u64),
            Outcome::Exhausted => {
                if bits.len() as u64 == depth {
                    unresolved += two_pow_neg(depth);
                } else {
                    for bit in [false, true] {
                        let mut longer = bits.clone();
                        longer.push(bit);
                        stack.push(longer);
                    }
                }
            }
        }
    }
    Ok(ExactDistribution {
        masses,
        unresolved,
        depth,
    })
}
