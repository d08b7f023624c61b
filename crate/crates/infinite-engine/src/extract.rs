//! Computable-prefix extraction: choosing values `a_0..a_s` that the limit
//! configuration provably (or empirically) takes.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use lll_core::rational::ceil_u64;
use lll_core::types::{EventId, Value, VarId};
use lll_core::Rational;
use mt_finite::RandomTape;

use crate::error::EngineError;
use crate::exact::enumerate_exact_distribution;
use crate::freeze::GreedyFreeze;
use crate::instance::EffectiveInstance;
use crate::reach::stabilization_bound;
use crate::stage::StagedRunner;

/// How to establish that a prefix value keeps the limit event's mass
/// positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractionMode {
    /// Enumerate all tapes of `depth` bits and pick, greedily left to
    /// right, the smallest value with positive certified conditional mass.
    /// Rigorous: the returned prefix occurs in the limit with probability
    /// at least the certified mass.
    Exact { depth: u64 },
    /// Run `replicas` independent seeded runs through the stabilization
    /// stage of every prefix variable and vote: a value passes when at
    /// least `margin` of the replicas matching the prefix so far exhibit
    /// it. Empirical only; never claimed certified.
    MonteCarlo {
        replicas: u64,
        /// Fraction of the surviving (conditional) pool a value needs.
        margin: Rational,
        /// Failure probability fed to the stabilization bound that sets the
        /// truncation stage and the per-run step cap.
        stab_eps: Rational,
    },
    /// Run one seeded staged execution until a freeze certificate covers
    /// `0..=s` (at most `max_extra_stages` past stage `s`). Rigorous like
    /// exact mode: the consumed tape prefix is a positive-mass cylinder on
    /// which the values are final; feasible on instances far too wide for
    /// tape enumeration.
    Certified { max_extra_stages: u64 },
}

impl ExtractionMode {
    pub fn exact(depth: u64) -> Self {
        ExtractionMode::Exact { depth }
    }

    /// Monte-carlo with the default 5% margin and stabilization failure
    /// probability 1/10.
    pub fn monte_carlo(replicas: u64) -> Self {
        ExtractionMode::MonteCarlo {
            replicas,
            margin: Rational::new(1.into(), 20.into()),
            stab_eps: Rational::new(1.into(), 10.into()),
        }
    }

    pub fn certified(max_extra_stages: u64) -> Self {
        ExtractionMode::Certified { max_extra_stages }
    }
}

/// Which guarantee a returned prefix carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixMode {
    Exact,
    MonteCarlo,
    Certified,
}

impl std::fmt::Display for PrefixMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrefixMode::Exact => "exact",
            PrefixMode::MonteCarlo => "monte-carlo",
            PrefixMode::Certified => "certified",
        })
    }
}

/// Values `a_0..a_s` with the mode that produced them and a confidence:
/// exact and certified modes return 1 (the prefix provably has positive
/// limit probability); monte-carlo returns the fraction of replicas whose
/// truncated run exhibited the full prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedPrefix {
    pub values: Vec<Value>,
    pub mode: PrefixMode,
    pub confidence: Rational,
}

/// Report from checking a prefix against every event it fully determines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixReport {
    pub events_checked: u64,
    pub violations: Vec<EventId>,
}

impl PrefixReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluate every event with max variable `< prefix.len()` against the
/// prefix values and report the violated ones. An empty prefix passes
/// vacuously.
pub fn verify_prefix(instance: &dyn EffectiveInstance, prefix: &[Value]) -> PrefixReport {
    if prefix.is_empty() {
        return PrefixReport {
            events_checked: 0,
            violations: Vec::new(),
        };
    }
    let s = prefix.len() as VarId - 1;
    let ids = instance.events_upto(s);
    let mut violations = Vec::new();
    for &id in &ids {
        let event = instance.event_def(id);
        let violated = event.forbidden.iter().any(|tuple| {
            event
                .vars
                .iter()
                .zip(tuple)
                .all(|(&var, &v)| prefix[var as usize] == v)
        });
        if violated {
            violations.push(id);
        }
    }
    PrefixReport {
        events_checked: ids.len() as u64,
        violations,
    }
}

/// Choose values for `P_0..P_s` by the requested mode. All randomness (the
/// monte-carlo replicas, the certified run) derives from `seed`; exact mode
/// ignores it.
pub fn extract_computable_prefix(
    instance: &dyn EffectiveInstance,
    s: VarId,
    mode: &ExtractionMode,
    seed: u64,
) -> Result<ExtractedPrefix, EngineError> {
    match mode {
        ExtractionMode::Exact { depth } => extract_exact(instance, s, *depth),
        ExtractionMode::MonteCarlo {
            replicas,
            margin,
            stab_eps,
        } => extract_monte_carlo(instance, s, *replicas, margin, stab_eps, seed),
        ExtractionMode::Certified { max_extra_stages } => {
            extract_certified(instance, s, *max_extra_stages, seed)
        }
    }
}

fn extract_exact(
    instance: &dyn EffectiveInstance,
    s: VarId,
    depth: u64,
) -> Result<ExtractedPrefix, EngineError> {
    let dist = enumerate_exact_distribution(instance, s, depth)?;
    let mut chosen: Vec<Value> = Vec::new();
    let mut confidence = Rational::zero();
    for k in 0..=s {
        let range = instance.variable_spec(k).range_size;
        let mut per_value: BTreeMap<Value, Rational> = BTreeMap::new();
        for (tuple, mass) in &dist.masses {
            if tuple[..k as usize] == chosen[..] {
                *per_value
                    .entry(tuple[k as usize])
                    .or_insert_with(Rational::zero) += mass;
            }
        }
        let pick = (0..range).find(|v| {
            per_value
                .get(v)
                .is_some_and(|mass| *mass > Rational::zero())
        });
        match pick {
            Some(v) => {
                confidence = per_value.remove(&v).expect("picked value has mass");
                chosen.push(v);
            }
            None => {
                return Err(EngineError::ThresholdFailure {
                    position: k,
                    achieved: (0..range)
                        .map(|v| (v, per_value.get(&v).cloned().unwrap_or_else(Rational::zero)))
                        .collect(),
                });
            }
        }
    }
    // The certified mass of the full chosen tuple is a positive lower bound
    // on the limit probability of this prefix.
    Ok(ExtractedPrefix {
        values: chosen,
        mode: PrefixMode::Exact,
        confidence: Rational::one().min(confidence).max(Rational::zero()),
    })
}

fn extract_monte_carlo(
    instance: &dyn EffectiveInstance,
    s: VarId,
    replicas: u64,
    margin: &Rational,
    stab_eps: &Rational,
    seed: u64,
) -> Result<ExtractedPrefix, EngineError> {
    if replicas == 0 {
        return Err(EngineError::Invalid("need at least one replica".into()));
    }
    // Truncation stage: past the largest stabilization reach over the
    // prefix, each variable has settled with probability >= 1 - stab_eps.
    let mut truncation = s;
    for var in 0..=s {
        let bound = stabilization_bound(instance, var, stab_eps)?;
        truncation = truncation.max(bound.reach_var);
    }
    let expected = instance.prefix_weight_bound(truncation);
    let step_cap = ceil_u64(&(expected * Rational::from_integer(2.into()) / stab_eps));
    let mut survivors: Vec<Vec<Value>> = Vec::new();
    for replica in 0..replicas {
        let tape = RandomTape::new(seed.wrapping_add(replica));
        let mut runner = StagedRunner::new(instance, tape).with_condition_checks(false);
        let mut ok = true;
        for stage in 0..=truncation {
            match runner.run_stage(stage) {
                Ok(snapshot) if snapshot.steps_elapsed <= step_cap => {}
                Ok(_) => {
                    ok = false;
                    break;
                }
                Err(EngineError::StageBudgetExhausted { .. }) => {
                    ok = false;
                    break;
                }
                Err(other) => return Err(other),
            }
        }
        if ok {
            survivors.push(runner.values()[..=s as usize].to_vec());
        }
    }
    if survivors.is_empty() {
        return Err(EngineError::ThresholdFailure {
            position: 0,
            achieved: Vec::new(),
        });
    }
    let total = replicas;
    let mut pool: Vec<&Vec<Value>> = survivors.iter().collect();
    let mut chosen: Vec<Value> = Vec::new();
    for k in 0..=s {
        let range = instance.variable_spec(k).range_size;
        let mut counts: BTreeMap<Value, u64> = BTreeMap::new();
        for tuple in &pool {
            *counts.entry(tuple[k as usize]).or_insert(0) += 1;
        }
        let pool_size = Rational::from_integer((pool.len() as u64).into());
        let needed = margin * &pool_size;
        let pick = (0..range).find(|v| {
            counts
                .get(v)
                .is_some_and(|&c| Rational::from_integer(c.into()) >= needed)
        });
        match pick {
            Some(v) => {
                pool.retain(|tuple| tuple[k as usize] == v);
                chosen.push(v);
            }
            None => {
                return Err(EngineError::ThresholdFailure {
                    position: k,
                    achieved: (0..range)
                        .map(|v| {
                            let c = counts.get(&v).copied().unwrap_or(0);
                            (v, Rational::from_integer(c.into()) / &pool_size)
                        })
                        .collect(),
                });
            }
        }
    }
    let confidence =
        Rational::from_integer((pool.len() as u64).into()) / Rational::from_integer(total.into());
    Ok(ExtractedPrefix {
        values: chosen,
        mode: PrefixMode::MonteCarlo,
        confidence,
    })
}

fn extract_certified(
    instance: &dyn EffectiveInstance,
    s: VarId,
    max_extra_stages: u64,
    seed: u64,
) -> Result<ExtractedPrefix, EngineError> {
    let tape = RandomTape::new(seed);
    let mut runner = StagedRunner::new(instance, tape);
    let rule = instance.certificate().unwrap_or(&GreedyFreeze);
    let mut stage = 0;
    loop {
        runner.run_stage(stage)?;
        if stage >= s && rule.prefix_frozen(instance, s, stage, &runner.assignment()) {
            return Ok(ExtractedPrefix {
                values: runner.values()[..=s as usize].to_vec(),
                mode: PrefixMode::Certified,
                confidence: Rational::one(),
            });
        }
        if stage >= s.saturating_add(max_extra_stages) {
            return Err(EngineError::CertificateNotClosed {
                stages_run: stage + 1,
            });
        }
        stage += 1;
    }
}
