//! Forbidden-substring clause families over one infinite line of random
//! bits P_0, P_1, ...: for every forbidden word w with |w| = n at or above
//! a derived threshold N and every start position p, the event "w occurs
//! at p", trimmed to its last n - floor(delta*n) positions. The trim
//! chain certifies the weighted neighbor condition once for the whole
//! family, so instances stay queryable without per-event condition rows.
//!
//! Soundness of the per-variable counting behind the family certificate:
//! a variable v lies in the trimmed span of a length-n placement for
//! exactly n - floor(delta*n) = k(n) start positions (fewer near the
//! origin), so at trimmed size k each originating length contributes at
//! most k * 2^(alpha*n) <= 2^(alpha'*n) <= 2^(rho*k) events per variable,
//! at most two lengths share a trimmed size, and the factor two is
//! absorbed into 2^(alpha''*k) for k >= the multiplicity floor. Every
//! event the family emits has trimmed size >= trimmed_floor, where the
//! inflated size inequality was verified at construction and is monotone
//! in the size.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use lll_core::rational::rat;
use lll_core::types::{Event, EventId, Value, VarId, VariableSpec};
use lll_core::Rational;

use infinite_engine::{
    extract_computable_prefix, CertificateRule, EffectiveInstance, EventCertification,
    ExtractionMode, PrefixMode,
};
use mt_finite::Assignment;

use crate::error::AppError;
use crate::params::{
    derive_trim_chain, max_length_touching, trim_count, trimmed_size, TrimChain, WeightTable,
};
use crate::words::WordSet;

// Event ids pack (length, word index, start position) into one u64:
// length in bits 40..64, word index in bits 20..40, position in bits
// 0..20. Ascending (length, index, position) is ascending id.
const LEN_SHIFT: u32 = 40;
const WIDX_SHIFT: u32 = 20;
const LEN_CAP: u64 = 1 << 24;
const WIDX_CAP: u64 = 1 << 20;
const POS_CAP: u64 = 1 << 20;

fn pack_id(n: u64, widx: u64, p: u64) -> EventId {
    assert!(n < LEN_CAP, "word length {n} exceeds the event-id encoding");
    assert!(
        widx < WIDX_CAP,
        "word index {widx} exceeds the event-id encoding"
    );
    assert!(
        p < POS_CAP,
        "start position {p} exceeds the event-id encoding (max {})",
        POS_CAP - 1
    );
    (n << LEN_SHIFT) | (widx << WIDX_SHIFT) | p
}

fn unpack_id(id: EventId) -> (u64, u64, u64) {
    (
        id >> LEN_SHIFT,
        (id >> WIDX_SHIFT) & (WIDX_CAP - 1),
        id & (POS_CAP - 1),
    )
}

/// Per-length word lists, validated on first use: the enumerator must
/// agree with the decider, stay sorted and duplicate-free, and respect
/// the declared sparsity exponent.
struct WordCache {
    set: Arc<dyn WordSet>,
    sparsity_num: u64,
    sparsity_den: u32,
    bundles: Mutex<BTreeMap<u64, Arc<Vec<Vec<Value>>>>>,
}

impl WordCache {
    fn new(set: Arc<dyn WordSet>) -> Self {
        let alpha = set.alpha();
        let sparsity_num = alpha
            .numer()
            .to_u64()
            .expect("sparsity numerator validated by the chain derivation");
        let sparsity_den = alpha
            .denom()
            .to_u64()
            .and_then(|d| u32::try_from(d).ok())
            .expect("sparsity denominator validated by the chain derivation");
        WordCache {
            set,
            sparsity_num,
            sparsity_den,
            bundles: Mutex::new(BTreeMap::new()),
        }
    }

    /// Fetch the words of length `n`, running the full validation the
    /// first time the length is seen.
    fn validated(&self, n: u64) -> Result<Arc<Vec<Vec<Value>>>, AppError> {
        if let Some(found) = self.bundles.lock().expect("word cache poisoned").get(&n) {
            return Ok(found.clone());
        }
        let words = self.set.words_of_length(n);
        for w in &words {
            if w.len() as u64 != n || w.iter().any(|&c| c > 1) || !self.set.contains(w) {
                return Err(AppError::EnumeratorDeciderMismatch { length: n });
            }
        }
        if !words.windows(2).all(|pair| pair[0] < pair[1]) {
            return Err(AppError::EnumeratorDeciderMismatch { length: n });
        }
        let count = words.len() as u64;
        if count >= WIDX_CAP {
            return Err(AppError::Invalid(format!(
                "{count} words of length {n} exceed the event-id encoding"
            )));
        }
        // count^b <= 2^(a*n) checked exactly; counts below 2^20 pass
        // outright whenever a*n >= 20*b.
        let (a, b) = (self.sparsity_num, self.sparsity_den);
        let exponent = a.checked_mul(n).filter(|e| *e <= 1 << 26).ok_or_else(|| {
            AppError::Invalid(format!("sparsity exponent too large at length {n}"))
        })?;
        if exponent < 20 * b as u64
            && BigUint::from(count).pow(b) > (BigUint::one() << exponent)
        {
            return Err(AppError::SparsityViolation { length: n, count });
        }
        let bundle = Arc::new(words);
        self.bundles
            .lock()
            .expect("word cache poisoned")
            .insert(n, bundle.clone());
        Ok(bundle)
    }

    /// Infallible view for the instance trait: a forbidden set breaking
    /// its declared contract after construction is a programming error.
    fn bundle(&self, n: u64) -> Arc<Vec<Vec<Value>>> {
        self.validated(n)
            .unwrap_or_else(|e| panic!("forbidden-set contract violated: {e}"))
    }
}

/// Stabilization certificate for substring families. Both forms rest on
/// the same first-change argument: if a variable at or below the barrier
/// C ever changed, the first firing event would need its whole trimmed
/// span to match its word at positions that provably still disagree.
enum SpanRule {
    /// The set is `{c^n}` for one symbol: positions `0..=C` are frozen
    /// once some position in `s..=C` holds a different symbol and no run
    /// of `c` of length >= trimmed_floor exists up to it. A firing event
    /// is a c-run of trimmed length covering the barrier or lying inside
    /// the scanned run-free prefix, both impossible.
    ConstantRun { symbol: Value },
    /// General sets: r(a) is the largest over events whose trimmed span
    /// starts at `a` of the first instantiated span position disagreeing
    /// with the event's word (infinite when some event matches every
    /// instantiated position). Frozen once some C in `s..=stage` has
    /// r(a) <= C for every a <= C: any event able to rewrite a position
    /// <= C starts its span at some a <= C and still disagrees at the
    /// recorded position <= C when it would fire.
    Generic,
}

struct SpanFreeze {
    cache: Arc<WordCache>,
    chain: TrimChain,
    rule: SpanRule,
    max_len: Option<u64>,
}

impl SpanFreeze {
    fn length_hi(&self, var: VarId) -> u64 {
        let by_trim = max_length_touching(var, &self.chain.delta);
        let capped = self.max_len.map_or(by_trim, |l| by_trim.min(l));
        capped.min(LEN_CAP - 1)
    }

    fn constant_run_frozen(&self, symbol: Value, s: VarId, stage: VarId, values: &Assignment) -> bool {
        let mut run = 0u64;
        for p in 0..=stage {
            let is_symbol = values.get(p).map_or(true, |v| v == symbol);
            if is_symbol {
                run += 1;
                if run >= self.chain.trimmed_floor {
                    return false;
                }
            } else {
                run = 0;
                if p >= s {
                    return true;
                }
            }
        }
        false
    }

    /// First instantiated position of the span `[a, a+k-1]` where the
    /// assignment disagrees with `word` placed at `p = a - t`; `None`
    /// when every instantiated span position matches.
    fn first_disagreement(
        word: &[Value],
        p: u64,
        a: u64,
        stage: VarId,
        values: &Assignment,
    ) -> Option<u64> {
        let end = (p + word.len() as u64 - 1).min(stage);
        (a..=end).find(|&q| {
            values
                .get(q)
                .map_or(false, |v| v != word[(q - p) as usize])
        })
    }

    fn generic_frozen(&self, s: VarId, stage: VarId, values: &Assignment) -> bool {
        // Running maximum of r(a) over scanned span starts; None until a
        // first constrained start appears.
        let mut barrier_needed: Option<u64> = None;
        for a in 0..=stage {
            let hi = self.length_hi(a);
            for n in self.chain.threshold..=hi {
                let t = trim_count(n, &self.chain.delta);
                if t > a {
                    continue;
                }
                let p = a - t;
                for word in self.cache.bundle(n).iter() {
                    match Self::first_disagreement(word, p, a, stage, values) {
                        Some(q) => {
                            barrier_needed =
                                Some(barrier_needed.map_or(q, |m| m.max(q)));
                        }
                        // Some event starting here matches everything
                        // instantiated, so no barrier at or beyond `a`
                        // can ever work.
                        None => return false,
                    }
                }
            }
            if a >= s && barrier_needed.map_or(true, |m| m <= a) {
                return true;
            }
        }
        false
    }
}

impl CertificateRule for SpanFreeze {
    fn prefix_frozen(
        &self,
        _instance: &dyn EffectiveInstance,
        s: VarId,
        stage: VarId,
        assignment: &Assignment,
    ) -> bool {
        match self.rule {
            SpanRule::ConstantRun { symbol } => {
                self.constant_run_frozen(symbol, s, stage, assignment)
            }
            SpanRule::Generic => self.generic_frozen(s, stage, assignment),
        }
    }
}

/// Effective instance for the trimmed occurrence events of a forbidden
/// word set, with the family-level condition proof carried by its trim
/// chain.
pub struct SubstringFamily {
    cache: Arc<WordCache>,
    chain: TrimChain,
    weights: WeightTable,
    freeze: SpanFreeze,
}

impl SubstringFamily {
    /// Shortest word length that contributes events.
    pub fn threshold(&self) -> u64 {
        self.chain.threshold
    }

    /// The derived parameter chain.
    pub fn chain(&self) -> &TrimChain {
        &self.chain
    }

    /// The underlying forbidden set.
    pub fn word_set(&self) -> &Arc<dyn WordSet> {
        &self.cache.set
    }

    fn length_hi(&self, var: VarId) -> u64 {
        self.freeze.length_hi(var)
    }
}

/// Build the trimmed occurrence family for a forbidden word set at
/// slack `eps`. Derives the full parameter chain (erroring when the
/// declared sparsity admits no finite clause-size threshold) and, for
/// sets of bounded length, validates every contributing length up
/// front; unbounded sets are validated per queried length.
pub fn substring_cnf(set: Arc<dyn WordSet>, eps: &Rational) -> Result<SubstringFamily, AppError> {
    let chain = derive_trim_chain(&set.alpha(), eps)?;
    let cache = Arc::new(WordCache::new(set.clone()));
    if let Some(max_len) = set.max_len() {
        for n in chain.threshold..=max_len.min(LEN_CAP - 1) {
            cache.validated(n)?;
        }
    }
    let rule = match set.constant_symbol() {
        Some(symbol) => SpanRule::ConstantRun { symbol },
        None => SpanRule::Generic,
    };
    let freeze = SpanFreeze {
        cache: cache.clone(),
        chain: chain.clone(),
        rule,
        max_len: set.max_len(),
    };
    let weights = WeightTable::new(chain.beta_trim.clone());
    Ok(SubstringFamily {
        cache,
        chain,
        weights,
        freeze,
    })
}

impl EffectiveInstance for SubstringFamily {
    fn variable_spec(&self, var: VarId) -> VariableSpec {
        VariableSpec::uniform_bit(var)
    }

    fn events_of_variable(&self, var: VarId) -> Vec<EventId> {
        assert!(
            var < POS_CAP,
            "variable {var} exceeds the event-id encoding"
        );
        let mut out = Vec::new();
        let hi = self.length_hi(var);
        for n in self.chain.threshold..=hi {
            let t = trim_count(n, &self.chain.delta);
            if t > var {
                // The trimmed span starts at p + t >= t, past var.
                continue;
            }
            let p_hi = var - t;
            let p_lo = (var + 1).saturating_sub(n);
            let bundle = self.cache.bundle(n);
            for widx in 0..bundle.len() as u64 {
                for p in p_lo..=p_hi {
                    out.push(pack_id(n, widx, p));
                }
            }
        }
        out
    }

    fn event_def(&self, id: EventId) -> Event {
        let (n, widx, p) = unpack_id(id);
        assert!(
            n >= self.chain.threshold,
            "event id {id} is below the family threshold"
        );
        let bundle = self.cache.bundle(n);
        let word = bundle
            .get(widx as usize)
            .unwrap_or_else(|| panic!("event id {id} names no word of length {n}"));
        let t = trim_count(n, &self.chain.delta);
        let vars: Vec<VarId> = (p + t..p + n).collect();
        let tuple = word[t as usize..].to_vec();
        Event::new(id, vars, vec![tuple]).expect("a trimmed occurrence is a valid event")
    }

    fn weight(&self, id: EventId) -> Rational {
        let (n, _, _) = unpack_id(id);
        self.weights.weight(trimmed_size(n, &self.chain.delta))
    }

    fn epsilon(&self) -> Rational {
        self.chain.eps.clone()
    }

    fn events_upto(&self, max_var: VarId) -> Vec<EventId> {
        let mut out = Vec::new();
        let hi = self.length_hi(max_var).min(max_var + 1);
        for n in self.chain.threshold..=hi {
            let bundle = self.cache.bundle(n);
            for widx in 0..bundle.len() as u64 {
                for p in 0..=max_var + 1 - n {
                    out.push(pack_id(n, widx, p));
                }
            }
        }
        out.sort_by_key(|&id| {
            let (n, _, p) = unpack_id(id);
            (p + n - 1, id)
        });
        out
    }

    fn var_weight_bound(&self, _var: VarId) -> Rational {
        // Constant over variables: x/(1-x) <= 2x termwise and at most
        // 2^(alpha''*k) size-k events touch any one variable.
        self.chain.var_weight_ub()
    }

    fn prefix_weight_bound(&self, max_var: VarId) -> Rational {
        // Exact counts, bounded termwise: length n contributes count(n)
        // words at max_var + 2 - n starts, each with x/(1-x) <= 2x.
        let mut total = Rational::zero();
        let hi = self.length_hi(max_var).min(max_var + 1);
        for n in self.chain.threshold..=hi {
            let count = self.cache.bundle(n).len() as u64;
            if count == 0 {
                continue;
            }
            let starts = max_var + 2 - n;
            let weight = self.weights.weight(trimmed_size(n, &self.chain.delta));
            total += rat(2, 1) * Rational::from_integer((count * starts).into()) * weight;
        }
        total
    }

    fn certify_event(&self, _id: EventId) -> EventCertification {
        // The inflated size inequality was verified at trimmed_floor
        // during chain derivation and only gains slack at larger sizes;
        // per-event rows would enumerate millions of neighbors.
        EventCertification::FamilyProof
    }

    fn certificate(&self) -> Option<&dyn CertificateRule> {
        Some(&self.freeze)
    }
}

/// A word emitted by the avoidance pipeline, with the guarantee mode and
/// confidence inherited from the extraction.
#[derive(Debug, Clone)]
pub struct AvoidOutcome {
    pub word: Vec<Value>,
    /// Forbidden words shorter than this may still occur; all longer
    /// occurrences are excluded.
    pub threshold: u64,
    pub mode: PrefixMode,
    pub confidence: Rational,
}

/// Produce a length-`length` binary word containing no forbidden word of
/// length >= the derived threshold, by extracting a computable prefix of
/// the staged resampling limit at slack 1/10. Every window of qualifying
/// length is re-checked against the set's decider before returning.
pub fn avoid_substrings(
    set: Arc<dyn WordSet>,
    length: u64,
    mode: &ExtractionMode,
    seed: u64,
) -> Result<AvoidOutcome, AppError> {
    let family = substring_cnf(set.clone(), &rat(1, 10))?;
    if length == 0 {
        return Ok(AvoidOutcome {
            word: Vec::new(),
            threshold: family.threshold(),
            mode: match mode {
                ExtractionMode::Exact { .. } => PrefixMode::Exact,
                ExtractionMode::MonteCarlo { .. } => PrefixMode::MonteCarlo,
                ExtractionMode::Certified { .. } => PrefixMode::Certified,
            },
            confidence: Rational::one(),
        });
    }
    let prefix = extract_computable_prefix(&family, length - 1, mode, seed)?;
    let word = prefix.values;
    let lo = family.threshold() as usize;
    for start in 0..word.len() {
        let mut hi = word.len() - start;
        if let Some(max_len) = set.max_len() {
            hi = hi.min(max_len as usize);
        }
        for n in lo..=hi {
            if set.contains(&word[start..start + n]) {
                return Err(AppError::Invalid(format!(
                    "internal error: emitted word contains a forbidden window at {start}, length {n}"
                )));
            }
        }
    }
    Ok(AvoidOutcome {
        word,
        threshold: family.threshold(),
        mode: prefix.mode,
        confidence: prefix.confidence,
    })
}
