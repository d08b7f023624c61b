//! Threshold and weight derivations for the variable-size clause families.
//!
//! A family with sparsity alpha (at most 2^(alpha*n) clauses of size n
//! through any variable) gets weights x_k = 2^(-beta*k) with
//! beta = (1+alpha)/2. The local condition for a size-k clause then
//! follows, after taking k-th roots, from the closed-form inequality
//!
//!   (1-eps) * 2^(-beta) * ((1 - 2^(-gamma)) - 2^(-gamma*N)) >= (1 - 2^(-gamma)) / 2
//!
//! with gamma = beta - alpha = (1-alpha)/2, once every clause has size at
//! least N. `min_clause_size` finds the least such N exactly.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use lll_core::rational::{ceil_u64, rat};
use lll_core::Rational;

use crate::error::AppError;
use crate::pow2::{dyadic_ceil_pow2_neg, Pow2};

/// Parameters of a clause family at sparsity alpha: weight exponent beta,
/// slack eps, minimal clause size, and the trimming fraction (zero when
/// trimming is unused).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFamilyParams {
    pub alpha: Rational,
    pub beta: Rational,
    pub eps: Rational,
    pub clause_threshold: u64,
    pub delta: Rational,
}

impl CnfFamilyParams {
    pub fn derive(alpha: &Rational, eps: &Rational) -> Result<Self, AppError> {
        validate_alpha_eps(alpha, eps)?;
        let beta = (Rational::one() + alpha) / rat(2, 1);
        let clause_threshold = min_clause_size(alpha, eps)?;
        Ok(CnfFamilyParams {
            alpha: alpha.clone(),
            beta,
            eps: eps.clone(),
            clause_threshold,
            delta: Rational::zero(),
        })
    }
}

fn validate_alpha_eps(alpha: &Rational, eps: &Rational) -> Result<(), AppError> {
    if *alpha <= Rational::zero() || *alpha >= Rational::one() {
        return Err(AppError::Invalid(format!(
            "sparsity alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    if *eps < Rational::zero() || *eps >= Rational::one() {
        return Err(AppError::Invalid(format!(
            "slack eps must lie in [0, 1), got {eps}"
        )));
    }
    let max_denom = BigInt::from(1u64 << 32);
    if alpha.denom() > &max_denom || eps.denom() > &max_denom {
        return Err(AppError::Invalid(
            "alpha and eps denominators must fit in 32 bits".into(),
        ));
    }
    Ok(())
}

fn root_order(beta: &Rational, gamma: &Rational) -> u64 {
    let bd = beta.denom().to_u64().expect("denominator fits");
    let gd = gamma.denom().to_u64().expect("denominator fits");
    num_integer::lcm(bd, gd)
}

/// Does the clause-size inequality hold at size n? Exposed so callers can
/// re-verify minimality directly.
pub fn clause_size_inequality_holds(
    alpha: &Rational,
    eps: &Rational,
    n: u64,
) -> Result<bool, AppError> {
    validate_alpha_eps(alpha, eps)?;
    let beta = (Rational::one() + alpha) / rat(2, 1);
    let gamma = (Rational::one() - alpha) / rat(2, 1);
    let q = root_order(&beta, &gamma);
    Ok(inequality_at(&beta, &gamma, eps, q, n, &Rational::one()))
}

/// (1-eps) * 2^(-beta) * ((1-2^(-gamma)) - inflate * 2^(-gamma*n))
///   >= (1-2^(-gamma)) / 2,
/// where `inflate` covers rounded-up weights (1 when weights are exact).
fn inequality_at(
    beta: &Rational,
    gamma: &Rational,
    eps: &Rational,
    q: u64,
    n: u64,
    inflate: &Rational,
) -> bool {
    let one = Pow2::rational(q, Rational::one());
    let tail_base = one.sub(&Pow2::two_pow(q, &-gamma.clone()));
    let tail_at_n = Pow2::rational(q, inflate.clone()).mul(&Pow2::two_pow(
        q,
        &-(gamma * Rational::from_integer(n.into())),
    ));
    let lhs = Pow2::rational(q, Rational::one() - eps)
        .mul(&Pow2::two_pow(q, &-beta.clone()))
        .mul(&tail_base.sub(&tail_at_n));
    let rhs = tail_base.mul(&Pow2::rational(q, rat(1, 2)));
    lhs.ge(&rhs)
}

const SIZE_SEARCH_GUARD: u64 = 1 << 20;

/// Smallest clause size N making the family inequality hold at sparsity
/// alpha and slack eps.
pub fn min_clause_size(alpha: &Rational, eps: &Rational) -> Result<u64, AppError> {
    validate_alpha_eps(alpha, eps)?;
    let beta = (Rational::one() + alpha) / rat(2, 1);
    let gamma = (Rational::one() - alpha) / rat(2, 1);
    let q = root_order(&beta, &gamma);
    // As n grows the inequality tends to (1-eps)*2^(-beta)*(1-2^(-gamma))
    // >= (1-2^(-gamma))/2, so a finite N exists iff (1-eps)*2^(-beta) > 1/2.
    let limit = Pow2::rational(q, Rational::one() - eps).mul(&Pow2::two_pow(q, &-beta.clone()));
    if limit.le(&Pow2::rational(q, rat(1, 2))) {
        return Err(AppError::NoFiniteClauseSize {
            alpha: alpha.clone(),
            eps: eps.clone(),
        });
    }
    let passes = |n: u64| inequality_at(&beta, &gamma, eps, q, n, &Rational::one());
    if passes(1) {
        return Ok(1);
    }
    let mut hi = 2;
    while !passes(hi) {
        hi *= 2;
        if hi > SIZE_SEARCH_GUARD {
            return Err(AppError::Invalid(
                "clause-size search exceeded its guard".into(),
            ));
        }
    }
    let mut lo = hi / 2;
    // Invariant: lo fails, hi passes; the inequality is monotone in n.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Result of checking one clause size against an explicit neighbor
/// profile.
#[derive(Debug, Clone, PartialEq)]
pub struct VarsizeReport {
    pub clause_size: u64,
    pub pass: bool,
    /// Float rendering of the checked left-hand side, for reports only.
    pub lhs_estimate: f64,
}

/// Check the per-size sufficient inequality for a clause of size k whose
/// neighbor counts are given explicitly: with x_m = 2^(-beta*m) and
/// rho_k a rational lower bound on (1-eps)^(1/k),
///
///   1/2 <= rho_k * 2^(-beta) * (1 - (1/k) * sum_m profile(m) * x_m).
///
/// The precondition profile(m) <= k * 2^(alpha*m) is verified exactly.
pub fn check_varsize_condition(
    params: &CnfFamilyParams,
    k: u64,
    profile: &BTreeMap<u64, u64>,
) -> Result<VarsizeReport, AppError> {
    if k == 0 {
        return Err(AppError::Invalid("clause size must be positive".into()));
    }
    validate_alpha_eps(&params.alpha, &params.eps)?;
    let a = params.alpha.numer().to_u64().expect("validated numerator");
    let b = u32::try_from(params.alpha.denom().to_u64().expect("validated denominator"))
        .expect("validated denominator");
    for (&m, &count) in profile {
        let bits = a.checked_mul(m).filter(|&bits| bits <= 1 << 26);
        let Some(bits) = bits else {
            return Err(AppError::Invalid(format!(
                "neighbor profile size {m} is too large to check"
            )));
        };
        // count <= k * 2^(alpha*m)  iff  count^b <= k^b * 2^(a*m).
        let lhs = BigUint::from(count).pow(b);
        let rhs = BigUint::from(k).pow(b) << bits;
        if lhs > rhs {
            return Err(AppError::ProfileExceeded { size: m, count });
        }
    }
    let q = params.beta.denom().to_u64().expect("validated denominator");
    let mut sum = Pow2::rational(q, Rational::zero());
    for (&m, &count) in profile {
        let term = Pow2::rational(q, Rational::from_integer(count.into())).mul(&Pow2::two_pow(
            q,
            &-(&params.beta * Rational::from_integer(m.into())),
        ));
        sum = sum.add(&term);
    }
    let rho = root_lower_bound(&(Rational::one() - &params.eps), k);
    let lhs = Pow2::rational(q, rho)
        .mul(&Pow2::two_pow(q, &-params.beta.clone()))
        .mul(
            &Pow2::rational(q, Rational::one())
                .sub(&sum.mul(&Pow2::rational(q, Rational::new(1.into(), k.into())))),
        );
    let pass = lhs.ge(&Pow2::rational(q, rat(1, 2)));
    Ok(VarsizeReport {
        clause_size: k,
        pass,
        lhs_estimate: lhs.to_f64(),
    })
}

/// Largest r/2^64 with (r/2^64)^k <= value, for value in (0, 1].
fn root_lower_bound(value: &Rational, k: u64) -> Rational {
    if value.is_one() {
        return Rational::one();
    }
    let k32 = u32::try_from(k).expect("root order fits in u32");
    let numer = value.numer().to_biguint().expect("positive value");
    let denom = value.denom().to_biguint().expect("positive value");
    let scaled = (numer << (64 * k)) / denom;
    let root = scaled.nth_root(k32);
    Rational::new(root.into(), (BigUint::one() << 64u32).into())
}

/// Full parameter chain for a delta-trimmed family at raw sparsity alpha.
///
/// The counting argument: at most 2^(alpha*n) words of length n touch a
/// variable in at most n placements each, and n * 2^(alpha*n) <=
/// 2^(alpha'*n) once n >= absorb_floor. Trimming a delta-fraction maps
/// length n to size k = n - floor(delta*n) >= (1-delta)*n, so per-variable
/// counts at trimmed size k are at most 2^(rho*k) per originating length
/// with rho = alpha'/(1-delta); at most two lengths share a size, and the
/// factor 2 <= 2^((alpha''-rho)*k) is absorbed once k >=
/// multiplicity_floor. Weights are dyadic ceil-roundings of 2^(-beta''*k)
/// and the rounding inflation is covered by re-checking the size
/// inequality with the inflation factor at trimmed_floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrimChain {
    pub alpha: Rational,
    pub eps: Rational,
    pub alpha_absorb: Rational,
    pub delta: Rational,
    pub rho: Rational,
    pub alpha_trim: Rational,
    pub beta_trim: Rational,
    pub gamma_trim: Rational,
    pub multiplicity_floor: u64,
    pub lll_floor: u64,
    pub trimmed_floor: u64,
    pub absorb_floor: u64,
    pub threshold: u64,
}

/// Inflation factor covering ceil-rounded weights: 1 + 2^-64.
pub fn weight_inflation() -> Rational {
    Rational::one() + Rational::new(1.into(), (BigUint::one() << 64u32).into())
}

pub fn derive_trim_chain(alpha: &Rational, eps: &Rational) -> Result<TrimChain, AppError> {
    validate_alpha_eps(alpha, eps)?;
    let one = Rational::one();
    let alpha_absorb = alpha + (&one - alpha) / rat(4, 1);
    let delta = (&one - alpha) / rat(8, 1);
    let rho = &alpha_absorb / (&one - &delta);
    let alpha_trim = &rho + (&one - &rho) / rat(4, 1);
    if alpha_trim >= one {
        return Err(AppError::Invalid(format!(
            "trimmed sparsity reached {alpha_trim}, out of range"
        )));
    }
    let beta_trim = (&one + &alpha_trim) / rat(2, 1);
    let gamma_trim = (&one - &alpha_trim) / rat(2, 1);
    let multiplicity_floor = ceil_u64(&(&one / (&alpha_trim - &rho)));
    let lll_floor = min_clause_size(&alpha_trim, eps)?;
    let mut trimmed_floor = multiplicity_floor.max(lll_floor);
    // The dyadic weights exceed 2^(-beta''*k) by at most the inflation
    // factor; push the size floor up until the inflated inequality holds.
    let q = root_order(&beta_trim, &gamma_trim);
    let inflate = weight_inflation();
    while !inequality_at(&beta_trim, &gamma_trim, eps, q, trimmed_floor, &inflate) {
        trimmed_floor += 1;
        if trimmed_floor > SIZE_SEARCH_GUARD {
            return Err(AppError::Invalid(
                "inflated size search exceeded its guard".into(),
            ));
        }
    }
    let mut threshold = trimmed_floor;
    while trimmed_size(threshold, &delta) < trimmed_floor {
        threshold += 1;
    }
    let absorb_floor = absorption_floor(&(&alpha_absorb - alpha))?;
    threshold = threshold.max(absorb_floor);
    Ok(TrimChain {
        alpha: alpha.clone(),
        eps: eps.clone(),
        alpha_absorb,
        delta,
        rho,
        alpha_trim,
        beta_trim,
        gamma_trim,
        multiplicity_floor,
        lll_floor,
        trimmed_floor,
        absorb_floor,
        threshold,
    })
}

/// Smallest n0 with n <= 2^(gap*n) for every n >= n0, certified by an
/// induction step: once (n+1)^b <= 2^a * n^b holds at some n it holds for
/// all larger n (the ratio (n+1)/n decreases), so the scan may stop at
/// the first passing n beyond the last failure.
fn absorption_floor(gap: &Rational) -> Result<u64, AppError> {
    let a = gap.numer().to_u64().expect("validated numerator");
    let b = u32::try_from(gap.denom().to_u64().expect("validated denominator"))
        .expect("validated denominator");
    let holds = |n: u64| BigUint::from(n).pow(b) <= (BigUint::one() << (a * n));
    let induction_step = |n: u64| BigUint::from(n + 1).pow(b) <= (BigUint::from(n).pow(b) << a);
    let mut last_fail = 0;
    for n in 1..1_000_000u64 {
        if !holds(n) {
            last_fail = n;
        } else if induction_step(n) {
            return Ok(last_fail + 1);
        }
    }
    Err(AppError::Invalid(
        "absorption-floor search exceeded its guard".into(),
    ))
}

/// Size of a clause of original length n after removing its
/// floor(delta*n) lowest-index variables.
pub fn trimmed_size(n: u64, delta: &Rational) -> u64 {
    n - trim_count(n, delta)
}

/// floor(delta * n): how many variables trimming removes from a clause of
/// size n.
pub fn trim_count(n: u64, delta: &Rational) -> u64 {
    let num = delta.numer().to_u128().expect("delta numerator fits");
    let den = delta.denom().to_u128().expect("delta denominator fits");
    ((num * n as u128) / den) as u64
}

/// Largest length n with floor(delta*n) <= v, so clauses longer than this
/// have all of their first v+1 positions trimmed away.
pub fn max_length_touching(v: u64, delta: &Rational) -> u64 {
    let num = delta.numer().to_u128().expect("delta numerator fits");
    let den = delta.denom().to_u128().expect("delta denominator fits");
    (((v as u128 + 1) * den - 1) / num) as u64
}

/// Shared cache of the dyadic ceil-rounded weights 2^(-beta''*k).
#[derive(Debug)]
pub struct WeightTable {
    exponent: Rational,
    cache: Mutex<BTreeMap<u64, Rational>>,
}

impl WeightTable {
    pub fn new(beta_trim: Rational) -> Self {
        WeightTable {
            exponent: beta_trim,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn weight(&self, size: u64) -> Rational {
        let mut cache = self.cache.lock().expect("weight cache poisoned");
        cache
            .entry(size)
            .or_insert_with(|| {
                dyadic_ceil_pow2_neg(&(&self.exponent * Rational::from_integer(size.into())), 64)
            })
            .clone()
    }
}

impl TrimChain {
    /// Upper bound on the sum over k >= trimmed_floor of
    /// 2^(alpha''*k) * w(k), the weighted neighbor tail every clause of
    /// the family sees: w(k) <= (1+2^-64) * 2^(-beta''*k) makes the sum a
    /// geometric series in 2^(-gamma'').
    pub fn neighbor_tail_ub(&self) -> Rational {
        let numer_ub = dyadic_ceil_pow2_neg(
            &(&self.gamma_trim * Rational::from_integer(self.trimmed_floor.into())),
            64,
        );
        let base_ub = dyadic_ceil_pow2_neg(&self.gamma_trim, 64);
        let denom_lb = Rational::one() - base_ub;
        assert!(denom_lb > Rational::zero(), "geometric base reached one");
        weight_inflation() * numer_ub / denom_lb
    }

    /// Sound upper bound on the sum of x/(1-x) over all events containing
    /// any one variable: at most 2^(alpha''*k) size-k events touch a
    /// variable, and every weight is at most 1/2, so x/(1-x) <= 2x
    /// termwise.
    pub fn var_weight_ub(&self) -> Rational {
        rat(2, 1) * self.neighbor_tail_ub()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_size_threshold_at_half_sparsity() {
        assert_eq!(min_clause_size(&rat(1, 2), &rat(0, 1)).unwrap(), 22);
        assert!(clause_size_inequality_holds(&rat(1, 2), &rat(0, 1), 22).unwrap());
        assert!(!clause_size_inequality_holds(&rat(1, 2), &rat(0, 1), 21).unwrap());
    }

    #[test]
    fn thresholds_shrink_with_sparsity() {
        let mut last = u64::MAX;
        for a in (1..10).rev() {
            let n = min_clause_size(&rat(a, 10), &rat(0, 1)).unwrap();
            assert!(n <= last, "alpha {a}/10 gave {n} > {last}");
            last = n;
        }
    }

    #[test]
    fn minimality_holds_on_a_grid() {
        for (a, e) in [(1, 0), (3, 0), (5, 0), (7, 0), (3, 1), (5, 1)] {
            let alpha = rat(a, 10);
            let eps = rat(e, 10);
            let n = min_clause_size(&alpha, &eps).unwrap();
            assert!(clause_size_inequality_holds(&alpha, &eps, n).unwrap());
            if n > 1 {
                assert!(!clause_size_inequality_holds(&alpha, &eps, n - 1).unwrap());
            }
        }
    }

    #[test]
    fn dense_families_have_no_finite_threshold() {
        // At alpha = 9/10, eps = 1/10: (1-eps) * 2^(-19/20) < 1/2.
        match min_clause_size(&rat(9, 10), &rat(1, 10)) {
            Err(AppError::NoFiniteClauseSize { .. }) => {}
            other => panic!("expected no finite threshold, got {other:?}"),
        }
    }

    #[test]
    fn profile_check_passes_the_saturated_example() {
        // k = 22 at alpha = 1/2, eps = 0, with the profile filled to its
        // cap floor(22 * 2^(m/2)) for m in 22..=60.
        let params = CnfFamilyParams::derive(&rat(1, 2), &rat(0, 1)).unwrap();
        assert_eq!(params.clause_threshold, 22);
        let mut profile = BTreeMap::new();
        for m in 22..=60u64 {
            let squared = BigUint::from(22u64 * 22) << m;
            profile.insert(m, squared.sqrt().to_u64().unwrap());
        }
        let report = check_varsize_condition(&params, 22, &profile).unwrap();
        assert!(report.pass, "lhs ~ {}", report.lhs_estimate);
    }

    #[test]
    fn empty_profile_reduces_to_the_bare_inequality() {
        let params = CnfFamilyParams::derive(&rat(1, 2), &rat(0, 1)).unwrap();
        let report = check_varsize_condition(&params, 22, &BTreeMap::new()).unwrap();
        assert!(report.pass);
        let small = check_varsize_condition(&params, 1, &BTreeMap::new()).unwrap();
        assert!(small.pass);
    }

    #[test]
    fn oversized_profiles_are_rejected() {
        let params = CnfFamilyParams::derive(&rat(1, 2), &rat(0, 1)).unwrap();
        let mut profile = BTreeMap::new();
        profile.insert(10u64, u64::MAX);
        match check_varsize_condition(&params, 22, &profile) {
            Err(AppError::ProfileExceeded { size: 10, .. }) => {}
            other => panic!("expected profile rejection, got {other:?}"),
        }
    }

    #[test]
    fn zero_runs_chain_matches_frozen_values() {
        let chain = derive_trim_chain(&rat(1, 8), &rat(1, 10)).unwrap();
        assert_eq!(chain.alpha_absorb, rat(11, 32));
        assert_eq!(chain.delta, rat(7, 64));
        assert_eq!(chain.rho, rat(22, 57));
        assert_eq!(chain.alpha_trim, rat(41, 76));
        assert_eq!(chain.beta_trim, rat(117, 152));
        assert_eq!(chain.gamma_trim, rat(35, 152));
        assert_eq!(chain.multiplicity_floor, 7);
        assert_eq!(chain.lll_floor, 31);
        assert_eq!(chain.trimmed_floor, 31);
        assert_eq!(chain.absorb_floor, 20);
        assert_eq!(chain.threshold, 34);
    }

    #[test]
    fn trimming_arithmetic_matches_the_chain() {
        let delta = rat(7, 64);
        assert_eq!(trim_count(34, &delta), 3);
        assert_eq!(trimmed_size(34, &delta), 31);
        assert_eq!(trimmed_size(33, &delta), 30);
        assert_eq!(max_length_touching(0, &delta), 9);
        assert_eq!(max_length_touching(3, &delta), 36);
        for v in 0..50 {
            let n = max_length_touching(v, &delta);
            assert!(trim_count(n, &delta) <= v);
            assert!(trim_count(n + 1, &delta) > v);
        }
    }

    #[test]
    fn weights_round_up_within_the_inflation_budget() {
        let chain = derive_trim_chain(&rat(1, 8), &rat(1, 10)).unwrap();
        let table = WeightTable::new(chain.beta_trim.clone());
        for k in [31u64, 32, 40, 64] {
            let w = table.weight(k);
            let e = &chain.beta_trim * Rational::from_integer(k.into());
            let lower = crate::pow2::dyadic_floor_pow2_neg(&e, 80);
            assert!(w >= lower, "weight below its target at size {k}");
            assert!(
                w <= lower * weight_inflation() * weight_inflation(),
                "weight too far above its target at size {k}"
            );
            assert!(w <= rat(1, 2));
        }
    }

    #[test]
    fn tail_bound_dominates_the_exact_partial_sum() {
        let chain = derive_trim_chain(&rat(1, 8), &rat(1, 10)).unwrap();
        let table = WeightTable::new(chain.beta_trim.clone());
        let ub = chain.neighbor_tail_ub();
        let q = chain.alpha_trim.denom().to_u64().unwrap();
        let mut partial = Pow2::rational(q, Rational::zero());
        for k in chain.trimmed_floor..chain.trimmed_floor + 40 {
            let count_cap =
                Pow2::two_pow(q, &(&chain.alpha_trim * Rational::from_integer(k.into())));
            partial = partial.add(&count_cap.mul(&Pow2::rational(q, table.weight(k))));
        }
        assert!(Pow2::rational(q, ub.clone()).ge(&partial));
        assert_eq!(chain.var_weight_ub(), ub * rat(2, 1));
    }
}
