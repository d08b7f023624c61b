//! Exact arithmetic for sums of rational multiples of 2^(rational exponent).
//!
//! The clause-size inequalities compare expressions like
//! (1-eps) * 2^(-beta) * (1 - 2^(-gamma*N)) against rationals, where beta
//! and gamma share a denominator q. Writing t = 2^(1/q), every such
//! expression is a polynomial in t with rational coefficients, reduced by
//! t^q = 2. Since x^q - 2 is irreducible (Eisenstein at 2), a nonzero
//! reduced polynomial has a nonzero value, so signs are decidable by
//! shrinking a rational interval around t.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use lll_core::Rational;

/// 2^k for a signed integer k.
fn pow2_int(k: &BigInt) -> Rational {
    let mag = k
        .abs()
        .to_u64()
        .expect("power-of-two exponent out of range");
    let value = BigInt::from(BigUint::one() << mag);
    if k.is_negative() {
        Rational::new(BigInt::one(), value)
    } else {
        Rational::from_integer(value)
    }
}

/// Element of Q(2^(1/q)) as a sparse polynomial in t = 2^(1/q), exponents
/// in 0..q, reduced by t^q = 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pow2 {
    q: u64,
    terms: BTreeMap<u64, Rational>,
}

impl Pow2 {
    pub fn rational(q: u64, value: Rational) -> Self {
        assert!(q >= 1, "root order must be positive");
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(0, value);
        }
        Pow2 { q, terms }
    }

    /// 2^e where e*q must be an integer.
    pub fn two_pow(q: u64, e: &Rational) -> Self {
        assert!(q >= 1, "root order must be positive");
        let scaled = e * Rational::from_integer(q.into());
        assert!(
            scaled.is_integer(),
            "exponent {e} is not a multiple of 1/{q}"
        );
        let n = scaled.to_integer();
        let (k, r) = n.div_mod_floor(&BigInt::from(q));
        let exponent = r.to_u64().expect("reduced exponent fits");
        let mut terms = BTreeMap::new();
        terms.insert(exponent, pow2_int(&k));
        Pow2 { q, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(terms: &mut BTreeMap<u64, Rational>, exp: u64, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(exp) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Pow2) -> Pow2 {
        assert_eq!(self.q, other.q, "mismatched root orders");
        let mut terms = self.terms.clone();
        for (&exp, coeff) in &other.terms {
            Self::insert(&mut terms, exp, coeff.clone());
        }
        Pow2 { q: self.q, terms }
    }

    pub fn sub(&self, other: &Pow2) -> Pow2 {
        assert_eq!(self.q, other.q, "mismatched root orders");
        let mut terms = self.terms.clone();
        for (&exp, coeff) in &other.terms {
            Self::insert(&mut terms, exp, -coeff.clone());
        }
        Pow2 { q: self.q, terms }
    }

    pub fn mul(&self, other: &Pow2) -> Pow2 {
        assert_eq!(self.q, other.q, "mismatched root orders");
        let two = Rational::from_integer(2.into());
        let mut terms = BTreeMap::new();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &other.terms {
                let mut exp = ea + eb;
                let mut coeff = ca * cb;
                if exp >= self.q {
                    exp -= self.q;
                    coeff *= &two;
                }
                Self::insert(&mut terms, exp, coeff);
            }
        }
        Pow2 { q: self.q, terms }
    }

    /// Sign of the real value at t = 2^(1/q): -1, 0, or 1.
    pub fn sign(&self) -> i8 {
        if self.terms.is_empty() {
            return 0;
        }
        let one = Rational::one();
        let two = Rational::from_integer(2.into());
        let mut lo = one;
        let mut hi = two.clone();
        for _ in 0..100_000 {
            let (sum_lo, sum_hi) = self.eval_interval(&lo, &hi);
            if sum_lo.is_positive() {
                return 1;
            }
            if sum_hi.is_negative() {
                return -1;
            }
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            let mut mid_pow = Rational::one();
            for _ in 0..self.q {
                mid_pow *= &mid;
            }
            if mid_pow <= two {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        unreachable!("interval refinement failed to separate a nonzero value from zero")
    }

    fn eval_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut sum_lo = Rational::zero();
        let mut sum_hi = Rational::zero();
        let mut pow_lo = Rational::one();
        let mut pow_hi = Rational::one();
        let mut at = 0u64;
        for (&exp, coeff) in &self.terms {
            while at < exp {
                pow_lo *= lo;
                pow_hi *= hi;
                at += 1;
            }
            if coeff.is_positive() {
                sum_lo += coeff * &pow_lo;
                sum_hi += coeff * &pow_hi;
            } else {
                sum_lo += coeff * &pow_hi;
                sum_hi += coeff * &pow_lo;
            }
        }
        (sum_lo, sum_hi)
    }

    pub fn ge(&self, other: &Pow2) -> bool {
        self.sub(other).sign() >= 0
    }

    pub fn le(&self, other: &Pow2) -> bool {
        self.sub(other).sign() <= 0
    }

    /// Approximate value for reports; never used in decisions.
    pub fn to_f64(&self) -> f64 {
        let root = 2f64.powf(1.0 / self.q as f64);
        self.terms
            .iter()
            .map(|(&exp, coeff)| {
                let c = coeff.numer().to_f64().unwrap_or(f64::NAN)
                    / coeff.denom().to_f64().unwrap_or(f64::NAN);
                c * root.powi(exp as i32)
            })
            .sum()
    }
}

/// Smallest multiple of 2^-(ceil(e)+extra) that is >= 2^(-e), for e >= 0.
/// The result r satisfies 2^(-e) <= r <= 2^(-e) * (1 + 2^(-extra)).
pub fn dyadic_ceil_pow2_neg(e: &Rational, extra: u64) -> Rational {
    let (root, frac_bits, exact) = dyadic_root(e, extra);
    let numer = if exact { root } else { root + BigUint::one() };
    Rational::new(numer.into(), BigInt::from(BigUint::one() << frac_bits))
}

/// Largest multiple of 2^-(ceil(e)+extra) that is <= 2^(-e), for e >= 0.
/// The result r satisfies 2^(-e) * (1 - 2^(-extra)) <= r <= 2^(-e).
pub fn dyadic_floor_pow2_neg(e: &Rational, extra: u64) -> Rational {
    let (root, frac_bits, _) = dyadic_root(e, extra);
    Rational::new(root.into(), BigInt::from(BigUint::one() << frac_bits))
}

/// floor(2^(F - e)) for F = ceil(e) + extra, via an exact integer b-th
/// root of 2^(F*b - a) where e = a/b. Returns (root, F, root is exact).
fn dyadic_root(e: &Rational, extra: u64) -> (BigUint, u64, bool) {
    assert!(!e.is_negative(), "exponent must be nonnegative");
    let f = e.ceil().to_integer().to_u64().expect("exponent in range") + extra;
    let a = e.numer().to_biguint().expect("nonnegative numerator");
    let b = e.denom().to_u64().expect("denominator in range");
    let m = f
        .checked_mul(b)
        .and_then(|fb| fb.checked_sub(a.to_u64().unwrap_or(u64::MAX)))
        .expect("scaled exponent in range");
    let x = BigUint::one() << m;
    let b32 = u32::try_from(b).expect("denominator fits in u32");
    let root = x.nth_root(b32);
    let exact = root.pow(b32) == x;
    (root, f, exact)
}
