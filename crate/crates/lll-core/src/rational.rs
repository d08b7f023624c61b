//! Exact rational arithmetic helpers.
//!
//! `Rational` is an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. Every probability, weight, and condition margin in
//! this workspace is one of these; floats appear only in statistical summaries
//! that never feed back into a decision.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Fraction from a signed integer pair. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^-e` as an exact fraction.
pub fn two_pow_neg(e: u64) -> Rational {
    let e = u32::try_from(e).expect("dyadic exponent too large");
    Rational::new(BigInt::one(), BigInt::from(2) << e >> 1)
}

/// `r^e` by repeated squaring.
pub fn pow_u64(r: &Rational, mut e: u64) -> Rational {
    let mut base = r.clone();
    let mut acc = Rational::one();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// True if the denominator is a power of two.
pub fn is_dyadic(r: &Rational) -> bool {
    let den = r.denom().magnitude();
    den.count_ones() == 1
}

/// Smallest integer `>= r`, as u64. Panics if negative or out of range.
pub fn ceil_u64(r: &Rational) -> u64 {
    assert!(!r.is_negative(), "ceil_u64 of a negative value");
    r.ceil()
        .to_integer()
        .to_u64()
        .expect("ceiling out of u64 range")
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Renders as `num/den` (always with an explicit denominator).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for statistical displays only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range fractions still have a well-defined sign.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_rational("729/10240").unwrap();
        assert_eq!(format_rational(&r), "729/10240");
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn parse_normalizes_to_lowest_terms() {
        let r = parse_rational("2/4").unwrap();
        assert_eq!(format_rational(&r), "1/2");
        let r = parse_rational("3/-6").unwrap();
        assert_eq!(format_rational(&r), "-1/2");
    }

    #[test]
    fn dyadic_detection() {
        assert!(is_dyadic(&rat(3, 8)));
        assert!(is_dyadic(&rat(1, 1)));
        assert!(!is_dyadic(&rat(1, 3)));
        assert!(!is_dyadic(&rat(5, 6)));
    }

    #[test]
    fn powers_and_ceilings() {
        assert_eq!(pow_u64(&rat(9, 10), 2), rat(81, 100));
        assert_eq!(pow_u64(&rat(9, 10), 0), rat(1, 1));
        assert_eq!(two_pow_neg(5), rat(1, 32));
        assert_eq!(two_pow_neg(0), rat(1, 1));
        assert_eq!(ceil_u64(&rat(400, 3)), 134);
        assert_eq!(ceil_u64(&rat(4, 2)), 2);
    }
}
