//! Exact sampling of rational distributions from a bit tape.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use lll_core::rational::Rational;
use lll_core::types::{Value, VariableSpec};

use crate::error::MtError;
use crate::tape::Tape;

/// Draw one value of `spec` from `tape` by arithmetic decoding.
///
/// The tape bits read so far pin the sample point to a dyadic interval
/// `[a, a+1) / 2^b`; the interval is refined one bit at a time until it lies
/// entirely inside one value's cell of the cumulative distribution, and that
/// value is returned. The returned value has exactly probability
/// `distribution[v]` under unbiased bits, and the number of bits consumed is
/// finite with probability 1 (exactly `log2(range)` bits for uniform
/// power-of-two ranges).
///
/// Errors with [`MtError::TapeExhausted`] if a finite tape runs out before
/// the interval is resolved.
pub fn sample_variable(spec: &VariableSpec, tape: &mut dyn Tape) -> Result<Value, MtError> {
    // Cumulative boundaries c_0 = 0 < c_1 < ... < c_n = 1.
    let mut boundaries = Vec::with_capacity(spec.distribution.len() + 1);
    let mut acc = Rational::zero();
    boundaries.push(acc.clone());
    for p in &spec.distribution {
        acc += p;
        boundaries.push(acc.clone());
    }

    // Interval [a, a+1) / 2^b, compared against boundaries exactly:
    // a / 2^b >= num/den  <=>  a * den >= num * 2^b.
    let mut a = BigInt::zero();
    let mut two_b = BigInt::one();
    loop {
        if let Some(v) = locate(&boundaries, &a, &two_b) {
            return Ok(v);
        }
        let bit = tape
            .draw_bit(spec.index)
            .ok_or(MtError::TapeExhausted { var: spec.index })?;
        a <<= 1;
        if bit {
            a += 1;
        }
        two_b <<= 1;
    }
}

/// The value whose cell contains the whole interval `[a, a+1) / two_b`, if
/// the interval has narrowed that far.
fn locate(boundaries: &[Rational], a: &BigInt, two_b: &BigInt) -> Option<Value> {
    // Largest v with c_v <= a / 2^b, found by scanning; ranges are small.
    let mut v = 0;
    for (i, c) in boundaries.iter().enumerate().skip(1) {
        if c.numer() * two_b <= a * c.denom() {
            v = i;
        } else {
            break;
        }
    }
    // Contained iff (a+1) / 2^b <= c_{v+1}.
    let upper = &boundaries[v + 1];
    if (a + 1u32) * upper.denom() <= upper.numer() * two_b {
        Some(v as Value)
    } else {
        None
    }
}
