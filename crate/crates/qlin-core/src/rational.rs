//! Exact rational scalars and their "num/den" transport format.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored reduced with positive
/// denominator (enforced by the backing type).
pub type Rat = num_rational::BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse the lowest-terms string form used in every file format: "3", "-1/2".
pub fn parse_rat(s: &str) -> Result<Rat> {
    s.trim()
        .parse::<Rat>()
        .map_err(|e| Error::Validation(format!("invalid rational '{s}': {e}")))
}

/// Serialize in lowest terms; integers render without the "/1".
pub fn rat_string(x: &Rat) -> String {
    x.to_string()
}

/// 2^e as an exact rational, e of either sign.
pub fn pow2(e: i64) -> Rat {
    let one = BigInt::from(1);
    if e >= 0 {
        Rat::from_integer(one << (e as usize))
    } else {
        Rat::new(one.clone(), one << ((-e) as usize))
    }
}

/// q^e for rational q != 0 and integer e of either sign.
pub fn rat_pow(q: &Rat, e: i64) -> Rat {
    if e >= 0 {
        q.pow(e as i32)
    } else {
        q.pow(-(e as i32)).recip()
    }
}

/// Smallest integer k with x <= 2^k; defined for x > 0.
pub fn ceil_log2(x: &Rat) -> i64 {
    assert!(x.is_positive(), "ceil_log2 needs a positive input");
    let mut k = (x.numer().bits() as i64) - (x.denom().bits() as i64) + 1;
    while pow2(k - 1) >= *x {
        k -= 1;
    }
    k
}

/// Approximate base-2 logarithm for reporting; handles arbitrarily large
/// magnitudes by splitting off the bit length.
pub fn log2_approx(x: &Rat) -> f64 {
    assert!(x.is_positive(), "log2_approx needs a positive input");
    int_log2_approx(x.numer()) - int_log2_approx(x.denom())
}

fn int_log2_approx(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 52 {
        let v: u64 = (&n).try_into().expect("fits");
        return (v as f64).log2();
    }
    let shift = bits - 52;
    let top: u64 = (&(n >> shift)).try_into().expect("52 bits fit");
    (top as f64).log2() + shift as f64
}
