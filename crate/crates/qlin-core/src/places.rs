//! Places of Q, normalized absolute values, and multiplicative heights.
//!
//! The ground field is Q throughout, so every local degree is 1 and the
//! product formula `prod_v |x|_v = 1` holds over the finitely many places in
//! the support of a nonzero rational. Heights are computed exactly as
//! rationals via the closed form `H(a) = |a|_inf * lcm(dens) / gcd(nums)`,
//! which avoids integer factorization entirely.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A place of Q: the archimedean absolute value or a p-adic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Place {
    Infinite,
    Prime(u64),
}

impl Place {
    /// Local degree [Q_v : Q_v]; always 1 over Q.
    pub fn local_degree(&self) -> u32 {
        1
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinite)
    }

    /// Prime of a finite place, if any.
    pub fn prime(&self) -> Option<u64> {
        match self {
            Place::Infinite => None,
            Place::Prime(p) => Some(*p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "infinity"),
            Place::Prime(p) => write!(f, "p:{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "infinity" || s == "inf" {
            return Ok(Place::Infinite);
        }
        if let Some(rest) = s.strip_prefix("p:") {
            let p: u64 = rest
                .parse()
                .map_err(|_| Error::Validation(format!("invalid place '{s}'")))?;
            if !is_prime_u64(p) {
                return Err(Error::Validation(format!("{p} is not prime")));
            }
            return Ok(Place::Prime(p));
        }
        Err(Error::Validation(format!("invalid place '{s}'")))
    }
}

/// Deterministic primality by trial division; places carry desk-scale primes.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation of a nonzero integer; `None` encodes v_p(0) = +infinity.
pub fn int_valuation(p: u64, n: &BigInt) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0u64;
    let mut cur = n.clone();
    loop {
        let (q, r) = cur.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        cur = q;
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn valuation(p: u64, x: &Rat) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let vn = int_valuation(p, x.numer()).expect("nonzero numer") as i64;
    let vd = int_valuation(p, x.denom()).expect("nonzero denom") as i64;
    Some(vn - vd)
}

/// p^e as an exact rational, for e of either sign.
pub fn prime_power(p: u64, e: i64) -> Rat {
    let base = BigInt::from(p);
    if e >= 0 {
        Rat::from_integer(base.pow(e as u32))
    } else {
        Rat::new(BigInt::one(), base.pow((-e) as u32))
    }
}

/// Normalized absolute value |x|_v, exact. |p|_p = 1/p and |x|_inf = |x|.
pub fn abs_value(v: &Place, x: &Rat) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    match v {
        Place::Infinite => x.abs(),
        Place::Prime(p) => prime_power(*p, -valuation(*p, x).expect("nonzero")),
    }
}

/// Product of |a|_v over all finite places v, for the max-norm of a vector.
///
/// Writing every entry over the common denominator L = lcm(dens) with integer
/// numerators N_i, one has max_i |a_i|_p = |gcd_i N_i|_p / |L|_p for every
/// prime p, so the full finite product telescopes (by the product formula for
/// integers) to L / gcd_i N_i.
fn finite_places_max_product(vals: &[Rat]) -> Result<Rat> {
    let mut lcm = BigInt::one();
    for x in vals.iter().filter(|x| !x.is_zero()) {
        lcm = lcm.lcm(x.denom());
    }
    let mut gcd = BigInt::zero();
    for x in vals.iter().filter(|x| !x.is_zero()) {
        let scaled = x.numer() * (&lcm / x.denom());
        gcd = gcd.gcd(&scaled);
    }
    if gcd.is_zero() {
        return Err(Error::Domain("height of zero vector undefined".into()));
    }
    Ok(Rat::new(lcm, gcd))
}

/// Max-norm |a|_v of a vector of rationals at a place.
pub fn vector_norm_v(vals: &[Rat], v: &Place) -> Rat {
    let mut best = Rat::zero();
    for x in vals {
        let a = abs_value(v, x);
        if a > best {
            best = a;
        }
    }
    best
}

/// Absolute multiplicative height H(a) = prod_v max_i |a_i|_v of a nonzero
/// vector; scale-invariant, exact.
pub fn height_vector(vals: &[Rat]) -> Result<Rat> {
    let finite = finite_places_max_product(vals)?;
    Ok(vector_norm_v(vals, &Place::Infinite) * finite)
}

/// Height of a scalar, H(x) = H((1, x)); equals max(|num|, |den|) reduced.
pub fn height_scalar(x: &Rat) -> Rat {
    height_vector(&[Rat::one(), x.clone()]).expect("vector (1, x) is nonzero")
}

/// H with the place w left out: H_w(a) = H(a) / |a|_w (max-norm flavor).
pub fn height_vector_excluding(vals: &[Rat], w: &Place) -> Result<Rat> {
    let h = height_vector(vals)?;
    Ok(h / vector_norm_v(vals, w))
}

/// Prime support of a nonzero rational (primes dividing numerator or
/// denominator), by trial division. Desk-scale inputs only; used by the
/// product-formula and fundamental-inequality checks.
pub fn support_primes(x: &Rat) -> Result<Vec<u64>> {
    if x.is_zero() {
        return Err(Error::Domain("support of zero undefined".into()));
    }
    let mut primes = Vec::new();
    for part in [x.numer().abs(), x.denom().clone()] {
        let mut n: u64 = (&part)
            .try_into()
            .map_err(|_| Error::Domain("support factorization limited to u64 inputs".into()))?;
        let mut d = 2u64;
        while d.saturating_mul(d) <= n {
            if n % d == 0 {
                if !primes.contains(&d) {
                    primes.push(d);
                }
                while n % d == 0 {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 && !primes.contains(&n) {
            primes.push(n);
        }
    }
    primes.sort_unstable();
    Ok(primes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn abs_value_examples() {
        assert_eq!(abs_value(&Place::Prime(2), &rat(8)), ratio(1, 8));
        assert_eq!(abs_value(&Place::Infinite, &ratio(-3, 2)), ratio(3, 2));
        assert_eq!(abs_value(&Place::Prime(2), &ratio(3, 2)), rat(2));
        assert_eq!(abs_value(&Place::Prime(5), &rat(0)), rat(0));
    }

    #[test]
    fn height_examples() {
        assert_eq!(height_vector(&[rat(1), ratio(3, 2)]).unwrap(), rat(3));
        assert_eq!(height_vector(&[rat(2), rat(3)]).unwrap(), rat(3));
        assert_eq!(height_vector(&[rat(7), rat(7)]).unwrap(), rat(1));
        assert_eq!(height_scalar(&ratio(-22, 7)), rat(22));
        assert!(height_vector(&[rat(0), rat(0)]).is_err());
    }

    #[test]
    fn height_scale_invariance() {
        let v = [ratio(3, 4), rat(5), ratio(-1, 6)];
        let h = height_vector(&v).unwrap();
        let scaled: Vec<Rat> = v.iter().map(|x| x * ratio(-7, 11)).collect();
        assert_eq!(height_vector(&scaled).unwrap(), h);
    }

    #[test]
    fn product_formula_over_support() {
        let samples = [ratio(3, 2), ratio(-40, 9), rat(17), ratio(1, 1), ratio(-1, 360)];
        for x in &samples {
            let mut prod = abs_value(&Place::Infinite, x);
            for p in support_primes(x).unwrap() {
                prod *= abs_value(&Place::Prime(p), x);
            }
            assert_eq!(prod, rat(1), "product formula fails at {x}");
        }
    }

    #[test]
    fn place_parse_roundtrip() {
        assert_eq!("infinity".parse::<Place>().unwrap(), Place::Infinite);
        assert_eq!("p:7".parse::<Place>().unwrap(), Place::Prime(7));
        assert!("p:9".parse::<Place>().is_err());
        assert_eq!(Place::Prime(2).to_string(), "p:2");
        assert_eq!(Place::Infinite.local_degree(), 1);
    }
}
