//! Rigorous value containers per place: exact-endpoint intervals at the
//! archimedean place, approximant-plus-valuation-bound balls at a p-adic
//! place. Operations never shrink containment; `compress` rounds interval
//! endpoints outward to dyadic rationals to keep denominators bounded.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::places::{prime_power, valuation, Place};
use crate::rational::{pow2, Rat};

/// Default fractional-bit budget for interval compression.
pub const DEFAULT_COMPRESS_BITS: u32 = 128;

/// A rigorous enclosure of a single value in the completion at one place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enclosure {
    /// lo <= value <= hi, endpoints exact rationals.
    Real { lo: Rat, hi: Rat },
    /// |value - approx|_p <= p^(-err_val); `err_val: None` means exact.
    PAdic {
        p: u64,
        approx: Rat,
        err_val: Option<i64>,
    },
}

impl Enclosure {
    pub fn exact(place: &Place, value: Rat) -> Self {
        match place {
            Place::Infinite => Enclosure::Real {
                lo: value.clone(),
                hi: value,
            },
            Place::Prime(p) => Enclosure::PAdic {
                p: *p,
                approx: value,
                err_val: None,
            },
        }
    }

    pub fn zero(place: &Place) -> Self {
        Enclosure::exact(place, Rat::zero())
    }

    pub fn interval(lo: Rat, hi: Rat) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain("interval endpoints out of order".into()));
        }
        Ok(Enclosure::Real { lo, hi })
    }

    pub fn padic_ball(p: u64, approx: Rat, err_val: i64) -> Self {
        Enclosure::PAdic {
            p,
            approx,
            err_val: Some(err_val),
        }
    }

    pub fn place(&self) -> Place {
        match self {
            Enclosure::Real { .. } => Place::Infinite,
            Enclosure::PAdic { p, .. } => Place::Prime(*p),
        }
    }

    fn check_same_place(&self, other: &Enclosure) -> Result<()> {
        if self.place() != other.place() {
            return Err(Error::PlaceMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Enclosure) -> Result<Enclosure> {
        self.check_same_place(other)?;
        Ok(match (self, other) {
            (Enclosure::Real { lo: a, hi: b }, Enclosure::Real { lo: c, hi: d }) => {
                Enclosure::Real { lo: a + c, hi: b + d }
            }
            (
                Enclosure::PAdic { p, approx: a, err_val: n1 },
                Enclosure::PAdic { approx: b, err_val: n2, .. },
            ) => Enclosure::PAdic {
                p: *p,
                approx: a + b,
                // ultrametric: the error bound of a sum is the min of bounds
                err_val: opt_min(*n1, *n2),
            },
            _ => unreachable!(),
        })
    }

    pub fn negate(&self) -> Enclosure {
        match self {
            Enclosure::Real { lo, hi } => Enclosure::Real { lo: -hi, hi: -lo },
            Enclosure::PAdic { p, approx, err_val } => Enclosure::PAdic {
                p: *p,
                approx: -approx,
                err_val: *err_val,
            },
        }
    }

    pub fn sub(&self, other: &Enclosure) -> Result<Enclosure> {
        self.add(&other.negate())
    }

    pub fn scale(&self, c: &Rat) -> Enclosure {
        match self {
            Enclosure::Real { lo, hi } => {
                if c.is_negative() {
                    Enclosure::Real { lo: hi * c, hi: lo * c }
                } else {
                    Enclosure::Real { lo: lo * c, hi: hi * c }
                }
            }
            Enclosure::PAdic { p, approx, err_val } => {
                if c.is_zero() {
                    return Enclosure::exact(&self.place(), Rat::zero());
                }
                let vc = valuation(*p, c).expect("nonzero scalar");
                Enclosure::PAdic {
                    p: *p,
                    approx: approx * c,
                    err_val: err_val.map(|n| n + vc),
                }
            }
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Result<Enclosure> {
        self.check_same_place(other)?;
        Ok(match (self, other) {
            (Enclosure::Real { lo: a, hi: b }, Enclosure::Real { lo: c, hi: d }) => {
                let mut products = [a * c, a * d, b * c, b * d];
                products.sort();
                let [lo, .., hi] = products;
                Enclosure::Real { lo, hi }
            }
            (
                Enclosure::PAdic { p, approx: a1, err_val: n1 },
                Enclosure::PAdic { approx: a2, err_val: n2, .. },
            ) => {
                // v(v1*v2 - a1*a2) >= min(min(v(a1), N1) + N2, v(a2) + N1)
                let v1 = valuation(*p, a1);
                let v2 = valuation(*p, a2);
                let err_val = match (*n1, *n2) {
                    (None, None) => None,
                    (Some(nn1), None) => opt_add(v2, nn1),
                    (None, Some(nn2)) => opt_add(v1, nn2),
                    (Some(nn1), Some(nn2)) => {
                        let left = opt_add(opt_min(v1, Some(nn1)), nn2);
                        let right = opt_add(v2, nn1);
                        match (left, right) {
                            (None, r) => r,
                            (l, None) => l,
                            (Some(l), Some(r)) => Some(l.min(r)),
                        }
                    }
                };
                Enclosure::PAdic {
                    p: *p,
                    approx: a1 * a2,
                    err_val,
                }
            }
            _ => unreachable!(),
        })
    }

    /// Exact upper bound on |value|_w for every value in the enclosure.
    pub fn abs_upper(&self) -> Rat {
        match self {
            Enclosure::Real { lo, hi } => lo.abs().max(hi.abs()),
            Enclosure::PAdic { p, approx, err_val } => {
                let va = valuation(*p, approx);
                match opt_min(va, *err_val) {
                    None => Rat::zero(),
                    Some(v) => prime_power(*p, -v),
                }
            }
        }
    }

    /// Exact lower bound on |value|_w valid for every contained value; zero
    /// when the enclosure cannot exclude zero.
    pub fn abs_lower(&self) -> Rat {
        match self {
            Enclosure::Real { lo, hi } => {
                if lo.is_negative() && !hi.is_negative() {
                    Rat::zero()
                } else {
                    lo.abs().min(hi.abs())
                }
            }
            Enclosure::PAdic { p, approx, err_val } => {
                // if v(approx) < N the ultrametric pins |value| = |approx|
                let va = valuation(*p, approx);
                match (va, err_val) {
                    (Some(v), None) => prime_power(*p, -v),
                    (Some(v), Some(n)) if v < *n => prime_power(*p, -v),
                    _ => Rat::zero(),
                }
            }
        }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        match self {
            Enclosure::Real { lo, hi } => lo <= x && x <= hi,
            Enclosure::PAdic { p, approx, err_val } => {
                let diff = x - approx;
                match (valuation(*p, &diff), err_val) {
                    (None, _) => true,
                    (Some(_), None) => false,
                    (Some(v), Some(n)) => v >= *n,
                }
            }
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rat::zero())
    }

    /// Diameter of the enclosure as a rational (p-adic: p^(-err_val)).
    pub fn width(&self) -> Rat {
        match self {
            Enclosure::Real { lo, hi } => hi - lo,
            Enclosure::PAdic { p, err_val, .. } => match err_val {
                None => Rat::zero(),
                Some(n) => prime_power(*p, -*n),
            },
        }
    }

    pub fn width_within(&self, precision_bits: u32) -> bool {
        self.width() <= pow2(-(precision_bits as i64))
    }

    /// Bounded-size representative that still contains the value: intervals
    /// are rounded outward to dyadic endpoints with at most `bits` fractional
    /// bits; p-adic approximants are reduced modulo p^err_val.
    pub fn compress(&self, bits: u32) -> Enclosure {
        match self {
            Enclosure::Real { lo, hi } => Enclosure::Real {
                lo: dyadic_floor(lo, bits),
                hi: dyadic_ceil(hi, bits),
            },
            Enclosure::PAdic { p, approx, err_val } => {
                let Some(n) = err_val else { return self.clone() };
                if *n <= 0 {
                    return self.clone();
                }
                match reduce_mod_pk(*p, approx, *n as u32) {
                    Some(reduced) => Enclosure::PAdic {
                        p: *p,
                        approx: reduced,
                        err_val: *err_val,
                    },
                    None => self.clone(),
                }
            }
        }
    }
}

fn opt_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(a), Some(b)) => Some(a.min(b)),
    }
}

fn opt_add(a: Option<i64>, b: i64) -> Option<i64> {
    a.map(|x| x + b)
}

/// Largest multiple of 2^-bits that is <= x.
pub fn dyadic_floor(x: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let scaled = x * Rat::from_integer(scale.clone());
    Rat::new(scaled.floor().to_integer(), scale)
}

/// Smallest multiple of 2^-bits that is >= x.
pub fn dyadic_ceil(x: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let scaled = x * Rat::from_integer(scale.clone());
    Rat::new(scaled.ceil().to_integer(), scale)
}

/// Canonical representative of x modulo p^k in [0, p^k), when x is
/// p-integral; `None` when the denominator carries p.
fn reduce_mod_pk(p: u64, x: &Rat, k: u32) -> Option<Rat> {
    let pk = BigInt::from(p).pow(k);
    let den = x.denom();
    if den.gcd(&BigInt::from(p)) != BigInt::one() {
        return None;
    }
    let inv = mod_inverse(den, &pk)?;
    let r = ((x.numer() * inv) % &pk + &pk) % &pk;
    Some(Rat::from_integer(r))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd != BigInt::one() {
        return None;
    }
    Some(((e.x % m) + m) % m)
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Enclosure::Real { lo, hi } => write!(f, "[{lo}, {hi}]"),
            Enclosure::PAdic { p, approx, err_val } => match err_val {
                None => write!(f, "{approx} (exact, {p}-adic)"),
                Some(n) => write!(f, "{approx} + O({p}^{n})"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    #[test]
    fn interval_product_example() {
        let a = Enclosure::interval(rat(1), rat(2)).unwrap();
        let b = Enclosure::interval(rat(-1), rat(1)).unwrap();
        assert_eq!(
            a.mul(&b).unwrap(),
            Enclosure::interval(rat(-2), rat(2)).unwrap()
        );
    }

    #[test]
    fn padic_ultrametric_add() {
        let a = Enclosure::padic_ball(2, rat(11), 6);
        let b = Enclosure::padic_ball(2, rat(0), 4);
        match a.add(&b).unwrap() {
            Enclosure::PAdic { approx, err_val, .. } => {
                assert_eq!(approx, rat(11));
                assert_eq!(err_val, Some(4));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn compress_dyadic_example() {
        let e = Enclosure::interval(ratio(1, 3), ratio(1, 3)).unwrap();
        let c = e.compress(4);
        assert_eq!(c, Enclosure::interval(ratio(5, 16), ratio(6, 16)).unwrap());
        assert!(c.contains(&ratio(1, 3)));
    }

    #[test]
    fn compress_padic_keeps_containment() {
        // value 3 + 2^5 known mod 2^4: approximant 35 reduces to 3
        let e = Enclosure::padic_ball(2, rat(35), 4);
        let c = e.compress(8);
        assert!(c.contains(&rat(35)));
        assert!(c.contains(&rat(3)));
        match c {
            Enclosure::PAdic { approx, .. } => assert_eq!(approx, rat(3)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn place_mismatch_rejected() {
        let a = Enclosure::exact(&Place::Infinite, rat(1));
        let b = Enclosure::exact(&Place::Prime(2), rat(1));
        assert!(matches!(a.add(&b), Err(Error::PlaceMismatch)));
    }

    #[test]
    fn abs_bounds() {
        let e = Enclosure::interval(ratio(-1, 2), rat(3)).unwrap();
        assert_eq!(e.abs_upper(), rat(3));
        assert_eq!(e.abs_lower(), rat(0));
        let e = Enclosure::interval(rat(2), rat(3)).unwrap();
        assert_eq!(e.abs_lower(), rat(2));

        // |12|_2 = 1/4 pinned when the ball radius is smaller
        let e = Enclosure::padic_ball(2, rat(12), 5);
        assert_eq!(e.abs_upper(), ratio(1, 4));
        assert_eq!(e.abs_lower(), ratio(1, 4));
        let wide = Enclosure::padic_ball(2, rat(12), 2);
        assert_eq!(wide.abs_lower(), rat(0));
        assert_eq!(wide.abs_upper(), ratio(1, 4));
    }

    #[test]
    fn padic_scale_shifts_bound() {
        let e = Enclosure::padic_ball(2, rat(3), 4);
        match e.scale(&ratio(1, 2)) {
            Enclosure::PAdic { approx, err_val, .. } => {
                assert_eq!(approx, ratio(3, 2));
                assert_eq!(err_val, Some(3));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn containment_under_compression_chain() {
        let third = ratio(1, 3);
        let e = Enclosure::exact(&Place::Infinite, third.clone());
        let f = e.mul(&e).unwrap().add(&e).unwrap().compress(40);
        let expected = &third * &third + &third;
        assert!(f.contains(&expected));
        assert!(f.width() <= pow2(-38));
    }
}
