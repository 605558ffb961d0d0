//! Dense polynomials with exact rational coefficients, plus the place-wise
//! polynomial norms |A|_v (coefficient sum at the archimedean place, max at
//! finite places) and the heights built from them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::places::{abs_value, Place};
use crate::rational::Rat;

/// Polynomial in one variable over Q. Coefficients are indexed by exponent
/// and kept trimmed, so the zero polynomial is the empty vector and its
/// degree is the distinguished `None` ("minus infinity").
#[derive(Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = QPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    /// c * z^k.
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        QPoly { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = QPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` as the sentinel for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Least exponent with a nonzero coefficient; `None` for zero.
    pub fn ord(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_u64(&self, n: u64) -> Rat {
        self.eval(&Rat::from_integer(BigInt::from(n)))
    }

    pub fn scale(&self, c: &Rat) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// self * c * z^k.
    pub fn mul_monomial(&self, c: &Rat, k: usize) -> QPoly {
        if c.is_zero() || self.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + k];
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs[i + k] = a * c;
        }
        QPoly { coeffs }
    }

    /// Drop all terms of exponent >= cap (partial arithmetic for order
    /// computations on very long forms).
    pub fn truncated(&self, cap: usize) -> QPoly {
        if self.coeffs.len() <= cap {
            return self.clone();
        }
        QPoly::from_coeffs(self.coeffs[..cap].to_vec())
    }

    /// Sum of archimedean absolute values of the coefficients (the length
    /// function; over Q the house of a coefficient is its absolute value).
    pub fn length(&self) -> Rat {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// 1 + max |c_i / lead|: every integer root has absolute value below it.
    pub fn root_bound(&self) -> Result<Rat> {
        let lead = self
            .leading()
            .ok_or_else(|| Error::Domain("root bound of zero polynomial".into()))?;
        let mut best = Rat::zero();
        for c in &self.coeffs {
            let r = (c / lead).abs();
            if r > best {
                best = r;
            }
        }
        Ok(best + Rat::one())
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + rhs.coeff(i));
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) - rhs.coeff(i));
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// |A|_v over a coefficient list: sum of |c|_v at the archimedean place, max
/// of |c|_v at a finite place. Errors on the zero list.
pub fn slice_norm_v(coeffs: &[Rat], v: &Place) -> Result<Rat> {
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(Error::Domain("norm of zero polynomial undefined".into()));
    }
    Ok(match v {
        Place::Infinite => coeffs.iter().map(|c| c.abs()).sum(),
        Place::Prime(_) => {
            let mut best = Rat::zero();
            for c in coeffs {
                let a = abs_value(v, c);
                if a > best {
                    best = a;
                }
            }
            best
        }
    })
}

/// Product over all finite places of |A|_v for a coefficient list: with the
/// coefficients written over their lcm denominator L as integers N_i, the
/// max-norms telescope to L / gcd(N_i), exactly as for vectors.
fn slice_finite_product(coeffs: &[Rat]) -> Result<Rat> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for x in coeffs.iter().filter(|x| !x.is_zero()) {
        lcm = lcm.lcm(x.denom());
    }
    let mut gcd = BigInt::zero();
    for x in coeffs.iter().filter(|x| !x.is_zero()) {
        gcd = gcd.gcd(&(x.numer() * (&lcm / x.denom())));
    }
    if gcd.is_zero() {
        return Err(Error::Domain("norm of zero polynomial undefined".into()));
    }
    Ok(Rat::new(lcm, gcd))
}

/// H(A) = prod_v |A|_v over the coefficient list of a nonzero polynomial
/// (or linear form), exact.
pub fn slice_height(coeffs: &[Rat]) -> Result<Rat> {
    Ok(slice_norm_v(coeffs, &Place::Infinite)? * slice_finite_product(coeffs)?)
}

/// H_w(A) = H(A) / |A|_w.
pub fn slice_height_excluding(coeffs: &[Rat], w: &Place) -> Result<Rat> {
    Ok(slice_height(coeffs)? / slice_norm_v(coeffs, w)?)
}

pub fn poly_norm_v(p: &QPoly, v: &Place) -> Result<Rat> {
    slice_norm_v(p.coeffs(), v)
}

pub fn height_poly(p: &QPoly) -> Result<Rat> {
    slice_height(p.coeffs())
}

pub fn height_poly_excluding(p: &QPoly, w: &Place) -> Result<Rat> {
    slice_height_excluding(p.coeffs(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn sample() -> QPoly {
        // 3z^2 - z/2
        QPoly::from_coeffs(vec![rat(0), ratio(-1, 2), rat(3)])
    }

    #[test]
    fn degree_sentinels() {
        assert_eq!(QPoly::zero().degree(), None);
        assert_eq!(QPoly::zero().ord(), None);
        assert_eq!(QPoly::one().degree(), Some(0));
        assert_eq!(sample().degree(), Some(2));
        assert_eq!(sample().ord(), Some(1));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(poly_norm_v(&sample(), &Place::Infinite).unwrap(), ratio(7, 2));
        assert_eq!(poly_norm_v(&sample(), &Place::Prime(2)).unwrap(), rat(2));
        let z = QPoly::monomial(rat(1), 1);
        assert_eq!(poly_norm_v(&z, &Place::Infinite).unwrap(), rat(1));
        assert_eq!(poly_norm_v(&z, &Place::Prime(7)).unwrap(), rat(1));
        assert!(poly_norm_v(&QPoly::zero(), &Place::Infinite).is_err());
    }

    #[test]
    fn height_examples() {
        // 2x0 + 3x1 as coefficient list (2, 3)
        assert_eq!(slice_height(&[rat(2), rat(3)]).unwrap(), rat(5));
        // x0/2: |.|_2 = 2, |.|_inf = 1/2, product 1
        assert_eq!(slice_height(&[ratio(1, 2)]).unwrap(), rat(1));
        assert_eq!(
            slice_height_excluding(&[rat(2), rat(3)], &Place::Infinite).unwrap(),
            rat(1)
        );
    }

    #[test]
    fn length_examples() {
        assert_eq!(sample().length(), ratio(7, 2));
        assert_eq!(QPoly::zero().length(), rat(0));
        let p = QPoly::from_coeffs(vec![rat(1), rat(0), rat(1), rat(1)]);
        assert_eq!(p.length(), rat(3));
    }

    #[test]
    fn arithmetic_and_eval() {
        let p = sample();
        let q = QPoly::from_coeffs(vec![rat(1), rat(1)]);
        assert_eq!((&p * &q).degree(), Some(3));
        assert_eq!((&p + &-&p), QPoly::zero());
        assert_eq!(p.eval(&rat(2)), rat(11));
        assert_eq!(p.mul_monomial(&rat(2), 3).degree(), Some(5));
        assert_eq!((&p - &p).degree(), None);
    }

    #[test]
    fn root_bound_covers_integer_roots() {
        // (z - 5)(z + 3) = z^2 - 2z - 15
        let p = QPoly::from_coeffs(vec![rat(-15), rat(-2), rat(1)]);
        let b = p.root_bound().unwrap();
        assert!(b > rat(5));
    }
}
