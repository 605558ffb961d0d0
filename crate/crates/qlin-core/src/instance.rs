//! Problem instances (P, Q, q, w): validation of the place condition on q,
//! case classification, derived constants, and the explicit dominance index
//! N* that turns the asymptotic nonvanishing of P(n, q^n) into a finite
//! check with a quantitative margin usable for series tail bounds.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::places::{valuation, Place};
use crate::poly::QPoly;
use crate::rational::{parse_rat, rat_pow, Rat};

/// Which operator pipeline a computation runs under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    A,
    B,
}

/// Case classification of an instance: condition (a) needs a constant top
/// coefficient p_d, condition (b) needs constant p_0 and Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    A,
    B,
    Both,
}

impl CaseTag {
    /// Default pipeline; when both conditions hold the symbolic-in-z case B
    /// is preferred since it yields exact z-order data.
    pub fn effective(&self, prefer: Option<Case>) -> Case {
        match (self, prefer) {
            (CaseTag::A, _) => Case::A,
            (CaseTag::B, _) => Case::B,
            (CaseTag::Both, Some(c)) => c,
            (CaseTag::Both, None) => Case::B,
        }
    }

    pub fn allows(&self, case: Case) -> bool {
        match self {
            CaseTag::A => case == Case::A,
            CaseTag::B => case == Case::B,
            CaseTag::Both => true,
        }
    }
}

/// On-disk form of an instance.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceSpec {
    /// Row nu holds the coefficients of p_nu(x), constant term first.
    #[serde(rename = "P")]
    pub p: Vec<Vec<String>>,
    #[serde(rename = "Q")]
    pub q_poly: Vec<String>,
    pub q: String,
    pub place: String,
}

/// A validated instance with its derived constants.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    canonical_json: String,
    /// p_nu for 0 <= nu <= d; P and Q are jointly scaled so Q has integer
    /// coefficients (the product P/Q, hence f, is unchanged).
    p: Vec<QPoly>,
    q_poly: QPoly,
    q: Rat,
    w: Place,
    d: usize,
    h: usize,
    delta_d: usize,
    eps0: u32,
    g1: Rat,
    g2: Rat,
    case_tag: CaseTag,
    n_star: u64,
}

const N_STAR_SCAN_CAP: u64 = 1_000_000;

impl ProblemInstance {
    pub fn validate(spec: &InstanceSpec) -> Result<ProblemInstance> {
        let canonical_json =
            serde_json::to_string(spec).map_err(|e| Error::Validation(e.to_string()))?;

        let mut p: Vec<QPoly> = Vec::new();
        for row in &spec.p {
            let coeffs = row.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
            p.push(QPoly::from_coeffs(coeffs));
        }
        while p.last().map_or(false, |r| r.is_zero()) {
            p.pop();
        }
        if p.len() < 2 {
            return Err(Error::Validation(
                "P must have degree d >= 1 in y with nonzero top row".into(),
            ));
        }
        let d = p.len() - 1;

        let q_coeffs = spec
            .q_poly
            .iter()
            .map(|s| parse_rat(s))
            .collect::<Result<Vec<_>>>()?;
        let mut q_poly = QPoly::from_coeffs(q_coeffs);
        if q_poly.is_zero() {
            return Err(Error::Validation("Q must be nonzero".into()));
        }

        // Scale P and Q by the lcm of Q's coefficient denominators; the
        // quotient P/Q defining the series is unchanged.
        let mut den_lcm = BigInt::one();
        for c in q_poly.coeffs() {
            den_lcm = num_integer::lcm(den_lcm, c.denom().clone());
        }
        if !den_lcm.is_one() {
            let scale = Rat::from_integer(den_lcm);
            q_poly = q_poly.scale(&scale);
            for row in p.iter_mut() {
                *row = row.scale(&scale);
            }
        }

        let q = parse_rat(&spec.q)?;
        let w: Place = spec.place.parse()?;
        check_q_place_condition(&q, &w)?;

        let h = q_poly.degree().expect("Q nonzero");
        let delta_d = p[d].degree().expect("top row nonzero");
        let eps0 = u32::from(!p[0].is_zero());

        let cond_a = p[d].is_constant();
        let cond_b = p[0].is_constant() && q_poly.is_constant();
        let case_tag = match (cond_a, cond_b) {
            (true, true) => CaseTag::Both,
            (true, false) => CaseTag::A,
            (false, true) => CaseTag::B,
            (false, false) => {
                return Err(Error::Validation(
                    "neither condition (a) nor (b) holds".into(),
                ))
            }
        };

        // g1 = max(deg p_{d-nu} / nu over nonzero rows, h/d);
        // zero rows are excluded from the max.
        let mut g1 = Rat::new(BigInt::from(h), BigInt::from(d));
        for nu in 1..=d {
            if let Some(deg) = p[d - nu].degree() {
                let r = Rat::new(BigInt::from(deg), BigInt::from(nu));
                if r > g1 {
                    g1 = r;
                }
            }
        }
        // g2 = max over 1 <= nu <= d of deg p_nu / nu (nonzero rows only).
        let mut g2 = Rat::zero();
        for nu in 1..=d {
            if let Some(deg) = p[nu].degree() {
                let r = Rat::new(BigInt::from(deg), BigInt::from(nu));
                if r > g2 {
                    g2 = r;
                }
            }
        }

        let mut inst = ProblemInstance {
            canonical_json,
            p,
            q_poly,
            q,
            w,
            d,
            h,
            delta_d,
            eps0,
            g1,
            g2,
            case_tag,
            n_star: 0,
        };
        inst.n_star = inst.compute_n_star()?;

        // Exact nonvanishing up to N*; dominance covers everything beyond.
        for n in 1..=inst.n_star {
            if inst.p_at_n_qn(n).is_zero() || inst.q_at(n).is_zero() {
                return Err(Error::Validation(format!("P(n,q^n)Q(n) = 0 at n = {n}")));
            }
        }
        Ok(inst)
    }

    pub fn from_json(text: &str) -> Result<ProblemInstance> {
        let spec: InstanceSpec =
            serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        Self::validate(&spec)
    }

    pub fn canonical_json(&self) -> &str {
        &self.canonical_json
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_json.as_bytes());
        hex_string(&h.finalize())
    }

    pub fn q(&self) -> &Rat {
        &self.q
    }

    pub fn place(&self) -> &Place {
        &self.w
    }

    pub fn is_archimedean(&self) -> bool {
        self.w.is_archimedean()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// deg p_d.
    pub fn delta_d(&self) -> usize {
        self.delta_d
    }

    pub fn eps0(&self) -> u32 {
        self.eps0
    }

    pub fn g1(&self) -> &Rat {
        &self.g1
    }

    pub fn g2(&self) -> &Rat {
        &self.g2
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn n_star(&self) -> u64 {
        self.n_star
    }

    pub fn p_nu(&self, nu: usize) -> &QPoly {
        &self.p[nu]
    }

    pub fn q_poly(&self) -> &QPoly {
        &self.q_poly
    }

    /// P(n, y) for integer n and rational y.
    pub fn eval_p(&self, n: u64, y: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for nu in (0..=self.d).rev() {
            acc = acc * y + self.p[nu].eval_u64(n);
        }
        acc
    }

    pub fn p_at_n_qn(&self, n: u64) -> Rat {
        let qn = rat_pow(&self.q, n as i64);
        self.eval_p(n, &qn)
    }

    pub fn q_at(&self, n: u64) -> Rat {
        self.q_poly.eval_u64(n)
    }

    pub fn abs_w(&self, x: &Rat) -> Rat {
        crate::places::abs_value(&self.w, x)
    }

    /// |q|_w as an exact rational (> 1 by validation).
    pub fn q_abs_w(&self) -> Rat {
        self.abs_w(&self.q)
    }

    /// Valuation -v_p(q) > 0 at a p-adic w.
    pub fn kappa(&self) -> i64 {
        match self.w {
            Place::Infinite => panic!("kappa is only defined at a finite place"),
            Place::Prime(p) => -valuation(p, &self.q).expect("q nonzero"),
        }
    }

    fn lead_pd_abs(&self) -> Rat {
        self.p[self.d].leading().expect("nonzero").abs()
    }

    /// Dominance index: for every n > N*, the top term p_d(n) q^{nd}
    /// w-dominates the sum (archimedean) or max (p-adic) of the lower terms
    /// with a factor-2 margin, so P(n, q^n) != 0 and quantitative floors on
    /// |P(n, q^n)|_w hold.
    fn compute_n_star(&self) -> Result<u64> {
        let mut n0 = 1u64;
        // integer roots of p_d and Q are excluded beyond their root bounds
        for poly in [&self.p[self.d], &self.q_poly] {
            let b = poly.root_bound()?;
            let bound = (b.ceil().to_integer().to_u64()).unwrap_or(N_STAR_SCAN_CAP);
            n0 = n0.max(bound);
        }
        match self.w {
            Place::Infinite => self.n_star_arch(n0),
            Place::Prime(p) => self.n_star_padic(p, n0),
        }
    }

    fn n_star_arch(&self, mut n0: u64) -> Result<u64> {
        let a_d = self.lead_pd_abs();
        // |p_d(n)| >= a_d n^delta - Lrest n^(delta-1) >= (a_d/2) n^delta
        // once n >= 2 Lrest / a_d.
        let lrest: Rat = self.p[self.d].length() - &a_d;
        let n_pd = ((lrest * Rat::from_integer(BigInt::from(2)) / &a_d)
            .ceil()
            .to_integer()
            .to_u64())
        .unwrap_or(N_STAR_SCAN_CAP);
        n0 = n0.max(n_pd).max(1);

        let lambda: Rat = (0..self.d).map(|nu| self.p[nu].length()).sum();
        if lambda.is_zero() {
            return Ok(n0);
        }
        let delta_star = (0..self.d)
            .filter_map(|nu| self.p[nu].degree())
            .max()
            .unwrap_or(0);
        let e = delta_star.saturating_sub(self.delta_d) as u32;
        let q_abs = self.q_abs_w();
        // want (4 lambda / a_d) n^e <= |q|^n from some n on, with a verified
        // monotone step so the bound propagates to every larger n
        let c = lambda * Rat::from_integer(BigInt::from(4)) / a_d;
        let mut n = n0.max(1);
        loop {
            if n > N_STAR_SCAN_CAP {
                return Err(Error::Validation(
                    "dominance index exceeds scan cap".into(),
                ));
            }
            let ne = Rat::from_integer(BigInt::from(n).pow(e));
            let qn = q_abs.pow(n as i32);
            let step_ok = if e == 0 {
                true
            } else {
                // ((n+1)/n)^e <= |q|, decreasing in n
                let ratio = Rat::new(BigInt::from(n + 1), BigInt::from(n));
                ratio.pow(e as i32) <= q_abs
            };
            if &c * ne <= qn && step_ok {
                return Ok(n);
            }
            n += 1;
        }
    }

    fn n_star_padic(&self, p: u64, n0: u64) -> Result<u64> {
        let kappa = self.kappa();
        debug_assert!(kappa >= 1);
        // v_p(p_d(n)) <= bits(ceil(D_d L_d)) + delta_d bits(n) for all n >= 1
        let b0 = self.pd_val_bits(p);
        let vmin = (0..self.d)
            .flat_map(|nu| self.p[nu].coeffs().iter())
            .filter(|c| !c.is_zero())
            .map(|c| valuation(p, c).expect("nonzero"))
            .min();
        let has_lower = (0..self.d).any(|nu| !self.p[nu].is_zero());
        if !has_lower {
            // only top row: P(n, q^n) = p_d(n) q^{nd}, nonzero past root bound
            return Ok(n0);
        }
        let vmin = vmin.unwrap_or(0);
        // block-certify bits(D_d L_d) + delta_d bits(n) < n kappa + vmin for
        // all n >= 2^r: within a dyadic block bits is constant and the
        // linear term only grows; across blocks the slack at least doubles.
        let dd = self.delta_d as i64;
        for r in 0..50i64 {
            let block_lo = 1i64 << r;
            let lhs = b0 + dd * (r + 1);
            let rhs = block_lo * kappa + vmin;
            let grows = block_lo * kappa >= dd;
            if lhs < rhs && grows {
                return Ok(n0.max(block_lo as u64));
            }
        }
        Err(Error::Validation("dominance index exceeds scan cap".into()))
    }

    /// bits bound with v_p(p_d(n)) <= pd_val_bits + delta_d * bits(n).
    fn pd_val_bits(&self, _p: u64) -> i64 {
        let mut den_lcm = BigInt::one();
        for c in self.p[self.d].coeffs() {
            den_lcm = num_integer::lcm(den_lcm, c.denom().clone());
        }
        let bound = (Rat::from_integer(den_lcm) * self.p[self.d].length())
            .ceil()
            .to_integer();
        bound.bits() as i64 + 1
    }

    /// Archimedean floor |P(n, q^n)|_w >= (a_d/4) n^delta_d |q|^{nd},
    /// valid for n > N*.
    pub fn arch_p_floor(&self, n: u64) -> Rat {
        debug_assert!(n > self.n_star && self.is_archimedean());
        let a_d = self.lead_pd_abs();
        let nd = Rat::from_integer(BigInt::from(n).pow(self.delta_d as u32));
        a_d / Rat::from_integer(BigInt::from(4)) * nd * self.q_abs_w().pow((n * self.d as u64) as i32)
    }

    /// Verified upper bound on the term ratio |t_{n+1}/t_n|_w of the series
    /// sum_j (j)_sigma gamma^{j-sigma} / Pi_j(q), valid for every
    /// n >= arch_tail_start(sigma, gamma_abs); decreasing in n on that range.
    pub fn arch_tail_ratio(&self, n: u64, gamma_abs: &Rat) -> Rat {
        let e = self.h as i64 - self.delta_d as i64;
        let np1 = Rat::from_integer(BigInt::from(n + 1));
        let poly_part = rat_pow(&np1, e);
        let base = Rat::from_integer(BigInt::from(8)) * gamma_abs * self.q_poly.length()
            / self.lead_pd_abs();
        base * poly_part * rat_pow(&self.q_abs_w(), -((n as i64 + 1) * self.d as i64))
    }

    /// First index from which `arch_tail_ratio` is a valid, monotonically
    /// decreasing bound that is at most 1/2.
    pub fn arch_tail_start(&self, sigma: u32, gamma_abs: &Rat) -> Result<u64> {
        let mut n = self.n_star.max(2 * sigma as u64).max(1);
        // monotone step: ((n+2)/(n+1))^(h - delta_d) <= |q|^d when h > delta_d
        if self.h > self.delta_d {
            let e = (self.h - self.delta_d) as i32;
            let qd = self.q_abs_w().pow(self.d as i32);
            loop {
                let ratio = Rat::new(BigInt::from(n + 2), BigInt::from(n + 1));
                if ratio.pow(e) <= qd {
                    break;
                }
                n += 1;
                if n > N_STAR_SCAN_CAP {
                    return Err(Error::PrecisionUnreachable);
                }
            }
        }
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        while self.arch_tail_ratio(n, gamma_abs) > half {
            n += 1;
            if n > N_STAR_SCAN_CAP {
                return Err(Error::PrecisionUnreachable);
            }
        }
        Ok(n)
    }

    /// First index J such that for every n >= J the p-adic valuation of the
    /// series term grows by at least 1 per step: v(t_{n+1}) >= v(t_n) + 1.
    pub fn padic_tail_gain_start(&self, p: u64, v_gamma: i64) -> Result<u64> {
        let kappa = self.kappa();
        let dkappa = self.d as i64 * kappa;
        let b0 = self.pd_val_bits(p);
        let vq_min = self
            .q_poly
            .coeffs()
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| valuation(p, c).expect("nonzero"))
            .min()
            .expect("Q nonzero");
        // gain(n) >= (n+1) d kappa - bits(n+1) + v(gamma) + vq_min
        //           - (b0 + delta_d bits(n+1)); certify >= 1 by dyadic blocks.
        let dd = self.delta_d as i64;
        for r in 0..50i64 {
            let block_lo = 1i64 << r;
            let g = block_lo * dkappa - (r + 1) * (1 + dd) + v_gamma + vq_min - b0;
            let grows = block_lo * dkappa >= 1 + dd;
            if g >= 1 && grows {
                let start = (block_lo - 1).max(0) as u64;
                return Ok(start.max(self.n_star));
            }
        }
        Err(Error::PrecisionUnreachable)
    }
}

fn check_q_place_condition(q: &Rat, w: &Place) -> Result<()> {
    let fail = || Error::Validation("q place condition violated".into());
    match w {
        // |q|_inf > 1 and |q|_p <= 1 for all p forces an integer of size >= 2
        Place::Infinite => {
            if !q.is_integer() || q.abs() < Rat::from_integer(BigInt::from(2)) {
                return Err(fail());
            }
        }
        // |q|_p > 1 and all other places <= 1: q = a / p^k with p coprime
        // to a and |a| <= p^k
        Place::Prime(p) => {
            let vp = valuation(*p, q).ok_or_else(fail)?;
            if vp >= 0 {
                return Err(fail());
            }
            let den = q.denom();
            let pk = BigInt::from(*p).pow((-vp) as u32);
            if den != &pk {
                return Err(fail());
            }
            if q.abs() > Rat::one() {
                return Err(fail());
            }
        }
    }
    Ok(())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn tschakaloff_accepted_as_both() {
        let inst = reference::tschakaloff();
        assert_eq!(inst.case_tag(), CaseTag::Both);
        assert_eq!(inst.case_tag().effective(None), Case::B);
        assert_eq!(inst.d(), 1);
        assert_eq!(inst.h(), 0);
        assert_eq!(inst.eps0(), 0);
        assert_eq!(inst.g2(), &Rat::zero());
    }

    #[test]
    fn linear_over_x_is_case_a() {
        let inst = reference::linear_over_x();
        assert_eq!(inst.case_tag(), CaseTag::A);
        assert_eq!(inst.h(), 1);
        assert_eq!(inst.g1(), &Rat::one());
        assert_eq!(inst.eps0(), 0);
    }

    #[test]
    fn rational_q_rejected_at_infinity() {
        let spec = InstanceSpec {
            p: vec![vec!["0".into()], vec!["1".into()]],
            q_poly: vec!["1".into()],
            q: "3/2".into(),
            place: "infinity".into(),
        };
        let err = ProblemInstance::validate(&spec).unwrap_err();
        assert!(err.to_string().contains("q place condition violated"));
    }

    #[test]
    fn padic_place_condition() {
        assert!(reference::tschakaloff_padic().is_archimedean() == false);
        // 3/2 at w = 2: |3/2|_inf = 3/2 > 1 violates the other-places bound
        let spec = InstanceSpec {
            p: vec![vec!["0".into()], vec!["1".into()]],
            q_poly: vec!["1".into()],
            q: "3/2".into(),
            place: "p:2".into(),
        };
        assert!(ProblemInstance::validate(&spec).is_err());
        // 1/6 is not of the form a / 2^k
        let spec2 = InstanceSpec {
            p: vec![vec!["0".into()], vec!["1".into()]],
            q_poly: vec!["1".into()],
            q: "1/6".into(),
            place: "p:2".into(),
        };
        assert!(ProblemInstance::validate(&spec2).is_err());
    }

    #[test]
    fn zero_hit_reported_with_index() {
        // P = y - 2: P(1, q) = 0 at q = 2
        let spec = InstanceSpec {
            p: vec![vec!["-2".into()], vec!["1".into()]],
            q_poly: vec!["1".into()],
            q: "2".into(),
            place: "infinity".into(),
        };
        let err = ProblemInstance::validate(&spec).unwrap_err();
        assert!(err.to_string().contains("= 0 at n = 1"), "{err}");
    }

    #[test]
    fn neither_condition_rejected() {
        // p_d = x non-constant and Q = x non-constant
        let spec = InstanceSpec {
            p: vec![vec!["1".into()], vec!["0".into(), "1".into()]],
            q_poly: vec!["0".into(), "1".into()],
            q: "2".into(),
            place: "infinity".into(),
        };
        let err = ProblemInstance::validate(&spec).unwrap_err();
        assert!(err.to_string().contains("neither condition"));
    }

    #[test]
    fn quadratic_case_b_constants() {
        let inst = reference::quadratic_xy();
        assert!(inst.case_tag().allows(Case::B));
        assert_eq!(inst.d(), 2);
        assert_eq!(inst.eps0(), 0);
        assert_eq!(inst.g2(), &Rat::one());
    }

    #[test]
    fn dominance_floor_is_valid_past_n_star() {
        let inst = reference::linear_over_x();
        for n in (inst.n_star() + 1)..(inst.n_star() + 20) {
            let exact = inst.p_at_n_qn(n).abs();
            assert!(exact >= inst.arch_p_floor(n), "floor fails at n = {n}");
        }
    }

    #[test]
    fn arch_tail_ratio_bounds_true_ratio() {
        let inst = reference::linear_over_x();
        let gamma = crate::rational::ratio(1, 1);
        let start = inst.arch_tail_start(0, &gamma).unwrap();
        for n in start..start + 15 {
            // series terms t_n = gamma^n / Pi_n(q); ratio Q(n+1)/P(n+1,...)
            let true_ratio =
                (inst.q_at(n + 1) / inst.p_at_n_qn(n + 1)).abs() * gamma.clone();
            let bound = inst.arch_tail_ratio(n, &gamma);
            assert!(true_ratio <= bound, "ratio unsound at n = {n}");
            assert!(bound <= crate::rational::ratio(1, 2));
            assert!(inst.arch_tail_ratio(n + 1, &gamma) <= bound, "not decreasing");
        }
    }

    #[test]
    fn digest_is_stable() {
        let a = reference::tschakaloff().digest();
        let b = reference::tschakaloff().digest();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
