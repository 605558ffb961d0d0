//! The entire series f(z) = sum_n z^n / Pi_n(q) attached to an instance:
//! incremental Pi caches (exact at z = q and symbolic in z), rigorous
//! enclosures of derivative values, the functional-equation residual check,
//! and reduction of high-order derivatives through the functional equation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::config::{q_power_exponent, ConfigSpec, EvalConfig};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::places::{valuation, Place};
use crate::poly::QPoly;
use crate::rational::{pow2, rat_pow, rat_string, Rat};

const TERM_CAP: u64 = 200_000;

/// Falling factorial n (n-1) ... (n-sigma+1); zero when sigma > n.
pub fn falling(n: u64, sigma: u32) -> BigInt {
    if (sigma as u64) > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..sigma as u64 {
        acc *= BigInt::from(n - i);
    }
    acc
}

fn binom(n: u32, k: u32) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Stirling numbers of the second kind S(t, i) for t, i <= tmax, giving the
/// operator identity (z d/dz)^t = sum_i S(t, i) z^i (d/dz)^i.
fn stirling_table(tmax: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); tmax + 1]; tmax + 1];
    s[0][0] = BigInt::one();
    for t in 1..=tmax {
        for i in 1..=t {
            let carry = s[t - 1][i].clone() * BigInt::from(i as u64);
            s[t][i] = carry + &s[t - 1][i - 1];
        }
    }
    s
}

/// Coefficient of z^i (d/dz)^i in p(z d/dz).
fn stirling_weight(p: &QPoly, i: usize, table: &[Vec<BigInt>]) -> Rat {
    let mut acc = Rat::zero();
    for (t, c) in p.coeffs().iter().enumerate() {
        if t >= i && !c.is_zero() {
            acc += c * Rat::from_integer(table[t][i].clone());
        }
    }
    acc
}

/// Owns the incremental Pi caches for one instance.
pub struct SeriesEngine<'a> {
    inst: &'a ProblemInstance,
    pi_q: Vec<Rat>,
    pq: Vec<Rat>,
    qn: Vec<Rat>,
    pi_sym: Vec<QPoly>,
}

impl<'a> SeriesEngine<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        SeriesEngine {
            inst,
            pi_q: vec![Rat::one()],
            pq: vec![inst.eval_p(0, &Rat::one())],
            qn: vec![inst.q_at(0)],
            pi_sym: vec![QPoly::one()],
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.inst
    }

    fn ensure_scalars(&mut self, n: u64) {
        while (self.pi_q.len() as u64) <= n {
            let k = self.pi_q.len() as u64;
            let pk = self.inst.p_at_n_qn(k);
            let qk = self.inst.q_at(k);
            let next = self.pi_q.last().expect("nonempty") * &pk / &qk;
            self.pi_q.push(next);
            self.pq.push(pk);
            self.qn.push(qk);
        }
    }

    /// Pi_n(q), exact.
    pub fn pi_at_q(&mut self, n: u64) -> Rat {
        self.ensure_scalars(n);
        self.pi_q[n as usize].clone()
    }

    /// P(n, q^n), cached.
    pub fn p_term(&mut self, n: u64) -> Rat {
        self.ensure_scalars(n);
        self.pq[n as usize].clone()
    }

    /// Q(n), cached.
    pub fn q_term(&mut self, n: u64) -> Rat {
        self.ensure_scalars(n);
        self.qn[n as usize].clone()
    }

    /// P(n, z^n) as a polynomial in z.
    pub fn p_symbolic_term(&self, n: u64) -> QPoly {
        let mut acc = QPoly::zero();
        for nu in 0..=self.inst.d() {
            let c = self.inst.p_nu(nu).eval_u64(n);
            if !c.is_zero() {
                acc = &acc + &QPoly::monomial(c, (n as usize) * nu);
            }
        }
        acc
    }

    /// Pi_n(z), exact symbolic; Pi_0 = 1.
    pub fn pi_symbolic(&mut self, n: u64) -> QPoly {
        while (self.pi_sym.len() as u64) <= n {
            let k = self.pi_sym.len() as u64;
            let term = self.p_symbolic_term(k);
            let qk = self.inst.q_at(k);
            let prev = self.pi_sym.last().expect("nonempty");
            self.pi_sym.push((prev * &term).scale(&qk.recip()));
        }
        self.pi_sym[n as usize].clone()
    }

    /// Certified enclosure of sum_{j >= max(from, sigma)} of
    /// (j)_sigma gamma^(j-sigma) / Pi_j(q); the workhorse behind both
    /// derivative values and remainder sums.
    pub fn tail_sum(
        &mut self,
        sigma: u32,
        gamma: &Rat,
        from: u64,
        precision_bits: u32,
    ) -> Result<Enclosure> {
        let place = *self.inst.place();
        let start = from.max(sigma as u64);
        if gamma.is_zero() {
            let value = if start == sigma as u64 {
                Rat::from_integer(falling(sigma as u64, sigma)) / self.pi_at_q(sigma as u64)
            } else {
                Rat::zero()
            };
            return Ok(Enclosure::exact(&place, value));
        }

        let mut j = start;
        let mut term = Rat::from_integer(falling(j, sigma)) * rat_pow(gamma, j as i64 - sigma as i64)
            / self.pi_at_q(j);
        let mut sum = term.clone();

        match place {
            Place::Infinite => {
                let gamma_abs = gamma.abs();
                let cert_start = self.inst.arch_tail_start(sigma, &gamma_abs)?;
                let target = pow2(-(precision_bits as i64) - 2);
                loop {
                    if j >= cert_start {
                        let rho = self.inst.arch_tail_ratio(j, &gamma_abs);
                        let tail = term.abs() * &rho / (Rat::one() - &rho);
                        if tail <= target {
                            let e = Enclosure::Real {
                                lo: &sum - &tail,
                                hi: &sum + &tail,
                            };
                            return Ok(e.compress(precision_bits + 64));
                        }
                    }
                    j += 1;
                    if j - start > TERM_CAP {
                        return Err(Error::PrecisionUnreachable);
                    }
                    term = self.advance_term(term, j, sigma, gamma);
                    sum += &term;
                }
            }
            Place::Prime(p) => {
                let target_val = padic_target_val(p, precision_bits);
                self.padic_tail_from(p, sigma, gamma, start, j, term, sum, target_val)
            }
        }
    }

    /// p-adic tail sum driven directly by a minimum error valuation.
    pub fn tail_sum_padic_val(
        &mut self,
        sigma: u32,
        gamma: &Rat,
        from: u64,
        min_err: i64,
    ) -> Result<Enclosure> {
        let p = match self.inst.place() {
            Place::Prime(p) => *p,
            Place::Infinite => {
                return Err(Error::Domain("valuation target needs a finite place".into()))
            }
        };
        let start = from.max(sigma as u64);
        if gamma.is_zero() {
            let value = if start == sigma as u64 {
                Rat::from_integer(falling(sigma as u64, sigma)) / self.pi_at_q(sigma as u64)
            } else {
                Rat::zero()
            };
            return Ok(Enclosure::exact(&Place::Prime(p), value));
        }
        let j = start;
        let term = Rat::from_integer(falling(j, sigma)) * rat_pow(gamma, j as i64 - sigma as i64)
            / self.pi_at_q(j);
        let sum = term.clone();
        self.padic_tail_from(p, sigma, gamma, start, j, term, sum, min_err)
    }

    #[allow(clippy::too_many_arguments)]
    fn padic_tail_from(
        &mut self,
        p: u64,
        sigma: u32,
        gamma: &Rat,
        start: u64,
        mut j: u64,
        mut term: Rat,
        mut sum: Rat,
        target_val: i64,
    ) -> Result<Enclosure> {
        let v_gamma = valuation(p, gamma).expect("gamma nonzero");
        let cert_start = self.inst.padic_tail_gain_start(p, v_gamma)?;
        loop {
            if j >= cert_start {
                // beyond cert_start every step gains valuation, so the tail
                // valuation is that of the next term
                let next = self.advance_term(term.clone(), j + 1, sigma, gamma);
                let v_next = valuation(p, &next).expect("terms nonzero");
                if v_next >= target_val {
                    let e = Enclosure::PAdic {
                        p,
                        approx: sum,
                        err_val: Some(v_next),
                    };
                    return Ok(e.compress(0));
                }
                j += 1;
                term = next;
                sum += &term;
            } else {
                j += 1;
                term = self.advance_term(term, j, sigma, gamma);
                sum += &term;
            }
            if j - start > TERM_CAP {
                return Err(Error::PrecisionUnreachable);
            }
        }
    }

    /// t_j = t_{j-1} * [j / (j - sigma)] * gamma * Q(j) / P(j, q^j).
    fn advance_term(&mut self, prev: Rat, j: u64, sigma: u32, gamma: &Rat) -> Rat {
        let num = Rat::from_integer(BigInt::from(j)) * gamma * self.q_term(j);
        let den = Rat::from_integer(BigInt::from(j - sigma as u64)) * self.p_term(j);
        prev * num / den
    }

    /// Rigorous enclosure of f^(sigma)(beta) with width at most
    /// 2^(-precision_bits).
    pub fn f_deriv_enclosure(&mut self, beta: &Rat, sigma: u32, precision_bits: u32) -> Result<Enclosure> {
        self.tail_sum(sigma, beta, sigma as u64, precision_bits)
    }

    /// Enclosure of the full linear form A_0 + sum A_c f^(sigma_c)(point_c).
    pub fn linear_form_value(
        &mut self,
        cfg: &EvalConfig,
        a: &[Rat],
        precision_bits: u32,
    ) -> Result<Enclosure> {
        let place = *self.inst.place();
        let mut acc = Enclosure::exact(&place, a[0].clone());
        for (idx, var) in cfg.vars().iter().enumerate() {
            let coeff = &a[idx + 1];
            if coeff.is_zero() {
                continue;
            }
            let point = cfg.point(self.inst, var.j, var.k);
            let e = self.f_deriv_enclosure(&point, var.sigma, precision_bits + 8)?;
            acc = acc.add(&e.scale(coeff))?;
        }
        Ok(acc)
    }
}

fn padic_target_val(p: u64, precision_bits: u32) -> i64 {
    let goal = BigInt::one() << precision_bits;
    let mut v = 0i64;
    let mut pk = BigInt::one();
    while pk < goal {
        pk *= BigInt::from(p);
        v += 1;
    }
    v
}

/// Outcome of the coefficientwise functional-equation check.
#[derive(Clone, Debug)]
pub struct FuncEqReport {
    pub n_max: u64,
    pub first_failure: Option<(u64, Rat)>,
}

impl FuncEqReport {
    pub fn ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Residual of P(n, q^n)/Pi_n(q) against [n=0] P(0,1) + [n>=1] Q(n)/Pi_{n-1}(q),
/// for the given Pi values (exposed so negative controls can corrupt them).
pub fn funceq_residual_at(inst: &ProblemInstance, pi: &[Rat], n: u64) -> Rat {
    let lhs = inst.p_at_n_qn(n) / &pi[n as usize];
    let rhs = if n == 0 {
        inst.eval_p(0, &Rat::one())
    } else {
        inst.q_at(n) / &pi[(n - 1) as usize]
    };
    lhs - rhs
}

/// Exact coefficientwise functional-equation check for 0 <= n <= N.
pub fn functional_equation_residual(
    engine: &mut SeriesEngine<'_>,
    n_max: u64,
) -> Result<FuncEqReport> {
    engine.ensure_scalars(n_max);
    let pi = engine.pi_q.clone();
    let inst = engine.inst;
    let mut first_failure = None;
    for n in 0..=n_max {
        let r = funceq_residual_at(inst, &pi, n);
        if !r.is_zero() {
            first_failure = Some((n, r));
            break;
        }
    }
    Ok(FuncEqReport { n_max, first_failure })
}

/// f^(s)(beta) expressed through the functional equation: a constant plus a
/// combination of f^(sigma)(beta q^(-mu)) with sigma < s at mu = 0.
#[derive(Clone, Debug)]
pub struct DerivReduction {
    pub beta: Rat,
    pub s: u32,
    pub constant: Rat,
    /// (mu, sigma, coefficient) with the point beta q^(-mu), 0 <= mu <= d.
    pub terms: Vec<(usize, u32, Rat)>,
}

impl DerivReduction {
    /// Evaluate the right-hand side as an enclosure.
    pub fn rhs_enclosure(
        &self,
        engine: &mut SeriesEngine<'_>,
        precision_bits: u32,
    ) -> Result<Enclosure> {
        let place = *engine.inst.place();
        let q = engine.inst.q().clone();
        let mut acc = Enclosure::exact(&place, self.constant.clone());
        for (mu, sigma, coeff) in &self.terms {
            let point = &self.beta * rat_pow(&q, -(*mu as i64));
            let e = engine.f_deriv_enclosure(&point, *sigma, precision_bits + 8)?;
            acc = acc.add(&e.scale(coeff))?;
        }
        Ok(acc)
    }
}

/// Solve the t-times differentiated functional equation for the top
/// derivative f^(s)(beta), s = deg p_d + t; terms at mu = 0 with order still
/// >= deg p_d are reduced recursively.
pub fn reduce_derivative(
    engine: &mut SeriesEngine<'_>,
    beta: &Rat,
    s: u32,
) -> Result<DerivReduction> {
    let inst = engine.instance();
    if beta.is_zero() {
        return Err(Error::Domain("reduction requires beta != 0".into()));
    }
    let delta = inst.delta_d() as u32;
    if s < delta {
        return Err(Error::Domain(format!(
            "reduction needs s >= deg p_d = {delta}, got {s}"
        )));
    }
    let raw = reduce_once(inst, beta, s)?;
    // normal form: orders at the base point stay below deg p_d
    let mut constant = raw.constant;
    let mut terms: BTreeMap<(usize, u32), Rat> = BTreeMap::new();
    let mut pending: Vec<(usize, u32, Rat)> = raw.terms;
    while let Some((mu, sigma, coeff)) = pending.pop() {
        if coeff.is_zero() {
            continue;
        }
        if mu == 0 && sigma >= delta {
            debug_assert!(sigma < s);
            let inner = reduce_derivative(engine, beta, sigma)?;
            constant += &coeff * &inner.constant;
            for (m2, s2, c2) in inner.terms {
                pending.push((m2, s2, &coeff * &c2));
            }
        } else {
            *terms.entry((mu, sigma)).or_insert_with(Rat::zero) += coeff;
        }
    }
    let terms = terms
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((mu, sigma), c)| (mu, sigma, c))
        .collect();
    Ok(DerivReduction {
        beta: beta.clone(),
        s,
        constant,
        terms,
    })
}

/// One solve of the differentiated functional equation, no recursion.
fn reduce_once(inst: &ProblemInstance, beta: &Rat, s: u32) -> Result<DerivReduction> {
    let d = inst.d();
    let delta = inst.delta_d() as u32;
    let t = s - delta;
    let z0 = beta * rat_pow(inst.q(), -(d as i64));
    let q = inst.q();
    let max_deg = (0..=d)
        .filter_map(|nu| inst.p_nu(nu).degree())
        .chain(inst.q_poly().degree())
        .max()
        .unwrap_or(0)
        + 1;
    let table = stirling_table(max_deg);

    // coefficient map of LHS - RHS over the symbols f^(sigma)(beta q^(-mu))
    let mut map: BTreeMap<(usize, u32), Rat> = BTreeMap::new();
    let add = |map: &mut BTreeMap<(usize, u32), Rat>, mu: usize, sigma: u32, c: Rat| {
        if !c.is_zero() {
            *map.entry((mu, sigma)).or_insert_with(Rat::zero) += c;
        }
    };

    // d^t/dz^t [ z^a g(c z) ](z0) = sum_r C(t,r) (a)_{t-r} z0^{a-t+r} c^r g^(r)(c z0)
    for nu in 0..=d {
        let pnu = inst.p_nu(nu);
        if pnu.is_zero() {
            continue;
        }
        let deg = pnu.degree().expect("nonzero");
        for i in 0..=deg {
            let w = stirling_weight(pnu, i, &table);
            if w.is_zero() {
                continue;
            }
            let base = w * rat_pow(q, (nu * i) as i64);
            for r in 0..=t {
                let drop = t - r;
                if drop as usize > i {
                    continue;
                }
                let c = Rat::from_integer(binom(t, r))
                    * Rat::from_integer(falling(i as u64, drop))
                    * rat_pow(&z0, i as i64 - drop as i64)
                    * rat_pow(q, (nu as i64) * (r as i64))
                    * &base;
                add(&mut map, d - nu, i as u32 + r, c);
            }
        }
    }
    // RHS: Q(z d/dz)(z f) contributes z^{i+1} f^(i) + i z^i f^(i-1) at mu = d
    let qp = inst.q_poly();
    let h = qp.degree().expect("Q nonzero");
    for i in 0..=h {
        let w = stirling_weight(qp, i, &table);
        if w.is_zero() {
            continue;
        }
        for r in 0..=t {
            let drop = t - r;
            if (drop as usize) <= i + 1 {
                let c = Rat::from_integer(binom(t, r))
                    * Rat::from_integer(falling((i + 1) as u64, drop))
                    * rat_pow(&z0, (i + 1) as i64 - drop as i64)
                    * &w;
                add(&mut map, d, i as u32 + r, -c);
            }
            if i >= 1 && (drop as usize) <= i {
                let c = Rat::from_integer(BigInt::from(i as u64))
                    * Rat::from_integer(binom(t, r))
                    * Rat::from_integer(falling(i as u64, drop))
                    * rat_pow(&z0, i as i64 - drop as i64)
                    * &w;
                add(&mut map, d, i as u32 - 1 + r, -c);
            }
        }
    }
    let constant_rhs = if t == 0 {
        inst.eval_p(0, &Rat::one())
    } else {
        Rat::zero()
    };

    let lambda_top = map
        .remove(&(0usize, s))
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::Domain("leading coefficient vanishes at this beta".into()))?;

    // lambda_top f^(s)(beta) + sum other = constant_rhs
    let constant = &constant_rhs / &lambda_top;
    let terms = map
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((mu, sigma), c)| (mu, sigma, -c / &lambda_top))
        .collect();
    Ok(DerivReduction {
        beta: beta.clone(),
        s,
        constant,
        terms,
    })
}

/// Result of regrouping arbitrary evaluation points into a config window.
#[derive(Clone, Debug)]
pub struct NormalizedPoints {
    pub config: ConfigSpec,
    /// Row b expresses original basis element b (the constant 1 first, then
    /// f^(tau)(beta_i) in input order) over the config basis
    /// (1, f^(sigma)(alpha_j q^k)) in index-map order.
    pub transform: Vec<Vec<Rat>>,
    pub original_basis: Vec<String>,
    pub target_basis: Vec<String>,
}

/// Group points into q-orbits, choose admissible representatives, and map
/// every f^(tau)(beta_i) (tau < t) into the config coordinates, reducing
/// out-of-window derivatives through the functional equation.
pub fn normalize_points(
    engine: &mut SeriesEngine<'_>,
    betas: &[Rat],
    t: u32,
) -> Result<NormalizedPoints> {
    let inst = engine.instance();
    if betas.is_empty() || t == 0 {
        return Err(Error::Domain("need at least one point and t >= 1".into()));
    }
    for b in betas {
        if b.is_zero() {
            return Err(Error::Domain("points must be nonzero".into()));
        }
    }
    let d = inst.d();
    let delta = inst.delta_d() as u32;
    let q = inst.q().clone();

    // orbit grouping: beta ~ beta' iff beta/beta' is an exact power of q
    let mut reps: Vec<Rat> = Vec::new();
    let mut placement: Vec<(usize, i64)> = Vec::new();
    for b in betas {
        let mut found = None;
        for (oi, rep) in reps.iter().enumerate() {
            if let Some(e) = q_power_exponent(inst, &(b / rep)) {
                found = Some((oi, e));
                break;
            }
        }
        match found {
            Some(pl) => placement.push(pl),
            None => {
                reps.push(b.clone());
                placement.push((reps.len() - 1, 0));
            }
        }
    }
    let m = reps.len();
    // shift each representative so all exponents are >= 0
    let mut alphas: Vec<Rat> = Vec::with_capacity(m);
    let mut shifts: Vec<i64> = Vec::with_capacity(m);
    for oi in 0..m {
        let emin = placement
            .iter()
            .filter(|(o, _)| *o == oi)
            .map(|(_, e)| *e)
            .min()
            .expect("orbit nonempty");
        let mut alpha = &reps[oi] * rat_pow(&q, emin);
        let mut shift = -emin;
        // keep condition (iii) satisfiable by stepping below the forbidden ray
        if inst.p_nu(0).degree() == inst.q_poly().degree() {
            let ab = inst.p_nu(0).leading().expect("nonzero") / inst.q_poly().leading().expect("nonzero");
            if !ab.is_zero() {
                for _ in 0..10_000 {
                    match q_power_exponent(inst, &(&alpha / &ab)) {
                        Some(e) if e >= 0 => {
                            alpha = &alpha / &q;
                            shift += 1;
                        }
                        _ => break,
                    }
                }
            }
        }
        alphas.push(alpha);
        shifts.push(shift);
    }

    // resolve every needed (orbit, k, sigma) into in-window coordinates
    type Key = (usize, i64, u32);
    #[derive(Clone, Debug, Default)]
    struct Comb {
        constant: Rat,
        coeffs: BTreeMap<Key, Rat>,
    }
    let mut resolved: BTreeMap<Key, Comb> = BTreeMap::new();

    fn resolve(
        engine: &mut SeriesEngine<'_>,
        alphas: &[Rat],
        d: usize,
        delta: u32,
        q: &Rat,
        resolved: &mut BTreeMap<Key, Comb>,
        key: Key,
    ) -> Result<Comb> {
        if let Some(c) = resolved.get(&key) {
            return Ok(c.clone());
        }
        let (oi, k, sigma) = key;
        if k < 0 {
            return Err(Error::Domain(
                "normalize_points obstruction: reduction stepped below the window".into(),
            ));
        }
        let in_window = (k as usize) < d || sigma < delta;
        let comb = if in_window {
            let mut coeffs = BTreeMap::new();
            coeffs.insert(key, Rat::one());
            Comb {
                constant: Rat::zero(),
                coeffs,
            }
        } else {
            let point = &alphas[oi] * rat_pow(q, k);
            let red = reduce_derivative(engine, &point, sigma)?;
            let mut acc = Comb {
                constant: red.constant.clone(),
                coeffs: BTreeMap::new(),
            };
            for (mu, s2, c) in &red.terms {
                let sub = resolve(
                    engine,
                    alphas,
                    d,
                    delta,
                    q,
                    resolved,
                    (oi, k - *mu as i64, *s2),
                )?;
                acc.constant += c * &sub.constant;
                for (k2, c2) in &sub.coeffs {
                    *acc.coeffs.entry(*k2).or_insert_with(Rat::zero) += c * c2;
                }
            }
            acc
        };
        resolved.insert(key, comb.clone());
        Ok(comb)
    }

    let mut rows: Vec<Comb> = Vec::new();
    for (bi, b) in betas.iter().enumerate() {
        let (oi, e) = placement[bi];
        let k = e + shifts[oi];
        debug_assert_eq!(&alphas[oi] * rat_pow(&q, k), *b);
        for tau in 0..t {
            let comb = resolve(engine, &alphas, d, delta, &q, &mut resolved, (oi, k, tau))?;
            rows.push(comb);
        }
    }

    // assemble the config matrix from everything actually used
    let mut used: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for row in &rows {
        for ((oi, k, sigma), _) in &row.coeffs {
            debug_assert!(*k >= 0);
            let e = used.entry((*oi, *k as usize)).or_insert(0);
            *e = (*e).max(sigma + 1);
        }
    }
    let d0 = used
        .keys()
        .map(|(_, k)| k + 1)
        .max()
        .unwrap_or(0)
        .max(d);
    let mut s = vec![vec![1u32; d0]; m];
    for ((oi, k), smin) in &used {
        s[*oi][*k] = (*smin).max(1);
    }
    let spec = crate::config::config_spec(m, d0, &alphas, s);
    let cfg = EvalConfig::validate(inst, &spec).map_err(|e| {
        Error::Domain(format!("normalize_points obstruction: {e}"))
    })?;

    let dim = cfg.dim();
    let mut transform = Vec::with_capacity(1 + rows.len());
    let mut unit = vec![Rat::zero(); dim];
    unit[0] = Rat::one();
    transform.push(unit);
    for row in &rows {
        let mut out = vec![Rat::zero(); dim];
        out[0] = row.constant.clone();
        for ((oi, k, sigma), c) in &row.coeffs {
            let pos = cfg
                .position(oi + 1, *k as usize, *sigma)
                .expect("used entries are in the config");
            out[pos] = c.clone();
        }
        transform.push(out);
    }

    let mut original_basis = vec!["1".to_string()];
    for (bi, b) in betas.iter().enumerate() {
        for tau in 0..t {
            original_basis.push(format!("f^({tau})({})", rat_string(b)));
            let _ = bi;
        }
    }
    let mut target_basis = vec!["1".to_string()];
    for v in cfg.vars() {
        let point = cfg.point(inst, v.j, v.k);
        target_basis.push(format!("f^({})({})", v.sigma, rat_string(&point)));
    }

    Ok(NormalizedPoints {
        config: spec,
        transform,
        original_basis,
        target_basis,
    })
}
