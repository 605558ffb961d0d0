//! Auxiliary linear forms u_n, v_n, their difference-operator transforms
//! v_{l,n} and the normalized forms L_{l,n}, together with z-orders, Hankel
//! determinants, integrality bookkeeping, and the rigorous omega-side
//! bounds assembled from remainder enclosures.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::EvalConfig;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::instance::{Case, ProblemInstance};
use crate::places::{valuation, vector_norm_v, Place};
use crate::poly::{slice_height, slice_height_excluding, slice_norm_v, QPoly};
use crate::rational::{ceil_log2, rat_pow, rat_string, Rat};
use crate::series::{falling, SeriesEngine};

/// A linear form in the variable vector x with symbolic (polynomial in z)
/// coefficients; position 0 is x_0.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicForm {
    pub entries: Vec<QPoly>,
}

/// A linear form in x with exact rational coefficients (z specialized).
#[derive(Clone, Debug, PartialEq)]
pub struct SpecializedForm {
    pub entries: Vec<Rat>,
}

impl SymbolicForm {
    pub fn zero(dim: usize) -> Self {
        SymbolicForm {
            entries: vec![QPoly::zero(); dim],
        }
    }

    /// Least z-exponent with a nonzero coefficient across all positions;
    /// `None` is the +infinity sentinel of the zero form.
    pub fn ord_z(&self) -> Option<usize> {
        self.entries.iter().filter_map(|p| p.ord()).min()
    }

    /// Largest z-degree across positions; `None` for the zero form.
    pub fn deg_z(&self) -> Option<usize> {
        self.entries.iter().filter_map(|p| p.degree()).max()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn at_q(&self, q: &Rat) -> SpecializedForm {
        SpecializedForm {
            entries: self.entries.iter().map(|p| p.eval(q)).collect(),
        }
    }

    pub fn truncated(&self, cap: usize) -> SymbolicForm {
        SymbolicForm {
            entries: self.entries.iter().map(|p| p.truncated(cap)).collect(),
        }
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|p| p.coeffs().iter().map(rat_string).collect())
            .collect()
    }
}

impl SpecializedForm {
    pub fn zero(dim: usize) -> Self {
        SpecializedForm {
            entries: vec![Rat::zero(); dim],
        }
    }

    pub fn dot(&self, values: &[Rat]) -> Rat {
        self.entries
            .iter()
            .zip(values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: &Rat) -> SpecializedForm {
        SpecializedForm {
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn height(&self) -> Result<Rat> {
        slice_height(&self.entries)
    }

    pub fn height_excluding(&self, w: &Place) -> Result<Rat> {
        slice_height_excluding(&self.entries, w)
    }

    pub fn norm_v(&self, v: &Place) -> Result<Rat> {
        slice_norm_v(&self.entries, v)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(rat_string).collect()
    }
}

/// One commuting factor (I - gamma z^z_exp B)^multiplicity of the operator
/// product; case A factors carry z_exp = 0 and a q-power inside gamma.
#[derive(Clone, Debug)]
pub struct OperatorFactor {
    pub gamma: Rat,
    pub z_exp: usize,
    pub multiplicity: u32,
}

/// Expanded operator product: v_{l,n} = sum_t c_t * v_{n-t}.
#[derive(Clone, Debug)]
pub enum OperatorExpansion {
    /// Case A: shift coefficients are rationals (z already specialized).
    Specialized(Vec<Rat>),
    /// Case B: shift coefficients are polynomials in z.
    Symbolic(Vec<QPoly>),
}

impl OperatorExpansion {
    pub fn len(&self) -> usize {
        match self {
            OperatorExpansion::Specialized(v) => v.len(),
            OperatorExpansion::Symbolic(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficients with z specialized at q.
    pub fn at_q(&self, q: &Rat) -> Vec<Rat> {
        match self {
            OperatorExpansion::Specialized(v) => v.clone(),
            OperatorExpansion::Symbolic(v) => v.iter().map(|p| p.eval(q)).collect(),
        }
    }
}

/// Smallest n for which v_{l,n} is defined: the total operator degree.
pub fn min_n(inst: &ProblemInstance, cfg: &EvalConfig, l: u32, case: Case) -> u64 {
    let floor_sum = |g: &Rat| -> u64 {
        (0..l as u64)
            .map(|k| {
                (g * Rat::from_integer(BigInt::from(k)))
                    .floor()
                    .to_integer()
                    .to_u64()
                    .expect("small")
            })
            .sum()
    };
    match case {
        Case::A => {
            (cfg.s_total + cfg.m as u64 * inst.h() as u64) * l as u64
                + cfg.m as u64 * floor_sum(inst.g1())
        }
        Case::B => {
            (cfg.s_total + inst.eps0() as u64) * l as u64
                + (cfg.m as u64 + inst.eps0() as u64) * floor_sum(inst.g2())
        }
    }
}

/// The commuting difference-operator factors for level l.
pub fn operator_factors(
    inst: &ProblemInstance,
    cfg: &EvalConfig,
    l: u32,
    case: Case,
) -> Vec<OperatorFactor> {
    let mut factors = Vec::new();
    for k in 0..l as u64 {
        let gk = match case {
            Case::A => inst.g1(),
            Case::B => inst.g2(),
        };
        let extra = (gk * Rat::from_integer(BigInt::from(k)))
            .floor()
            .to_integer()
            .to_u64()
            .expect("small") as u32;
        match case {
            Case::A => {
                // gamma = alpha_j q^(d0 - 1 - d - k), exponent s_j + h + floor(g1 k)
                for j in 1..=cfg.m {
                    let e = cfg.d0 as i64 - 1 - inst.d() as i64 - k as i64;
                    factors.push(OperatorFactor {
                        gamma: &cfg.alphas[j - 1] * rat_pow(inst.q(), e),
                        z_exp: 0,
                        multiplicity: cfg.s_max[j - 1] + inst.h() as u32 + extra,
                    });
                }
            }
            Case::B => {
                // j = 0 carries gamma = p_0 z^k with s_0 = 1; identity if p_0 = 0
                if inst.eps0() == 1 {
                    factors.push(OperatorFactor {
                        gamma: inst.p_nu(0).coeff(0),
                        z_exp: k as usize,
                        multiplicity: 1 + extra,
                    });
                }
                for j in 1..=cfg.m {
                    factors.push(OperatorFactor {
                        gamma: cfg.alphas[j - 1].clone(),
                        z_exp: k as usize,
                        multiplicity: cfg.s_max[j - 1] + extra,
                    });
                }
            }
        }
    }
    factors
}

/// Expand the product of (I - gamma z^k B) factors into shift coefficients.
pub fn operator_expansion(
    inst: &ProblemInstance,
    cfg: &EvalConfig,
    l: u32,
    case: Case,
) -> OperatorExpansion {
    let factors = operator_factors(inst, cfg, l, case);
    match case {
        Case::A => {
            let mut c = vec![Rat::one()];
            for f in &factors {
                for _ in 0..f.multiplicity {
                    let mut next = vec![Rat::zero(); c.len() + 1];
                    for (t, ct) in c.iter().enumerate() {
                        next[t] += ct;
                        let sub = ct * &f.gamma;
                        next[t + 1] -= sub;
                    }
                    c = next;
                }
            }
            OperatorExpansion::Specialized(c)
        }
        Case::B => {
            let mut c = vec![QPoly::one()];
            for f in &factors {
                for _ in 0..f.multiplicity {
                    let mut next = vec![QPoly::zero(); c.len() + 1];
                    for (t, ct) in c.iter().enumerate() {
                        next[t] = &next[t] + ct;
                        let shifted = ct.mul_monomial(&f.gamma, f.z_exp);
                        next[t + 1] = &next[t + 1] - &shifted;
                    }
                    c = next;
                }
            }
            OperatorExpansion::Symbolic(c)
        }
    }
}

/// Caches and operations for the auxiliary forms of one (instance, config).
pub struct FormsEngine<'a> {
    inst: &'a ProblemInstance,
    cfg: &'a EvalConfig,
    series: SeriesEngine<'a>,
    v_sym: Vec<SymbolicForm>,
    v_q: Vec<SpecializedForm>,
    /// Memo of remainder enclosures keyed by index, holding the tightest
    /// precision computed so far, valid for the omega vector it was
    /// populated with. A stored enclosure serves any request at equal or
    /// lower precision; this keeps results deterministic because requests
    /// arrive in a deterministic order.
    omega_memo: Option<(Vec<Rat>, std::collections::BTreeMap<u64, (i64, Enclosure)>)>,
    /// Cache of normalized forms by (l, n, case).
    l_form_cache: std::collections::BTreeMap<(u32, u64, bool), SpecializedForm>,
}

impl<'a> FormsEngine<'a> {
    pub fn new(inst: &'a ProblemInstance, cfg: &'a EvalConfig) -> Self {
        FormsEngine {
            inst,
            cfg,
            series: SeriesEngine::new(inst),
            v_sym: Vec::new(),
            v_q: Vec::new(),
            omega_memo: None,
            l_form_cache: std::collections::BTreeMap::new(),
        }
    }

    fn omega_memo_lookup(&mut self, omega1: &[Rat], j: u64, param: i64) -> Option<Enclosure> {
        match &self.omega_memo {
            Some((ow, map)) if ow == omega1 => map
                .get(&j)
                .filter(|(stored, _)| *stored >= param)
                .map(|(_, e)| e.clone()),
            _ => None,
        }
    }

    fn omega_memo_store(&mut self, omega1: &[Rat], j: u64, param: i64, e: Enclosure) {
        match &mut self.omega_memo {
            Some((ow, map)) if ow.as_slice() == omega1 => {
                let slot = map.entry(j).or_insert((param, e.clone()));
                if slot.0 < param {
                    *slot = (param, e);
                }
            }
            _ => {
                let mut map = std::collections::BTreeMap::new();
                map.insert(j, (param, e));
                self.omega_memo = Some((omega1.to_vec(), map));
            }
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.inst
    }

    pub fn config(&self) -> &'a EvalConfig {
        self.cfg
    }

    pub fn series(&mut self) -> &mut SeriesEngine<'a> {
        &mut self.series
    }

    /// u_n with symbolic z: coefficient (n)_sigma (alpha_j z^k)^(n-sigma)
    /// at position (j, k, sigma); the x_0 coefficient is zero.
    pub fn u_symbolic(&self, n: u64) -> SymbolicForm {
        let mut form = SymbolicForm::zero(self.cfg.dim());
        for (idx, var) in self.cfg.vars().iter().enumerate() {
            if var.sigma as u64 > n {
                continue;
            }
            let count = falling(n, var.sigma);
            let alpha_pow = rat_pow(&self.cfg.alphas[var.j - 1], (n - var.sigma as u64) as i64);
            let z_exp = var.k * (n - var.sigma as u64) as usize;
            form.entries[idx + 1] =
                QPoly::monomial(Rat::from_integer(count) * alpha_pow, z_exp);
        }
        form
    }

    /// u_n at z = q.
    pub fn u_at_q(&self, n: u64) -> SpecializedForm {
        let sym = self.u_symbolic(n);
        sym.at_q(self.inst.q())
    }

    /// v_n symbolic, by the recurrence v_n = (P(n, z^n)/Q(n)) v_{n-1} + u_n.
    pub fn v_symbolic(&mut self, n: u64) -> SymbolicForm {
        while (self.v_sym.len() as u64) <= n {
            let k = self.v_sym.len() as u64;
            let next = if k == 0 {
                let mut f = self.u_symbolic(0);
                f.entries[0] = QPoly::one();
                f
            } else {
                let term = self.series.p_symbolic_term(k);
                let qk = self.inst.q_at(k).recip();
                let prev = &self.v_sym[(k - 1) as usize];
                let mut f = self.u_symbolic(k);
                for (e, pe) in f.entries.iter_mut().zip(prev.entries.iter()) {
                    *e = &*e + &(pe * &term).scale(&qk);
                }
                f
            };
            self.v_sym.push(next);
        }
        self.v_sym[n as usize].clone()
    }

    /// v_n specialized at z = q.
    pub fn v_at_q(&mut self, n: u64) -> SpecializedForm {
        while (self.v_q.len() as u64) <= n {
            let k = self.v_q.len() as u64;
            let next = if k == 0 {
                let mut f = self.u_at_q(0);
                f.entries[0] = Rat::one();
                f
            } else {
                let scale = self.series.p_term(k) / self.series.q_term(k);
                let prev = &self.v_q[(k - 1) as usize];
                let mut f = self.u_at_q(k);
                for (e, pe) in f.entries.iter_mut().zip(prev.entries.iter()) {
                    *e = &*e + &(pe * &scale);
                }
                f
            };
            self.v_q.push(next);
        }
        self.v_q[n as usize].clone()
    }

    /// Direct definition Pi_n (x_0 + sum_k u_k / Pi_k), symbolic; quadratic
    /// cost, kept for cross-checks against the recurrence.
    pub fn v_symbolic_direct(&mut self, n: u64) -> SymbolicForm {
        let pi_n = self.series.pi_symbolic(n);
        let mut form = SymbolicForm::zero(self.cfg.dim());
        form.entries[0] = pi_n.clone();
        for k in 0..=n {
            // Pi_n / Pi_k = prod_{i=k+1..n} P(i, z^i)/Q(i)
            let mut quot = QPoly::one();
            for i in (k + 1)..=n {
                let term = self.series.p_symbolic_term(i);
                quot = (&quot * &term).scale(&self.inst.q_at(i).recip());
            }
            let uk = self.u_symbolic(k);
            for (e, ue) in form.entries.iter_mut().zip(uk.entries.iter()).skip(1) {
                *e = &*e + &(ue * &quot);
            }
        }
        form
    }

    fn check_case(&self, case: Case) -> Result<()> {
        if !self.inst.case_tag().allows(case) {
            return Err(Error::Domain(format!(
                "case {case:?} pipeline unavailable for this instance"
            )));
        }
        Ok(())
    }

    fn check_min_n(&self, l: u32, n: u64, case: Case) -> Result<u64> {
        let t = min_n(self.inst, self.cfg, l, case);
        if n < t {
            return Err(Error::Domain(format!(
                "n = {n} below the admissible threshold {t} for l = {l}"
            )));
        }
        Ok(t)
    }

    /// v_{l,n} at z = q: iterative factor application on the cached window,
    /// valid in both cases (case B specializes its z-monomials at q).
    pub fn v_ln_at_q(&mut self, l: u32, n: u64, case: Case) -> Result<SpecializedForm> {
        self.check_case(case)?;
        let t = self.check_min_n(l, n, case)?;
        let q = self.inst.q().clone();
        let mut window: Vec<SpecializedForm> = ((n - t)..=n).map(|j| self.v_at_q(j)).collect();
        for f in operator_factors(self.inst, self.cfg, l, case) {
            let gamma_q = &f.gamma * rat_pow(&q, f.z_exp as i64);
            for _ in 0..f.multiplicity {
                for i in (1..window.len()).rev() {
                    let (left, right) = window.split_at_mut(i);
                    let prev = &left[i - 1];
                    for (e, pe) in right[0].entries.iter_mut().zip(prev.entries.iter()) {
                        *e = &*e - &(pe * &gamma_q);
                    }
                }
            }
        }
        Ok(window.pop().expect("window nonempty"))
    }

    /// v_{l,n} symbolic in z (case B); `cap` truncates every intermediate to
    /// exponents < cap, which is exact for the low-order coefficients.
    pub fn v_ln_symbolic(&mut self, l: u32, n: u64, cap: Option<usize>) -> Result<SymbolicForm> {
        self.check_case(Case::B)?;
        let t = self.check_min_n(l, n, Case::B)?;
        let mut window: Vec<SymbolicForm> = ((n - t)..=n)
            .map(|j| {
                let f = self.v_symbolic(j);
                match cap {
                    Some(c) => f.truncated(c),
                    None => f,
                }
            })
            .collect();
        for f in operator_factors(self.inst, self.cfg, l, Case::B) {
            for _ in 0..f.multiplicity {
                for i in (1..window.len()).rev() {
                    let (left, right) = window.split_at_mut(i);
                    let prev = &left[i - 1];
                    for (e, pe) in right[0].entries.iter_mut().zip(prev.entries.iter()) {
                        let mut shifted = pe.mul_monomial(&f.gamma, f.z_exp);
                        if let Some(c) = cap {
                            shifted = shifted.truncated(c);
                        }
                        *e = &*e - &shifted;
                    }
                }
            }
        }
        Ok(window.pop().expect("window nonempty"))
    }

    /// Exact ord_z of v_{l,n} (case B), computed with doubling truncation.
    pub fn ord_z_vln(&mut self, l: u32, n: u64) -> Result<Option<usize>> {
        let mut cap = ((l as usize + 1) * (n as usize + 1)).max(64);
        loop {
            let form = self.v_ln_symbolic(l, n, Some(cap))?;
            if let Some(o) = form.ord_z() {
                return Ok(Some(o));
            }
            // nothing below cap: either genuinely zero or ord >= cap
            let full_deg_bound = self
                .v_symbolic(n)
                .deg_z()
                .map(|d| d + 1 + (l as usize) * (n as usize + 1))
                .unwrap_or(0);
            if cap > full_deg_bound {
                return Ok(None);
            }
            cap *= 2;
        }
    }

    /// Exponent of the q-power prefactor of L_{l,n} in case A.
    pub fn case_a_power(&self, l: u32) -> u64 {
        let mut total = 0u64;
        for k in 0..l as u64 {
            let extra = (self.inst.g1() * Rat::from_integer(BigInt::from(k)))
                .floor()
                .to_integer()
                .to_u64()
                .expect("small");
            for j in 1..=self.cfg.m {
                total += (self.cfg.s_max[j - 1] as u64 + self.inst.h() as u64 + extra) * (k + 1);
            }
        }
        total
    }

    /// The normalized linear form L_{l,n} with exact rational coefficients.
    pub fn l_ln(&mut self, l: u32, n: u64) -> Result<SpecializedForm> {
        let case = self.inst.case_tag().effective(None);
        self.l_ln_in_case(l, n, case)
    }

    pub fn l_ln_in_case(&mut self, l: u32, n: u64, case: Case) -> Result<SpecializedForm> {
        let key = (l, n, matches!(case, Case::A));
        if let Some(f) = self.l_form_cache.get(&key) {
            return Ok(f.clone());
        }
        let form = match case {
            Case::A => {
                let v = self.v_ln_at_q(l, n, Case::A)?;
                let power = rat_pow(self.inst.q(), self.case_a_power(l) as i64);
                v.scale(&power)
            }
            Case::B => {
                let ord = self
                    .ord_z_vln(l, n)?
                    .ok_or_else(|| Error::Domain("v_{l,n} vanishes identically".into()))?;
                let v = self.v_ln_at_q(l, n, Case::B)?;
                let power = rat_pow(self.inst.q(), -(ord as i64));
                v.scale(&power)
            }
        };
        self.l_form_cache.insert(key, form.clone());
        Ok(form)
    }

    /// Hankel determinant det(v_{i+j}(q, omega))_{i,j < n} by fraction-free
    /// elimination on the denominator-cleared integer matrix.
    pub fn hankel_value(&mut self, n: u64, omega: &[Rat]) -> Result<Rat> {
        if n == 0 {
            return Err(Error::Domain("Hankel determinant needs n >= 1".into()));
        }
        if omega.len() != self.cfg.dim() {
            return Err(Error::Domain("omega has the wrong dimension".into()));
        }
        let n = n as usize;
        let mut values = Vec::with_capacity(2 * n - 1);
        for j in 0..(2 * n - 1) {
            values.push(self.v_at_q(j as u64).dot(omega));
        }
        let mut lcm = BigInt::one();
        for v in &values {
            lcm = lcm.lcm(v.denom());
        }
        let mut mat = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let v = &values[i + j];
                row.push(v.numer() * (&lcm / v.denom()));
            }
            mat.push(row);
        }
        let det = bareiss_det(mat);
        Ok(Rat::new(det, lcm.pow(n as u32)))
    }

    /// Common denominator D of the alphas and the coefficients of P.
    pub fn common_denominator(&self) -> BigInt {
        let mut d = BigInt::one();
        for a in &self.cfg.alphas {
            d = d.lcm(a.denom());
        }
        for nu in 0..=self.inst.d() {
            for c in self.inst.p_nu(nu).coeffs() {
                d = d.lcm(c.denom());
            }
        }
        d
    }

    /// I_n = D^n prod_{k<=n} Q(k).
    pub fn integer_denominator(&mut self, n: u64) -> BigInt {
        let mut i_n = self.common_denominator().pow(n as u32);
        for k in 1..=n {
            let qk = self.series.q_term(k);
            debug_assert!(qk.is_integer());
            i_n *= qk.to_integer();
        }
        i_n
    }

    /// Checks that I_n v_n has integer polynomial coefficients.
    pub fn integrality_check(&mut self, n: u64) -> bool {
        let i_n = Rat::from_integer(self.integer_denominator(n));
        let v = self.v_symbolic(n);
        v.entries
            .iter()
            .all(|p| p.coeffs().iter().all(|c| (c * &i_n).is_integer()))
    }

    /// Enclosure of v_n(q, omega) for the omega that annihilates the full
    /// linear relation: computed from the remainder series
    /// -sum_{j>n} u_j(q, omega) / prod_{k=n+1..j} P(k,q^k)/Q(k), never
    /// materializing omega_0.
    pub fn remainder_enclosure(
        &mut self,
        n: u64,
        omega1: &[Rat],
        precision_bits: u32,
    ) -> Result<Enclosure> {
        if omega1.len() != self.cfg.dim() - 1 {
            return Err(Error::Domain("omega1 has the wrong dimension".into()));
        }
        let comps = omega1.iter().filter(|c| !c.is_zero()).count().max(1) as i64;
        let place = *self.inst.place();
        match place {
            Place::Infinite => {
                // the Pi_n amplification is budgeted inside; only the omega
                // magnitudes and the component count remain
                let mut extra = ceil_log2(&Rat::from_integer(BigInt::from(comps))).max(0);
                for c in omega1 {
                    if !c.is_zero() {
                        extra = extra.max(ceil_log2(&c.abs().max(Rat::one())) + 2);
                    }
                }
                let bits = precision_bits + extra.max(0) as u32 + 4;
                Ok(self
                    .remainder_with_component_bits(n, omega1, bits)?
                    .compress(precision_bits + 32))
            }
            Place::Prime(p) => {
                let target = padic_goal(p, precision_bits);
                let mut min_err = target;
                for c in omega1 {
                    if !c.is_zero() {
                        let shift = valuation(p, c).expect("nonzero");
                        min_err = min_err.max(target - shift);
                    }
                }
                self.remainder_with_component_val(n, omega1, min_err)
            }
        }
    }

    /// The same remainder sum with a fixed per-component archimedean width
    /// target of 2^(-bits). Component precision is independent of omega and
    /// no outward rounding is applied afterwards, so the result scales
    /// exactly under scaling of omega.
    pub fn remainder_with_component_bits(
        &mut self,
        n: u64,
        omega1: &[Rat],
        bits: u32,
    ) -> Result<Enclosure> {
        if let Some(e) = self.omega_memo_lookup(omega1, n, bits as i64) {
            return Ok(e);
        }
        let pi_n = self.series.pi_at_q(n);
        // the Pi_n scale at the end would amplify component widths; budget
        // for it up front (instance data only, so omega-scaling stays exact)
        let pi_bits = ceil_log2(&pi_n.abs().max(Rat::one())).max(0) as u32;
        let bits_eff = bits + pi_bits + 2;
        let place = *self.inst.place();
        let mut acc = Enclosure::zero(&place);
        let vars = self.cfg.vars().to_vec();
        for (idx, var) in vars.iter().enumerate() {
            let coeff = &omega1[idx];
            if coeff.is_zero() {
                continue;
            }
            let gamma = self.cfg.point(self.inst, var.j, var.k);
            let tail = self
                .series
                .tail_sum(var.sigma, &gamma, n + 1, bits_eff)?;
            acc = acc.add(&tail.scale(coeff))?;
        }
        let out = acc.scale(&-pi_n);
        self.omega_memo_store(omega1, n, bits as i64, out.clone());
        Ok(out)
    }

    /// p-adic flavor: every component tail is summed until its error
    /// valuation reaches `min_err`.
    pub fn remainder_with_component_val(
        &mut self,
        n: u64,
        omega1: &[Rat],
        min_err: i64,
    ) -> Result<Enclosure> {
        if let Some(e) = self.omega_memo_lookup(omega1, n, min_err) {
            return Ok(e);
        }
        let pi_n = self.series.pi_at_q(n);
        let place = *self.inst.place();
        let p = self.inst.place().prime().expect("finite place");
        // compensate for the valuation shift of the final Pi_n scale
        let v_pi = valuation(p, &pi_n).expect("Pi_n nonzero");
        let comp_err = min_err - v_pi;
        let mut acc = Enclosure::zero(&place);
        let vars = self.cfg.vars().to_vec();
        for (idx, var) in vars.iter().enumerate() {
            let coeff = &omega1[idx];
            if coeff.is_zero() {
                continue;
            }
            let gamma = self.cfg.point(self.inst, var.j, var.k);
            let tail = self
                .series
                .tail_sum_padic_val(var.sigma, &gamma, n + 1, comp_err)?;
            acc = acc.add(&tail.scale(coeff))?;
        }
        let out = acc.scale(&-pi_n).compress(0);
        self.omega_memo_store(omega1, n, min_err, out.clone());
        Ok(out)
    }

    /// Enclosure of v_{l,n}(q, omega) for the relation-annihilating omega,
    /// assembled by applying the operator factors to the window of
    /// remainder enclosures (signed sums keep the designed cancellation).
    pub fn v_ln_omega_enclosure(
        &mut self,
        l: u32,
        n: u64,
        case: Case,
        omega1: &[Rat],
        component_bits: u32,
    ) -> Result<Enclosure> {
        self.check_case(case)?;
        let t = self.check_min_n(l, n, case)?;
        let q = self.inst.q().clone();
        let place = *self.inst.place();
        let mut window: Vec<Enclosure> = Vec::with_capacity(t as usize + 1);
        for j in (n - t)..=n {
            let e = match place {
                Place::Infinite => {
                    self.remainder_with_component_bits(j, omega1, component_bits)?
                }
                Place::Prime(p) => {
                    let goal = padic_goal(p, component_bits);
                    self.remainder_with_component_val(j, omega1, goal)?
                }
            };
            window.push(e);
        }
        for f in operator_factors(self.inst, self.cfg, l, case) {
            let gamma_q = &f.gamma * rat_pow(&q, f.z_exp as i64);
            for _ in 0..f.multiplicity {
                for i in (1..window.len()).rev() {
                    let shifted = window[i - 1].scale(&gamma_q);
                    window[i] = window[i].sub(&shifted)?;
                }
            }
        }
        Ok(window.pop().expect("window nonempty"))
    }

    /// Verified upper bound on |L_{l,n}(omega)|_w, the omega side of the
    /// certificate chain.
    pub fn l_omega_bound(
        &mut self,
        l: u32,
        n: u64,
        omega1: &[Rat],
        precision_bits: u32,
    ) -> Result<Rat> {
        let case = self.inst.case_tag().effective(None);
        let encl = self.v_ln_omega_enclosure(l, n, case, omega1, precision_bits)?;
        let norm = match case {
            Case::A => rat_pow(self.inst.q(), self.case_a_power(l) as i64),
            Case::B => {
                let ord = self
                    .ord_z_vln(l, n)?
                    .ok_or_else(|| Error::Domain("v_{l,n} vanishes identically".into()))?;
                rat_pow(self.inst.q(), -(ord as i64))
            }
        };
        Ok(self.inst.abs_w(&norm) * encl.abs_upper())
    }
}

fn padic_goal(p: u64, precision_bits: u32) -> i64 {
    let goal = BigInt::one() << precision_bits;
    let mut v = 0i64;
    let mut pk = BigInt::one();
    while pk < goal {
        pk *= BigInt::from(p);
        v += 1;
    }
    v
}

/// Fraction-free determinant; row swaps flip the sign, and an unpivotable
/// column short-circuits to zero.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                m[i][j] = q;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Value |x|_w of the linear form evaluated on a rational vector.
pub fn vector_abs_w(inst: &ProblemInstance, vals: &[Rat]) -> Rat {
    vector_norm_v(vals, inst.place())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{config_spec, EvalConfig};
    use crate::rational::{rat, ratio};
    use crate::reference;

    fn tsch_cfg(inst: &ProblemInstance, s: u32) -> EvalConfig {
        EvalConfig::validate(inst, &config_spec(1, 1, &[rat(1)], vec![vec![s]])).unwrap()
    }

    #[test]
    fn u_n_examples() {
        let inst = reference::tschakaloff();
        let cfg = tsch_cfg(&inst, 2);
        let eng = FormsEngine::new(&inst, &cfg);
        let u1 = eng.u_symbolic(1);
        assert_eq!(u1.entries[0], QPoly::zero());
        assert_eq!(u1.entries[1], QPoly::one()); // sigma = 0
        assert_eq!(u1.entries[2], QPoly::one()); // sigma = 1
        let u0 = eng.u_symbolic(0);
        assert_eq!(u0.entries[1], QPoly::one());
        assert_eq!(u0.entries[2], QPoly::zero()); // C(0,1) = 0
    }

    #[test]
    fn v_n_examples() {
        let inst = reference::tschakaloff();
        let cfg = tsch_cfg(&inst, 1);
        let mut eng = FormsEngine::new(&inst, &cfg);
        let v0 = eng.v_symbolic(0);
        assert_eq!(v0.entries[0], QPoly::one());
        assert_eq!(v0.entries[1], QPoly::one());
        let v1 = eng.v_symbolic(1);
        assert_eq!(v1.entries[0], QPoly::monomial(rat(1), 1));
        assert_eq!(v1.entries[1], QPoly::from_coeffs(vec![rat(1), rat(1)]));
        let v2 = eng.v_symbolic(2);
        assert_eq!(v2.entries[0], QPoly::monomial(rat(1), 3));
        assert_eq!(
            v2.entries[1],
            QPoly::from_coeffs(vec![rat(1), rat(0), rat(1), rat(1)])
        );
    }

    #[test]
    fn recurrence_matches_direct_definition() {
        let inst = reference::quadratic_xy();
        let cfg =
            EvalConfig::validate(&inst, &config_spec(1, 2, &[rat(1)], vec![vec![1, 1]])).unwrap();
        let mut eng = FormsEngine::new(&inst, &cfg);
        for n in [0u64, 1, 3, 7, 12] {
            let rec = eng.v_symbolic(n);
            let direct = eng.v_symbolic_direct(n);
            assert_eq!(rec, direct, "mismatch at n = {n}");
        }
    }

    #[test]
    fn min_n_examples() {
        let quad = reference::quadratic_xy();
        let cfg_b =
            EvalConfig::validate(&quad, &config_spec(1, 2, &[rat(1)], vec![vec![1, 1]])).unwrap();
        assert_eq!(min_n(&quad, &cfg_b, 2, Case::B), 3);
        assert_eq!(min_n(&quad, &cfg_b, 0, Case::B), 0);

        let lin = reference::linear_over_x();
        let cfg_a = tsch_cfg(&lin, 1);
        assert_eq!(min_n(&lin, &cfg_a, 1, Case::A), 2);
    }

    #[test]
    fn operator_expansion_examples() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        match operator_expansion(&tsch, &cfg, 1, Case::B) {
            OperatorExpansion::Symbolic(c) => {
                assert_eq!(c.len(), 2);
                assert_eq!(c[0], QPoly::one());
                assert_eq!(c[1], QPoly::constant(rat(-1)));
            }
            _ => unreachable!(),
        }
        match operator_expansion(&tsch, &cfg, 0, Case::B) {
            OperatorExpansion::Symbolic(c) => assert_eq!(c.len(), 1),
            _ => unreachable!(),
        }

        let lin = reference::linear_over_x();
        let cfg_a = tsch_cfg(&lin, 1);
        match operator_expansion(&lin, &cfg_a, 1, Case::A) {
            OperatorExpansion::Specialized(c) => {
                assert_eq!(c, vec![rat(1), rat(-1), ratio(1, 4)]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn v_ln_examples() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        // v_{1,2} = v_2 - v_1 = (z^3 - z) x0 + (z^3 + z^2 - z) x1
        let v = eng.v_ln_symbolic(1, 2, None).unwrap();
        assert_eq!(v.entries[0], QPoly::from_coeffs(vec![rat(0), rat(-1), rat(0), rat(1)]));
        assert_eq!(
            v.entries[1],
            QPoly::from_coeffs(vec![rat(0), rat(-1), rat(1), rat(1)])
        );
        assert_eq!(v.ord_z(), Some(1));
        assert_eq!(eng.ord_z_vln(1, 2).unwrap(), Some(1));

        // l = 0 reduces to v_n itself
        let v0 = eng.v_ln_symbolic(0, 3, None).unwrap();
        assert_eq!(v0, eng.v_symbolic(3));

        let lin = reference::linear_over_x();
        let cfg_a = tsch_cfg(&lin, 1);
        let mut eng_a = FormsEngine::new(&lin, &cfg_a);
        assert_eq!(eng_a.v_at_q(0).entries, vec![rat(1), rat(1)]);
        assert_eq!(eng_a.v_at_q(1).entries, vec![rat(2), rat(3)]);
        assert_eq!(eng_a.v_at_q(2).entries, vec![rat(4), rat(7)]);
        let va = eng_a.v_ln_at_q(1, 2, Case::A).unwrap();
        assert_eq!(va.entries, vec![ratio(9, 4), ratio(17, 4)]);
        assert!(eng_a.v_ln_at_q(1, 1, Case::A).is_err());
    }

    #[test]
    fn ord_z_zero_form_sentinel() {
        let f = SymbolicForm::zero(3);
        assert_eq!(f.ord_z(), None);
        let g = SymbolicForm {
            entries: vec![
                QPoly::from_coeffs(vec![rat(0), rat(-1), rat(0), rat(1)]),
                QPoly::from_coeffs(vec![rat(0), rat(-1), rat(1), rat(1)]),
            ],
        };
        assert_eq!(g.ord_z(), Some(1));
    }

    #[test]
    fn l_ln_examples() {
        let lin = reference::linear_over_x();
        let cfg_a = tsch_cfg(&lin, 1);
        let mut eng = FormsEngine::new(&lin, &cfg_a);
        let l = eng.l_ln(1, 2).unwrap();
        assert_eq!(l.entries, vec![rat(9), rat(17)]);

        let tsch = reference::tschakaloff();
        let cfg_b = tsch_cfg(&tsch, 1);
        let mut eng_b = FormsEngine::new(&tsch, &cfg_b);
        let lb = eng_b.l_ln(1, 2).unwrap();
        assert_eq!(lb.entries, vec![rat(3), rat(5)]);
        let l0 = eng_b.l_ln(0, 0).unwrap();
        assert_eq!(l0.entries, vec![rat(1), rat(1)]);
    }

    #[test]
    fn hankel_examples() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        let omega = [rat(1), rat(1)];
        assert_eq!(eng.hankel_value(1, &omega).unwrap(), rat(2));
        assert_eq!(eng.hankel_value(2, &omega).unwrap(), rat(17));
        let zero = [rat(0), rat(0)];
        assert_eq!(eng.hankel_value(3, &zero).unwrap(), rat(0));
    }

    #[test]
    fn hankel_homogeneity() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        let omega = [ratio(3, 5), rat(-2)];
        let t = ratio(7, 3);
        for n in 1..=5u64 {
            let scaled: Vec<Rat> = omega.iter().map(|x| x * &t).collect();
            let lhs = eng.hankel_value(n, &scaled).unwrap();
            let rhs = eng.hankel_value(n, &omega).unwrap() * rat_pow(&t, n as i64);
            assert_eq!(lhs, rhs, "homogeneity fails at n = {n}");
        }
    }

    #[test]
    fn integrality_examples() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        assert_eq!(eng.integer_denominator(5), BigInt::one());
        assert!(eng.integrality_check(6));

        let lin = reference::linear_over_x();
        let cfg_a = tsch_cfg(&lin, 1);
        let mut eng_a = FormsEngine::new(&lin, &cfg_a);
        assert_eq!(eng_a.integer_denominator(3), BigInt::from(6));
        assert!(eng_a.integrality_check(3));

        // alpha = 1/3 forces D = 3
        let cfg_third = EvalConfig::validate(
            &tsch,
            &config_spec(1, 1, &[ratio(1, 3)], vec![vec![1]]),
        )
        .unwrap();
        let mut eng_t = FormsEngine::new(&tsch, &cfg_third);
        assert_eq!(eng_t.integer_denominator(2), BigInt::from(9));
        assert!(eng_t.integrality_check(4));
    }

    #[test]
    fn remainder_matches_direct_identity() {
        // v_1(q, omega) with omega_0 = -f(1): equals 3 - 2 f(1)
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        let r = eng.remainder_enclosure(1, &[rat(1)], 80).unwrap();
        let f1 = eng.series().f_deriv_enclosure(&rat(1), 0, 120).unwrap();
        // direct: 2*(-f(1)) + 3
        let direct = f1.scale(&rat(-2)).add(&Enclosure::exact(&Place::Infinite, rat(3))).unwrap();
        let diff = r.sub(&direct).unwrap();
        assert!(diff.contains_zero(), "remainder identity violated: {diff}");
        assert!(r.width_within(80));

        let zero = eng.remainder_enclosure(4, &[rat(0)], 32).unwrap();
        assert_eq!(zero.abs_upper(), rat(0));
    }

    #[test]
    fn remainder_decay_trend() {
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        let mut prev: Option<Rat> = None;
        for n in 4..10u64 {
            let e = eng.remainder_enclosure(n, &[rat(1)], 96).unwrap();
            let mag = e.abs_upper();
            if let Some(p) = prev {
                assert!(mag < p, "no decay at n = {n}");
            }
            prev = Some(mag);
        }
    }

    #[test]
    fn l_omega_bound_consistent_at_l0(){
        let tsch = reference::tschakaloff();
        let cfg = tsch_cfg(&tsch, 1);
        let mut eng = FormsEngine::new(&tsch, &cfg);
        let bound = eng.l_omega_bound(0, 3, &[rat(1)], 64).unwrap();
        let direct = eng.remainder_enclosure(3, &[rat(1)], 64).unwrap().abs_upper();
        // l = 0 normalization is q^(-ord v_3) with ord 0
        assert!(bound >= direct.clone() - crate::rational::pow2(-32));
        assert!(bound <= direct * rat(2) + crate::rational::pow2(-32));
    }

    #[test]
    fn bareiss_matches_small_dets() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(3)],
            vec![BigInt::from(5), BigInt::from(7)],
        ];
        assert_eq!(bareiss_det(m), BigInt::from(-1));
        let singular = vec![
            vec![BigInt::from(1), BigInt::from(2)],
            vec![BigInt::from(2), BigInt::from(4)],
        ];
        assert_eq!(bareiss_det(singular), BigInt::zero());
        let swap = vec![
            vec![BigInt::zero(), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::zero()],
        ];
        assert_eq!(bareiss_det(swap), BigInt::from(-1));
    }
}
