//! Evaluation configurations (m, d0, alpha_j, s_{j,k}) with the three
//! admissibility conditions decided exactly: membership of a ratio in q^Z is
//! solved through the w-adic size of the ratio, which pins down the only
//! candidate exponent.


use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::places::{valuation, Place};
use crate::rational::{parse_rat, rat_pow, rat_string, Rat};

/// On-disk form of a configuration.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConfigSpec {
    pub m: usize,
    pub d0: usize,
    pub alphas: Vec<String>,
    /// m x d0 matrix of positive integers s_{j,k}.
    pub s: Vec<Vec<u32>>,
}

/// Index entry for one coordinate of the variable vector beyond x_0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarIndex {
    /// 1-based point group.
    pub j: usize,
    pub k: usize,
    pub sigma: u32,
}

/// Validated configuration with the flattened index map for x.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    canonical_json: String,
    pub m: usize,
    pub d0: usize,
    pub alphas: Vec<Rat>,
    pub s: Vec<Vec<u32>>,
    /// s_j = max_k s_{j,k}.
    pub s_max: Vec<u32>,
    /// S = sum_j s_j.
    pub s_total: u64,
    vars: Vec<VarIndex>,
}

impl EvalConfig {
    pub fn validate(inst: &ProblemInstance, spec: &ConfigSpec) -> Result<EvalConfig> {
        let canonical_json =
            serde_json::to_string(spec).map_err(|e| Error::Validation(e.to_string()))?;
        if spec.m == 0 {
            return Err(Error::Validation("m must be positive".into()));
        }
        if spec.d0 < inst.d() {
            return Err(Error::Validation(format!(
                "d0 = {} must be at least d = {}",
                spec.d0,
                inst.d()
            )));
        }
        if spec.alphas.len() != spec.m || spec.s.len() != spec.m {
            return Err(Error::Validation(
                "alphas and s must both have m rows".into(),
            ));
        }
        let alphas = spec
            .alphas
            .iter()
            .map(|a| parse_rat(a))
            .collect::<Result<Vec<_>>>()?;
        for (j, a) in alphas.iter().enumerate() {
            if a.is_zero() {
                return Err(Error::Validation(format!("alpha_{} must be nonzero", j + 1)));
            }
        }
        for (j, row) in spec.s.iter().enumerate() {
            if row.len() != spec.d0 {
                return Err(Error::Validation(format!(
                    "s row {} must have d0 = {} entries",
                    j + 1,
                    spec.d0
                )));
            }
            if row.iter().any(|&s| s == 0) {
                return Err(Error::Validation("s entries must be positive".into()));
            }
        }

        // condition (i): alpha_i / alpha_j must avoid q^Z for i != j
        for i in 0..spec.m {
            for j in 0..i {
                let ratio = &alphas[i] / &alphas[j];
                if let Some(t) = q_power_exponent(inst, &ratio) {
                    return Err(Error::Validation(format!(
                        "condition (i) violated: alpha_{} / alpha_{} = q^{}",
                        i + 1,
                        j + 1,
                        t
                    )));
                }
            }
        }
        // condition (ii): s_{j,k} bounded by deg p_d on the upper window
        let delta_d = inst.delta_d() as u32;
        for (j, row) in spec.s.iter().enumerate() {
            for k in inst.d()..spec.d0 {
                if row[k] > delta_d {
                    return Err(Error::Validation(format!(
                        "condition (ii) violated at (j,k) = ({},{}): s = {} exceeds deg p_d = {}",
                        j + 1,
                        k,
                        row[k],
                        delta_d
                    )));
                }
            }
        }
        // condition (iii): when deg p_0 = deg Q the alphas must avoid
        // (a/b) q^N, a and b the leading coefficients
        if inst.p_nu(0).degree() == inst.q_poly().degree() {
            let a = inst.p_nu(0).leading().expect("nonzero by degree equality");
            let b = inst.q_poly().leading().expect("Q nonzero");
            let ab = a / b;
            if !ab.is_zero() {
                for (j, alpha) in alphas.iter().enumerate() {
                    let ratio = alpha / &ab;
                    if let Some(t) = q_power_exponent(inst, &ratio) {
                        if t >= 0 {
                            return Err(Error::Validation(format!(
                                "condition (iii) violated: alpha_{} = (a/b) q^{}",
                                j + 1,
                                t
                            )));
                        }
                    }
                }
            }
        }

        let s_max: Vec<u32> = spec
            .s
            .iter()
            .map(|row| *row.iter().max().expect("d0 >= 1"))
            .collect();
        let s_total = s_max.iter().map(|&s| s as u64).sum();
        let mut vars = Vec::new();
        for j in 1..=spec.m {
            for k in 0..spec.d0 {
                for sigma in 0..spec.s[j - 1][k] {
                    vars.push(VarIndex { j, k, sigma });
                }
            }
        }
        Ok(EvalConfig {
            canonical_json,
            m: spec.m,
            d0: spec.d0,
            alphas,
            s: spec.s.clone(),
            s_max,
            s_total,
            vars,
        })
    }

    pub fn from_json(inst: &ProblemInstance, text: &str) -> Result<EvalConfig> {
        let spec: ConfigSpec =
            serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))?;
        Self::validate(inst, &spec)
    }

    pub fn canonical_json(&self) -> &str {
        &self.canonical_json
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_json.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Dimension of the variable vector x = (x_0, x_{j,k,sigma}).
    pub fn dim(&self) -> usize {
        1 + self.vars.len()
    }

    /// Index entries for positions 1..dim, in (j, k, sigma) order.
    pub fn vars(&self) -> &[VarIndex] {
        &self.vars
    }

    /// Flattened position of x_{j,k,sigma} (j is 1-based).
    pub fn position(&self, j: usize, k: usize, sigma: u32) -> Option<usize> {
        self.vars
            .iter()
            .position(|v| v.j == j && v.k == k && v.sigma == sigma)
            .map(|i| i + 1)
    }

    /// alpha_j q^k, the evaluation point behind position (j, k, .).
    pub fn point(&self, inst: &ProblemInstance, j: usize, k: usize) -> Rat {
        &self.alphas[j - 1] * rat_pow(inst.q(), k as i64)
    }

    pub fn describe_var(&self, pos: usize) -> String {
        if pos == 0 {
            "x0".into()
        } else {
            let v = &self.vars[pos - 1];
            format!("x[{},{},{}]", v.j, v.k, v.sigma)
        }
    }
}

/// Decide whether `ratio` lies in q^Z and return the exponent. The w-adic
/// size |ratio|_w = |q|_w^t determines the only candidate t, which is then
/// confirmed by exact equality.
pub fn q_power_exponent(inst: &ProblemInstance, ratio: &Rat) -> Option<i64> {
    if ratio.is_zero() {
        return None;
    }
    let t = match inst.place() {
        Place::Infinite => {
            let q_abs = inst.q_abs_w();
            let mut r = ratio.abs();
            let mut t = 0i64;
            while r > Rat::one() {
                r /= &q_abs;
                t += 1;
                if t > 1_000_000 {
                    return None;
                }
            }
            while r < Rat::one() {
                r *= &q_abs;
                t -= 1;
                if t < -1_000_000 {
                    return None;
                }
            }
            if r != Rat::one() {
                return None;
            }
            t
        }
        Place::Prime(p) => {
            let vq = valuation(*p, inst.q()).expect("q nonzero");
            let vr = valuation(*p, ratio).expect("ratio nonzero");
            if vq == 0 || vr % vq != 0 {
                return None;
            }
            vr / vq
        }
    };
    if rat_pow(inst.q(), t) == *ratio {
        Some(t)
    } else {
        None
    }
}

/// Convenience constructor used by tests and the reference configurations.
pub fn config_spec(m: usize, d0: usize, alphas: &[Rat], s: Vec<Vec<u32>>) -> ConfigSpec {
    ConfigSpec {
        m,
        d0,
        alphas: alphas.iter().map(rat_string).collect(),
        s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};
    use crate::reference;

    #[test]
    fn accepts_basic_config() {
        let inst = reference::tschakaloff();
        let cfg = EvalConfig::validate(&inst, &config_spec(1, 1, &[rat(1)], vec![vec![2]])).unwrap();
        assert_eq!(cfg.dim(), 3);
        assert_eq!(cfg.s_total, 2);
        assert_eq!(cfg.position(1, 0, 1), Some(2));
        assert_eq!(cfg.describe_var(2), "x[1,0,1]");
    }

    #[test]
    fn rejects_q_power_ratio() {
        let inst = reference::tschakaloff();
        let err = EvalConfig::validate(
            &inst,
            &config_spec(2, 1, &[rat(1), rat(4)], vec![vec![1], vec![1]]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("condition (i)"), "{err}");
        assert!(err.to_string().contains("q^2"), "{err}");
    }

    #[test]
    fn rejects_condition_ii() {
        let inst = reference::tschakaloff();
        let err =
            EvalConfig::validate(&inst, &config_spec(1, 2, &[rat(1)], vec![vec![1, 1]])).unwrap_err();
        assert!(err.to_string().contains("condition (ii)"), "{err}");
    }

    #[test]
    fn condition_i_is_symmetric() {
        let inst = reference::tschakaloff();
        for (a, b) in [(rat(3), rat(6)), (ratio(1, 3), rat(5)), (rat(2), rat(7))] {
            let fwd = EvalConfig::validate(
                &inst,
                &config_spec(2, 1, &[a.clone(), b.clone()], vec![vec![1], vec![1]]),
            )
            .is_ok();
            let rev = EvalConfig::validate(
                &inst,
                &config_spec(2, 1, &[b, a], vec![vec![1], vec![1]]),
            )
            .is_ok();
            assert_eq!(fwd, rev);
        }
    }

    #[test]
    fn q_power_solver() {
        let inst = reference::tschakaloff();
        assert_eq!(q_power_exponent(&inst, &rat(8)), Some(3));
        assert_eq!(q_power_exponent(&inst, &ratio(1, 4)), Some(-2));
        assert_eq!(q_power_exponent(&inst, &rat(1)), Some(0));
        assert_eq!(q_power_exponent(&inst, &rat(3)), None);
        assert_eq!(q_power_exponent(&inst, &rat(-8)), None);

        let padic = reference::tschakaloff_padic();
        assert_eq!(q_power_exponent(&padic, &ratio(1, 8)), Some(3));
        assert_eq!(q_power_exponent(&padic, &ratio(3, 8)), None);
        assert_eq!(q_power_exponent(&padic, &rat(4)), Some(-2));
    }

    #[test]
    fn condition_iii_on_equal_degrees() {
        // P = y^2 + 2, Q = 3: deg p_0 = deg Q = 0, a/b = 2/3;
        // alpha = (2/3) q^1 = 4/3 must be rejected, alpha = 2/9 accepted
        // (2/9 = (2/3) q^t only for t < 0, outside N).
        let spec = crate::instance::InstanceSpec {
            p: vec![vec!["2".into()], vec!["0".into()], vec!["1".into()]],
            q_poly: vec!["3".into()],
            q: "2".into(),
            place: "infinity".into(),
        };
        let inst = ProblemInstance::validate(&spec).unwrap();
        let bad = EvalConfig::validate(
            &inst,
            &config_spec(1, 2, &[ratio(4, 3)], vec![vec![1, 1]]),
        );
        assert!(bad.unwrap_err().to_string().contains("condition (iii)"));
        let good = EvalConfig::validate(
            &inst,
            &config_spec(1, 2, &[ratio(1, 3)], vec![vec![1, 1]]),
        );
        assert!(good.is_ok());
    }
}
