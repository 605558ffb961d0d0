//! Certified lower bounds on |A_0 + sum A_{j,k,sigma} f^(sigma)(alpha_j q^k)|_w.
//!
//! For an admissible cell (l, n) the chain combines three exact facts:
//! L_{l,n}(A) != 0 with its exact w-size (or its product-formula floor
//! |A|_w / (H_w(L) H(A))), a verified enclosure bound on |L_{l,n}(omega)|_w
//! for the relation vector omega, and the identity
//! L(A) - L(omega) = lambda_0 (A_0 - omega_0). Every inequality in the
//! emitted certificate is replayable in exact rational arithmetic.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigSpec, EvalConfig};
use crate::error::{Error, Result};
use crate::forms::{min_n, vector_abs_w, FormsEngine};
use crate::instance::{Case, InstanceSpec, ProblemInstance};
use crate::places::{height_vector, Place};
use crate::rational::{log2_approx, parse_rat, rat_string, Rat};
use crate::series::SeriesEngine;

/// How the certifier lower-bounds |L_{l,n}(A)|_w.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    /// Use the exact rational value. Sharpest; the default.
    Exact,
    /// Use the product-formula floor |A|_w / (H_w(L) H(A)) and majorize
    /// |omega_1|_w by |A|_w, mirroring the height-driven selection of the
    /// admissible cell. Weaker but exhibits the height-exponent shape.
    ProductFormula,
}

impl EstimateMode {
    fn as_str(&self) -> &'static str {
        match self {
            EstimateMode::Exact => "exact",
            EstimateMode::ProductFormula => "product_formula",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EstimateMode::Exact),
            "product_formula" => Ok(EstimateMode::ProductFormula),
            _ => Err(Error::Validation(format!("unknown estimate mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub l_max: u32,
    pub n_window: u64,
    pub base_precision_bits: u32,
    pub max_precision_bits: u32,
    pub estimate: EstimateMode,
    /// Restrict the search to a single l.
    pub forced_l: Option<u32>,
    /// Pin the cell entirely (scale-covariance checks).
    pub forced_cell: Option<(u32, u64)>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            l_max: 4,
            n_window: 24,
            base_precision_bits: 96,
            max_precision_bits: 1 << 14,
            estimate: EstimateMode::Exact,
            forced_l: None,
            forced_cell: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TrailStep {
    pub step: String,
    pub lhs: String,
    pub op: String,
    pub rhs: String,
}

/// Self-contained, independently re-checkable certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub estimate_mode: String,
    pub case: String,
    pub instance: InstanceSpec,
    pub config: ConfigSpec,
    pub instance_digest: String,
    pub config_digest: String,
    pub a: Vec<String>,
    pub l: u32,
    pub n: u64,
    pub l_a: String,
    pub lambda0: String,
    pub omega_bound: String,
    pub omega_precision_bits: u32,
    pub h_a: String,
    pub hw_l: String,
    pub a_abs_w: String,
    pub reference_floor: String,
    pub lower_bound: String,
    pub trail: Vec<TrailStep>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        serde_json::from_str(text).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn lower_bound_rat(&self) -> Result<Rat> {
        parse_rat(&self.lower_bound)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchDiagnostics {
    pub cells_tried: u64,
    pub zero_form: u64,
    pub l_a_zero: u64,
    pub lambda0_zero: u64,
    pub inadmissible: u64,
}

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub certificate: Certificate,
    pub diagnostics: SearchDiagnostics,
}

struct CellResult {
    l: u32,
    n: u64,
    l_a: Rat,
    lambda0: Rat,
    hw_l: Rat,
    floor: Rat,
    omega_raw: Rat,
    omega_used: Rat,
    omega_bits: u32,
    bound: Rat,
}

/// Search admissible (l, n) cells and emit the best certificate in budget.
pub fn certify(
    inst: &ProblemInstance,
    cfg: &EvalConfig,
    a: &[Rat],
    opts: &CertifyOptions,
) -> Result<CertifyOutcome> {
    let mut engine = FormsEngine::new(inst, cfg);
    certify_with_engine(&mut engine, a, opts)
}

/// Same search on a caller-owned engine, so repeated certifications of
/// related vectors share form and enclosure caches.
pub fn certify_with_engine(
    engine: &mut FormsEngine<'_>,
    a: &[Rat],
    opts: &CertifyOptions,
) -> Result<CertifyOutcome> {
    let inst = engine.instance();
    let cfg = engine.config();
    if a.len() != cfg.dim() {
        return Err(Error::Validation(format!(
            "coefficient vector has dimension {}, config needs {}",
            a.len(),
            cfg.dim()
        )));
    }
    if a.iter().all(|x| x.is_zero()) {
        return Err(Error::Validation("coefficient vector must be nonzero".into()));
    }
    let case = inst.case_tag().effective(None);
    let h_a = height_vector(a)?;
    let a_abs_w = vector_abs_w(inst, a);
    let omega1: Vec<Rat> = a[1..].to_vec();
    let omega1_abs_w = if omega1.iter().all(|x| x.is_zero()) {
        Rat::zero()
    } else {
        vector_abs_w(inst, &omega1)
    };

    let mut best: Option<CellResult> = None;
    let mut diag = SearchDiagnostics::default();

    let l_range: Vec<u32> = match (opts.forced_cell, opts.forced_l) {
        (Some((l, _)), _) => vec![l],
        (None, Some(l)) => vec![l],
        (None, None) => (1..=opts.l_max).collect(),
    };
    let log_q = crate::rational::ceil_log2(&inst.q_abs_w()).max(1) as u64;
    for l in l_range {
        let start = min_n(inst, cfg, l, case);
        let n_range: Vec<u64> = match opts.forced_cell {
            Some((fl, fnn)) => {
                if fl == l {
                    vec![fnn]
                } else {
                    vec![]
                }
            }
            None => (start..start.saturating_add(opts.n_window)).collect(),
        };
        // In product-formula mode the bound only degrades past the first
        // admissible n of a level (the floor shrinks while |lambda0| grows),
        // so the level is abandoned after a short confirmation run.
        let mut admitted_here = 0u32;
        for n in n_range {
            if opts.estimate == EstimateMode::ProductFormula && admitted_here > 2 {
                break;
            }
            diag.cells_tried += 1;
            let form = match engine.l_ln_in_case(l, n, case) {
                Ok(f) => f,
                Err(_) => {
                    diag.zero_form += 1;
                    continue;
                }
            };
            let l_a = form.dot(a);
            if l_a.is_zero() {
                diag.l_a_zero += 1;
                continue;
            }
            let lambda0 = form.entries[0].clone();
            if lambda0.is_zero() {
                diag.lambda0_zero += 1;
                continue;
            }
            let hw_l = form.height_excluding(inst.place())?;
            let floor = match opts.estimate {
                EstimateMode::Exact => inst.abs_w(&l_a),
                EstimateMode::ProductFormula => &a_abs_w / (&hw_l * &h_a),
            };
            // omega side: verified upper bound at adaptive precision,
            // seeded to the expected q^(-(l+1) n) decay scale
            let seed_bits = ((l as u64 + 2) * (n + 1) * log_q + 32)
                .min(u32::MAX as u64) as u32;
            let mut bits = opts.base_precision_bits.max(seed_bits);
            let mut prev: Option<Rat> = None;
            let mut admitted: Option<(Rat, Rat, u32)> = None;
            loop {
                let raw = match engine.l_omega_bound(l, n, &omega1, bits) {
                    Ok(r) => r,
                    Err(Error::PrecisionUnreachable) => break,
                    Err(e) => return Err(e),
                };
                let used = match opts.estimate {
                    EstimateMode::Exact => raw.clone(),
                    EstimateMode::ProductFormula => {
                        if omega1_abs_w.is_zero() {
                            Rat::zero()
                        } else {
                            &raw * &a_abs_w / &omega1_abs_w
                        }
                    }
                };
                if &used + &used <= floor {
                    admitted = Some((raw, used, bits));
                    break;
                }
                // a bound that stopped shrinking will not become admissible
                if let Some(p) = &prev {
                    if &used * Rat::from_integer(8.into())
                        > p * Rat::from_integer(7.into())
                    {
                        break;
                    }
                }
                prev = Some(used);
                if bits >= opts.max_precision_bits {
                    break;
                }
                bits = (bits * 2).min(opts.max_precision_bits);
            }
            let Some((omega_raw, omega_used, omega_bits)) = admitted else {
                diag.inadmissible += 1;
                continue;
            };
            admitted_here += 1;
            let bound = chain_bound(inst.place(), &floor, &omega_used, &inst.abs_w(&lambda0));
            let better = match &best {
                None => true,
                Some(b) => {
                    (bound.clone(), std::cmp::Reverse(l), std::cmp::Reverse(n))
                        > (b.bound.clone(), std::cmp::Reverse(b.l), std::cmp::Reverse(b.n))
                }
            };
            if better {
                best = Some(CellResult {
                    l,
                    n,
                    l_a,
                    lambda0,
                    hw_l,
                    floor,
                    omega_raw,
                    omega_used,
                    omega_bits,
                    bound,
                });
            }
        }
    }

    let Some(cell) = best else {
        return Err(Error::NoAdmissibleCell(format!(
            "tried {} cells: {} zero forms, {} with L(A) = 0, {} with lambda0 = 0, {} inadmissible omega bounds",
            diag.cells_tried, diag.zero_form, diag.l_a_zero, diag.lambda0_zero, diag.inadmissible
        )));
    };

    let half_floor = &cell.floor / Rat::from_integer(2.into());
    let trail = vec![
        TrailStep {
            step: "form_nonzero".into(),
            lhs: rat_string(&cell.l_a),
            op: "!=".into(),
            rhs: "0".into(),
        },
        TrailStep {
            step: "lambda0_nonzero".into(),
            lhs: rat_string(&cell.lambda0),
            op: "!=".into(),
            rhs: "0".into(),
        },
        TrailStep {
            step: "reference_floor".into(),
            lhs: rat_string(&cell.floor),
            op: "<=".into(),
            rhs: rat_string(&inst.abs_w(&cell.l_a)),
        },
        TrailStep {
            step: "omega_scaled".into(),
            lhs: rat_string(&cell.omega_raw),
            op: "<=".into(),
            rhs: rat_string(&cell.omega_used),
        },
        TrailStep {
            step: "omega_bound_halved".into(),
            lhs: rat_string(&cell.omega_used),
            op: "<=".into(),
            rhs: rat_string(&half_floor),
        },
        TrailStep {
            step: "lower_bound_chain".into(),
            lhs: rat_string(&cell.bound),
            op: "<=".into(),
            rhs: format!(
                "chain({}, {}, {})",
                rat_string(&cell.floor),
                rat_string(&cell.omega_used),
                rat_string(&inst.abs_w(&cell.lambda0))
            ),
        },
        TrailStep {
            step: "lower_bound_positive".into(),
            lhs: rat_string(&cell.bound),
            op: ">".into(),
            rhs: "0".into(),
        },
    ];
    let instance_spec: InstanceSpec = serde_json::from_str(inst.canonical_json())
        .expect("canonical json parses");
    let config_spec: ConfigSpec =
        serde_json::from_str(cfg.canonical_json()).expect("canonical json parses");
    let certificate = Certificate {
        schema_version: 1,
        estimate_mode: opts.estimate.as_str().into(),
        case: format!("{case:?}"),
        instance: instance_spec,
        config: config_spec,
        instance_digest: inst.digest(),
        config_digest: cfg.digest(),
        a: a.iter().map(rat_string).collect(),
        l: cell.l,
        n: cell.n,
        l_a: rat_string(&cell.l_a),
        lambda0: rat_string(&cell.lambda0),
        omega_bound: rat_string(&cell.omega_used),
        omega_precision_bits: cell.omega_bits,
        h_a: rat_string(&h_a),
        hw_l: rat_string(&cell.hw_l),
        a_abs_w: rat_string(&a_abs_w),
        reference_floor: rat_string(&cell.floor),
        lower_bound: rat_string(&cell.bound),
        trail,
    };
    Ok(CertifyOutcome {
        certificate,
        diagnostics: diag,
    })
}

/// (floor - omega)/|lambda0| at the archimedean place; the ultrametric
/// pins |L(A) - L(omega)|_w = |L(A)|_w >= floor once omega < floor.
fn chain_bound(place: &Place, floor: &Rat, omega_used: &Rat, lambda0_abs: &Rat) -> Rat {
    match place {
        Place::Infinite => (floor - omega_used) / lambda0_abs,
        Place::Prime(_) => floor / lambda0_abs,
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub ok: bool,
    pub failed_step: Option<String>,
}

/// Recompute every certified quantity from scratch and replay the trail.
pub fn check_certificate(cert: &Certificate) -> Result<CheckReport> {
    let fail = |step: &str| CheckReport {
        ok: false,
        failed_step: Some(step.to_string()),
    };
    let inst = ProblemInstance::validate(&cert.instance)?;
    let cfg = EvalConfig::validate(&inst, &cert.config)?;
    if inst.digest() != cert.instance_digest || cfg.digest() != cert.config_digest {
        return Ok(fail("digest_mismatch"));
    }
    let mode = EstimateMode::parse(&cert.estimate_mode)?;
    let case = match cert.case.as_str() {
        "A" => Case::A,
        "B" => Case::B,
        other => return Err(Error::Validation(format!("unknown case '{other}'"))),
    };
    if !inst.case_tag().allows(case) {
        return Ok(fail("case_unavailable"));
    }
    let a = cert
        .a
        .iter()
        .map(|s| parse_rat(s))
        .collect::<Result<Vec<_>>>()?;
    if a.len() != cfg.dim() || a.iter().all(|x| x.is_zero()) {
        return Ok(fail("coefficient_vector"));
    }

    let mut engine = FormsEngine::new(&inst, &cfg);
    let form = match engine.l_ln_in_case(cert.l, cert.n, case) {
        Ok(f) => f,
        Err(_) => return Ok(fail("form_nonzero")),
    };
    let l_a = form.dot(&a);
    if l_a.is_zero() || rat_string(&l_a) != cert.l_a {
        return Ok(fail("form_nonzero"));
    }
    let lambda0 = form.entries[0].clone();
    if lambda0.is_zero() || rat_string(&lambda0) != cert.lambda0 {
        return Ok(fail("lambda0_nonzero"));
    }
    let h_a = height_vector(&a)?;
    let a_abs_w = vector_abs_w(&inst, &a);
    let hw_l = form.height_excluding(inst.place())?;
    if rat_string(&h_a) != cert.h_a
        || rat_string(&a_abs_w) != cert.a_abs_w
        || rat_string(&hw_l) != cert.hw_l
    {
        return Ok(fail("height_bookkeeping"));
    }
    let floor = match mode {
        EstimateMode::Exact => inst.abs_w(&l_a),
        EstimateMode::ProductFormula => &a_abs_w / (&hw_l * &h_a),
    };
    let recorded_floor = parse_rat(&cert.reference_floor)?;
    if floor != recorded_floor || floor > inst.abs_w(&l_a) {
        return Ok(fail("reference_floor"));
    }

    // fresh enclosures at equal-or-better precision must confirm the
    // recorded omega bound; a tampered (too small) bound leaves the fresh
    // bound stuck above it
    let omega1: Vec<Rat> = a[1..].to_vec();
    let recorded_omega = parse_rat(&cert.omega_bound)?;
    let mut bits = cert.omega_precision_bits;
    let mut confirmed = false;
    let mut prev: Option<Rat> = None;
    loop {
        let fresh_raw = engine.l_omega_bound(cert.l, cert.n, &omega1, bits)?;
        let fresh_used = match mode {
            EstimateMode::Exact => fresh_raw,
            EstimateMode::ProductFormula => {
                if omega1.iter().all(|x| x.is_zero()) {
                    Rat::zero()
                } else {
                    fresh_raw * &a_abs_w / vector_abs_w(&inst, &omega1)
                }
            }
        };
        if fresh_used <= recorded_omega {
            confirmed = true;
            break;
        }
        if let Some(p) = &prev {
            if &fresh_used * Rat::from_integer(8.into()) > p * Rat::from_integer(7.into()) {
                break;
            }
        }
        prev = Some(fresh_used);
        if bits >= 1 << 20 {
            break;
        }
        bits *= 2;
    }
    if !confirmed {
        return Ok(fail("omega_bound_confirmed"));
    }
    if &recorded_omega + &recorded_omega > floor {
        return Ok(fail("omega_bound_halved"));
    }
    let max_bound = chain_bound(inst.place(), &floor, &recorded_omega, &inst.abs_w(&lambda0));
    let lower = parse_rat(&cert.lower_bound)?;
    if lower > max_bound {
        return Ok(fail("lower_bound_chain"));
    }
    if !lower.is_positive() {
        return Ok(fail("lower_bound_positive"));
    }
    Ok(CheckReport {
        ok: true,
        failed_step: None,
    })
}

#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub lower_bound: Rat,
    pub true_abs_lower: Rat,
    pub true_abs_upper: Rat,
    pub ok: bool,
}

/// Evaluate the true linear form at high precision and verify the bound.
pub fn soundness_crosscheck(
    inst: &ProblemInstance,
    cfg: &EvalConfig,
    a: &[Rat],
    cert: &Certificate,
    precision_bits: u32,
) -> Result<SoundnessReport> {
    let mut series = SeriesEngine::new(inst);
    let value = series.linear_form_value(cfg, a, precision_bits)?;
    let lower_bound = cert.lower_bound_rat()?;
    let true_abs_lower = value.abs_lower();
    let true_abs_upper = value.abs_upper();
    let ok = lower_bound.is_positive() && lower_bound <= true_abs_lower;
    Ok(SoundnessReport {
        lower_bound,
        true_abs_lower,
        true_abs_upper,
        ok,
    })
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub h: Rat,
    pub log_h: f64,
    pub l: u32,
    pub n: u64,
    pub lower_bound: Rat,
    pub neg_log_bound: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub exponent: f64,
    pub ln_prefactor: f64,
    pub rms_residual: f64,
    pub points: usize,
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub rows_adaptive: Vec<ScanRow>,
    pub rows_forced_l1: Vec<ScanRow>,
    pub fit_adaptive: FitResult,
    pub fit_forced_l1: FitResult,
}

/// Certify a family of growing-height vectors in product-formula mode, with
/// and without the adaptive choice of l, and fit the exponent e in
/// -log(bound) ~ C (log H)^e.
pub fn exponent_scan(
    inst: &ProblemInstance,
    cfg: &EvalConfig,
    family: &[Vec<Rat>],
    opts: &CertifyOptions,
) -> Result<ScanReport> {
    let mut scan_opts = opts.clone();
    scan_opts.estimate = EstimateMode::ProductFormula;
    scan_opts.forced_l = None;
    let mut forced_opts = scan_opts.clone();
    forced_opts.forced_l = Some(1);

    let mut engine = FormsEngine::new(inst, cfg);
    let mut rows_adaptive = Vec::new();
    let mut rows_forced_l1 = Vec::new();
    for a in family {
        for (opts, rows) in [
            (&scan_opts, &mut rows_adaptive),
            (&forced_opts, &mut rows_forced_l1),
        ] {
            if let Ok(out) = certify_with_engine(&mut engine, a, opts) {
                let h = height_vector(a)?;
                let bound = out.certificate.lower_bound_rat()?;
                let log_h = log2_approx(&h) * std::f64::consts::LN_2;
                let neg_log_bound = -log2_approx(&bound) * std::f64::consts::LN_2;
                rows.push(ScanRow {
                    h,
                    log_h,
                    l: out.certificate.l,
                    n: out.certificate.n,
                    lower_bound: bound,
                    neg_log_bound,
                });
            }
        }
    }
    let fit_adaptive = fit_power_law(&rows_adaptive);
    let fit_forced_l1 = fit_power_law(&rows_forced_l1);
    Ok(ScanReport {
        rows_adaptive,
        rows_forced_l1,
        fit_adaptive,
        fit_forced_l1,
    })
}

/// Least squares for ln(neg_log_bound) = ln C + e ln(log H).
pub fn fit_power_law(rows: &[ScanRow]) -> FitResult {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.log_h > 1e-9 && r.neg_log_bound > 1e-9)
        .map(|r| (r.log_h.ln(), r.neg_log_bound.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return FitResult {
            exponent: f64::NAN,
            ln_prefactor: f64::NAN,
            rms_residual: f64::NAN,
            points: n,
            degenerate: true,
        };
    }
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let var_x = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    if var_x < 1e-12 {
        return FitResult {
            exponent: f64::NAN,
            ln_prefactor: f64::NAN,
            rms_residual: f64::NAN,
            points: n,
            degenerate: true,
        };
    }
    let cov = pts
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>();
    let e = cov / var_x;
    let c = mean_y - e * mean_x;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - (c + e * p.0)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    FitResult {
        exponent: e,
        ln_prefactor: c,
        rms_residual: rms,
        points: n,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2, rat, ratio};
    use crate::reference;

    #[test]
    fn certify_tschakaloff_relation_vector() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(1), rat(-2)];
        let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();
        let b = out.certificate.lower_bound_rat().unwrap();
        assert!(b.is_positive());
        // |1 - 2 f(1)| = 2.2832651...
        assert!(b <= ratio(229, 100) , "bound {b} exceeds the true value");
        let check = check_certificate(&out.certificate).unwrap();
        assert!(check.ok, "failed at {:?}", check.failed_step);
        let sound = soundness_crosscheck(&inst, &cfg, &a, &out.certificate, 256).unwrap();
        assert!(sound.ok, "bound {} vs true >= {}", sound.lower_bound, sound.true_abs_lower);
    }

    #[test]
    fn certify_degenerate_vector() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(1), rat(0)];
        let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();
        let b = out.certificate.lower_bound_rat().unwrap();
        assert!(b.is_positive() && b <= rat(1));
    }

    #[test]
    fn certify_rejects_zero_vector() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let err = certify(&inst, &cfg, &[rat(0), rat(0)], &CertifyOptions::default());
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn padic_bound_is_power_of_two() {
        let inst = reference::tschakaloff_padic();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(1), rat(1)];
        let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();
        let b = out.certificate.lower_bound_rat().unwrap();
        assert!(b.is_positive());
        let num_pow2 = b.numer().magnitude().count_ones() == 1;
        let den_pow2 = b.denom().magnitude().count_ones() == 1;
        assert!(num_pow2 && den_pow2, "not a power of two: {b}");
        let check = check_certificate(&out.certificate).unwrap();
        assert!(check.ok);
        let sound = soundness_crosscheck(&inst, &cfg, &a, &out.certificate, 128).unwrap();
        assert!(sound.ok);
    }

    #[test]
    fn tampered_certificates_fail() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(3), rat(5)];
        let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();

        let mut doubled = out.certificate.clone();
        let b = doubled.lower_bound_rat().unwrap();
        doubled.lower_bound = rat_string(&(b * rat(2)));
        let rep = check_certificate(&doubled).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.failed_step.as_deref(), Some("lower_bound_chain"));

        let mut stale = out.certificate.clone();
        let om = parse_rat(&stale.omega_bound).unwrap();
        stale.omega_bound = rat_string(&(om / rat(2)));
        let rep = check_certificate(&stale).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.failed_step.as_deref(), Some("omega_bound_confirmed"));
    }

    #[test]
    fn monotone_budget() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(7), rat(3)];
        let small = CertifyOptions {
            n_window: 6,
            l_max: 2,
            ..CertifyOptions::default()
        };
        let large = CertifyOptions {
            n_window: 16,
            l_max: 4,
            ..CertifyOptions::default()
        };
        let b_small = certify(&inst, &cfg, &a, &small)
            .unwrap()
            .certificate
            .lower_bound_rat()
            .unwrap();
        let b_large = certify(&inst, &cfg, &a, &large)
            .unwrap()
            .certificate
            .lower_bound_rat()
            .unwrap();
        assert!(b_large >= b_small);
    }

    #[test]
    fn scale_covariance_at_fixed_cell() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        let a = vec![rat(5), rat(2)];
        let t = ratio(-7, 3);
        let scaled: Vec<Rat> = a.iter().map(|x| x * &t).collect();
        let opts = CertifyOptions {
            forced_cell: Some((1, 8)),
            base_precision_bits: 128,
            ..CertifyOptions::default()
        };
        let b1 = certify(&inst, &cfg, &a, &opts)
            .unwrap()
            .certificate
            .lower_bound_rat()
            .unwrap();
        let b2 = certify(&inst, &cfg, &scaled, &opts)
            .unwrap()
            .certificate
            .lower_bound_rat()
            .unwrap();
        assert_eq!(b2, b1 * t.abs(), "chain is not scale-covariant");
    }

    #[test]
    fn near_relation_vector_still_sound() {
        let inst = reference::tschakaloff();
        let cfg = reference::basic_config(&inst);
        // A approximates (-f(1), 1) scaled: a tiny but certifiable value
        let approx_f1 = ratio(1641633, 1000000);
        let a = vec![-approx_f1, rat(1)];
        let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();
        let sound = soundness_crosscheck(&inst, &cfg, &a, &out.certificate, 384).unwrap();
        assert!(sound.ok);
        assert!(out.certificate.lower_bound_rat().unwrap() < pow2(-10));
    }

    #[test]
    fn fit_handles_degenerate_families() {
        let rows: Vec<ScanRow> = (0..5)
            .map(|i| ScanRow {
                h: rat(3),
                log_h: (3f64).ln(),
                l: 1,
                n: 4 + i,
                lower_bound: ratio(1, 100),
                neg_log_bound: (100f64).ln(),
            })
            .collect();
        assert!(fit_power_law(&rows).degenerate);
        assert!(fit_power_law(&[]).degenerate);
    }
}
