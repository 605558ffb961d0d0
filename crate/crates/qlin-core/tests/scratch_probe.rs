// Temporary probe for calibrating suite parameters; deleted before final.
use qlin_core::certify::CertifyOptions;
use qlin_core::reference;
use qlin_core::suites;

#[test]
#[ignore]
fn probe_decay() {
    let inst = reference::linear_over_x();
    let cfg = reference::basic_config(&inst);
    let t0 = std::time::Instant::now();
    let suite = suites::run_decay_scan(&inst, &cfg, &[1, 2, 3], 30, 64).unwrap();
    println!("decay scan took {:?}", t0.elapsed());
    for (l, s) in &suite.avg_steps {
        println!("l = {l}: avg step = {s:.4}");
    }
    println!("kappa_fit = {:.4} (target 1/6 = 0.1667)", suite.kappa_fit);
    println!("ok_steps = {}, ok_kappa = {}", suite.ok_steps, suite.ok_kappa);
}

#[test]
#[ignore]
fn probe_exponent_scan() {
    let inst = reference::linear_over_x();
    let cfg = reference::basic_config(&inst);
    let opts = CertifyOptions {
        l_max: 6,
        n_window: 40,
        ..CertifyOptions::default()
    };
    let t0 = std::time::Instant::now();
    let report = suites::run_exponent_scan(&inst, &cfg, 8, &opts).unwrap();
    println!("scan took {:?}", t0.elapsed());
    for r in &report.rows_adaptive {
        println!(
            "adaptive j: H={} l={} n={} neglog={:.3}",
            r.h, r.l, r.n, r.neg_log_bound
        );
    }
    for r in &report.rows_forced_l1 {
        println!(
            "forced   j: H={} l={} n={} neglog={:.3}",
            r.h, r.l, r.n, r.neg_log_bound
        );
    }
    println!(
        "fit adaptive e = {:.4} (pts {}), forced e = {:.4} (pts {})",
        report.fit_adaptive.exponent,
        report.fit_adaptive.points,
        report.fit_forced_l1.exponent,
        report.fit_forced_l1.points
    );
}

#[test]
#[ignore]
fn probe_order_deficit_full() {
    let inst = reference::quadratic_xy();
    let cfg = reference::quadratic_config(&inst);
    let t0 = std::time::Instant::now();
    let suite = suites::run_order_deficit(&inst, &cfg, 4, 20, 40).unwrap();
    println!("order deficit grid took {:?}", t0.elapsed());
    println!("c_fit = {}, ok = {}", suite.c_fit, suite.ok);
    let mut worst: Option<(u32, u64, f64)> = None;
    for r in &suite.rows {
        let v = r.bound_exponent;
        if worst.map_or(true, |(_, _, w)| v > w) {
            worst = Some((r.l, r.n, v));
        }
    }
    println!("worst ratio cell: {worst:?}");
}

#[test]
#[ignore]
fn probe_heights() {
    let inst = reference::linear_over_x();
    let cfg = reference::basic_config(&inst);
    let t0 = std::time::Instant::now();
    let suite =
        suites::run_height_growth(&inst, &cfg, qlin_core::Case::A, 3, 20, 40).unwrap();
    println!("height grid took {:?}", t0.elapsed());
    println!(
        "quadratic_ok = {}, c_prime = {:.4}, ok = {}",
        suite.quadratic_ok, suite.c_prime, suite.ok
    );
}

#[test]
#[ignore]
fn probe_soundness() {
    let inst = reference::tschakaloff();
    let cfg = reference::basic_config(&inst);
    let t0 = std::time::Instant::now();
    let suite = suites::run_soundness_suite(
        &inst,
        &cfg,
        42,
        50,
        256,
        &CertifyOptions::default(),
    )
    .unwrap();
    println!("soundness suite took {:?}", t0.elapsed());
    println!("ok = {}, skipped = {}", suite.ok, suite.skipped);
    for (a, l, n, b, c, s) in suite.rows.iter().take(5) {
        println!("A = {a:?} cell ({l},{n}) bound {b} check {c} sound {s}");
    }
}

#[test]
#[ignore]
fn probe_soundness_padic() {
    let inst = reference::tschakaloff_padic();
    let cfg = reference::basic_config(&inst);
    let t0 = std::time::Instant::now();
    let suite = suites::run_soundness_suite(
        &inst,
        &cfg,
        42,
        50,
        256,
        &CertifyOptions::default(),
    )
    .unwrap();
    println!("padic soundness took {:?}", t0.elapsed());
    println!("ok = {}, skipped = {}", suite.ok, suite.skipped);
}

#[test]
#[ignore]
fn probe_single_pf_cell() {
    use qlin_core::certify::{certify, EstimateMode};
    use qlin_core::rational::{pow2, rat};
    let inst = reference::linear_over_x();
    let cfg = reference::basic_config(&inst);
    for j in [1i64, 4, 8] {
        let a = vec![pow2(j), rat(1)];
        let opts = CertifyOptions {
            l_max: 1,
            n_window: 12,
            estimate: EstimateMode::ProductFormula,
            ..CertifyOptions::default()
        };
        match certify(&inst, &cfg, &a, &opts) {
            Ok(out) => {
                let c = &out.certificate;
                println!(
                    "j={j}: cell ({}, {}), floor={}, omega={}, lambda0={}, bound={}, diag={:?}",
                    c.l, c.n, c.reference_floor, c.omega_bound, c.lambda0, c.lower_bound,
                    out.diagnostics
                );
            }
            Err(e) => println!("j={j}: {e}"),
        }
    }
}

#[test]
#[ignore]
fn probe_tamper() {
    use qlin_core::certify::{certify, check_certificate};
    use qlin_core::rational::{parse_rat, rat, rat_string};
    let inst = reference::tschakaloff();
    let cfg = reference::basic_config(&inst);
    let a = vec![rat(3), rat(5)];
    let out = certify(&inst, &cfg, &a, &CertifyOptions::default()).unwrap();
    let c = &out.certificate;
    println!("cell ({}, {}) bits {} omega {} floor {} bound {}",
        c.l, c.n, c.omega_precision_bits, c.omega_bound, c.reference_floor, c.lower_bound);
    let mut stale = c.clone();
    let om = parse_rat(&stale.omega_bound).unwrap();
    stale.omega_bound = rat_string(&(om / rat(2)));
    let rep = check_certificate(&stale).unwrap();
    println!("halved-omega check: ok={} failed={:?}", rep.ok, rep.failed_step);
}
