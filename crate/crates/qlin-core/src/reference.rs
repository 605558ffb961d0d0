//! Reference instances and configurations used across the documentation,
//! the verification suites, and the CLI examples.

use crate::config::{config_spec, EvalConfig};
use crate::instance::{InstanceSpec, ProblemInstance};
use crate::rational::rat;

fn build(p: Vec<Vec<&str>>, q_poly: Vec<&str>, q: &str, place: &str) -> ProblemInstance {
    let spec = InstanceSpec {
        p: p.into_iter()
            .map(|row| row.into_iter().map(String::from).collect())
            .collect(),
        q_poly: q_poly.into_iter().map(String::from).collect(),
        q: q.into(),
        place: place.into(),
    };
    ProblemInstance::validate(&spec).expect("reference instance is valid")
}

/// P = y, Q = 1, q = 2 at the archimedean place: the pure q-power series
/// sum_n z^n 2^(-n(n+1)/2).
pub fn tschakaloff() -> ProblemInstance {
    build(vec![vec!["0"], vec!["1"]], vec!["1"], "2", "infinity")
}

/// P = y, Q = x, q = 2: the case-(a) reference with h = 1, g1 = 1.
pub fn linear_over_x() -> ProblemInstance {
    build(vec![vec!["0"], vec!["1"]], vec!["0", "1"], "2", "infinity")
}

/// P = y^2 - x y, Q = 1, q = 2: the case-(b) reference with d = 2, g2 = 1.
pub fn quadratic_xy() -> ProblemInstance {
    build(
        vec![vec!["0"], vec!["0", "-1"], vec!["1"]],
        vec!["1"],
        "2",
        "infinity",
    )
}

/// P = x y + 1, Q = 1, q = 2: non-constant top coefficient, used by the
/// derivative-reduction examples.
pub fn xy_plus_one() -> ProblemInstance {
    build(vec![vec!["1"], vec!["0", "1"]], vec!["1"], "2", "infinity")
}

/// P = y, Q = 1, q = 1/2 at w = 2: the 2-adic variant of the pure q-power
/// series, f(1) = sum_n 2^(n(n+1)/2).
pub fn tschakaloff_padic() -> ProblemInstance {
    build(vec![vec!["0"], vec!["1"]], vec!["1"], "1/2", "p:2")
}

/// The single-point, single-derivative configuration (m = 1, alpha = 1,
/// d0 = 1, s = (1)) valid on every reference instance.
pub fn basic_config(inst: &ProblemInstance) -> EvalConfig {
    EvalConfig::validate(inst, &config_spec(1, 1, &[rat(1)], vec![vec![1]]))
        .expect("reference config is valid")
}

/// Two-column configuration for the d = 2 quadratic reference.
pub fn quadratic_config(inst: &ProblemInstance) -> EvalConfig {
    EvalConfig::validate(inst, &config_spec(1, 2, &[rat(1)], vec![vec![1, 1]]))
        .expect("reference config is valid")
}
