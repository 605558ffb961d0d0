//! Exact-arithmetic construction and certification of auxiliary linear
//! forms for values of generalized q-series.
//!
//! The crate builds, entirely in exact rational arithmetic over the places
//! of Q, the sequence of linear forms attached to a series
//! f(z) = sum_n z^n / Pi_n(q) with Pi_n(z) = prod_k P(k, z^k)/Q(k), applies
//! difference-operator products to sharpen their decay, and emits
//! self-contained certificates lower-bounding |A_0 + sum A_{j,k,sigma}
//! f^(sigma)(alpha_j q^k)|_w for rational coefficient vectors. Rigorous
//! numerics use exact-endpoint intervals at the archimedean place and
//! approximant-plus-valuation balls p-adically.
//!
//! Modules:
//! - [`places`], [`rational`], [`poly`], [`enclosure`]: exact scalars,
//!   normalized absolute values, heights, polynomial norms, enclosures.
//! - [`instance`], [`config`]: validated problem data and admissibility.
//! - [`series`]: Pi caches, rigorous evaluation of f and its derivatives,
//!   the functional-equation residual, derivative reduction.
//! - [`forms`]: u_n, v_n, operator products, v_{l,n}, L_{l,n}, z-orders,
//!   Hankel determinants, integrality and height bookkeeping.
//! - [`certify`]: the certificate pipeline and its independent checker.
//! - [`suites`]: deterministic grid scans and randomized verification
//!   suites shared by the tests and the CLI.

pub mod certify;
pub mod config;
pub mod enclosure;
pub mod error;
pub mod forms;
pub mod instance;
pub mod places;
pub mod poly;
pub mod rational;
pub mod reference;
pub mod series;
pub mod suites;

pub use config::{ConfigSpec, EvalConfig};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use instance::{Case, CaseTag, InstanceSpec, ProblemInstance};
pub use places::Place;
pub use poly::QPoly;
pub use rational::Rat;
