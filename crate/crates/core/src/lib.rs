//! Exact evaluation and analysis of functions built from ±1 Faber–Schauder
//! coefficients: uniform extrema, moduli of continuity, pathwise quadratic
//! variation and covariation along dyadic partitions, and pathwise Itô sums.
//!
//! Every number is computed exactly in `Q(sqrt 2)` ([`QuadValue`]); decimal
//! output is a correctly rounded rendering of the exact value.

pub mod error;
pub mod exact;
pub mod extrema;
pub mod follmer;
pub mod grid;
pub mod modulus;
pub mod par;
pub mod quadvar;
pub mod schauder;
pub mod scheme;
pub mod table;
pub mod takagi;

/// Highest generation count accepted by pointwise evaluation.
pub const MAX_LEVEL: u32 = 62;

pub use error::{Result, TakagiError};
pub use exact::{DyadicRational, QuadValue, Rational};
pub use extrema::{grid_extrema, grid_oscillation, jacobsthal, max_value, maximizers, ExtremaReport};
pub use follmer::{follmer_sum, ito_residual, RationalPolynomial};
pub use grid::{GridPath, MAX_GRID_LEVEL};
pub use modulus::{modulus_scan, nu, omega, witness_ratios, ModulusReport, WitnessKind, WitnessRow};
pub use par::Execution;
pub use quadvar::{cov_approx, counterexample_series, qv_approx, qv_of_sum, qv_profile, PartitionLevel, QVSeries};
pub use schauder::{eval_e, eval_f, wedge_peak, BasisIndex};
pub use scheme::{CoefficientScheme, Sign};
pub use takagi::{recover_coefficient, Approximation, TakagiFunction};
