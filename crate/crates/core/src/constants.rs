//! Every free constant the algorithms and reports depend on, in one place.
//!
//! The asymptotic statements these routines realise leave their constants
//! unspecified. The values here are the ones used for every reported number,
//! and each run record echoes the relevant ones back.

use std::f64::consts::LOG2_E;

/// Additive constant `c` in `c + log N - log log M` for printed bound values:
/// `log2(e) + 2`.
pub const REPORT_C: f64 = LOG2_E + 2.0;

/// Query budget factor of one multi-target search attempt: an attempt over a
/// domain of size `K` promised to hold at least `t` marked items stops after
/// `ceil(BUDGET_FACTOR * sqrt(K / t))` queries.
pub const BUDGET_FACTOR: f64 = 9.0 / 4.0;

/// Growth factor of the iteration-range bound between attempts.
pub const SCHEDULE_GROWTH: f64 = 6.0 / 5.0;

/// The `k`-th level of the binary-search comparator repeats its search
/// `COMPARATOR_REPEAT * k` times.
pub const COMPARATOR_REPEAT: usize = 3;

/// The comparator stops halving once its range has at most this many bits and
/// reads them classically.
pub const COMPARATOR_LEAF: usize = 2;

/// Upper cover fraction of a column in the oracle-identification cover step.
/// Columns are read relative to the live majority string, so no column ever
/// covers more than this fraction.
pub const OIP_MAX_COVER: f64 = 0.5;

/// Cover-fraction threshold used when `beta'` is undefined (`M <= 2`) or
/// outside `(0, 1)` and the run was asked to clamp instead of failing.
pub const OIP_BETA_CLAMP: f64 = 0.25;

/// Error share of the identification stage (OIP or state discrimination).
pub const IDENTIFY_ERROR: f64 = 1.0 / 6.0;

/// Error share of the final equality test.
pub const VERIFY_ERROR: f64 = 1.0 / 6.0;

/// Error target of a standalone equality test.
pub const EQUALITY_TEST_ERROR: f64 = 1.0 / 3.0;

/// Error share of each Grover test in the subcube evaluator (suffix test and
/// marker test); the comparator's share follows from its repetition rule.
pub const SUBCUBE_TEST_ERROR: f64 = 1.0 / 9.0;

/// `kappa` in the copy-count cap `ceil(kappa log M / (log N - log log M + c))`.
pub const COPY_KAPPA: f64 = 6.0;

/// Largest on-set handled by the Gram-matrix discrimination routine.
pub const MAX_GRAM: usize = 4096;

/// Norm tolerance of the simulator.
pub const NORM_TOL: f64 = 1e-9;

/// Smallest Gram eigenvalue accepted as numerically zero.
pub const PSD_TOL: f64 = 1e-9;
