//! End-to-end evaluation algorithms for `f` in `F_{N,M}`.
//!
//! Each algorithm is written once against [`Exec`], so the same code yields a
//! sampled run (seeded RNG, real query count) or, through
//! [`exact_paths`](crate::qsim::exact_paths), the exact probability of every
//! outcome on a given input.

mod average;
mod oip;
mod subcube;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::measures::BoundParams;
use crate::qsim::ExactPath;

pub use average::{
    average_case_evaluate, pgm_success_probabilities, AverageCasePlan, Pgm, PgmModel,
};
pub use oip::{
    oip_identify, oip_identify_distribution, worst_case_evaluate, BetaPolicy, OipConfig,
    WorstCasePlan,
};
pub use subcube::{subcube_evaluate, subcube_run, SubcubePlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Subcube,
    WorstCase,
    AverageCase,
}

impl std::fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgorithmId::Subcube => "subcube",
            AlgorithmId::WorstCase => "worst-case",
            AlgorithmId::AverageCase => "average-case",
        })
    }
}

/// One sampled run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: AlgorithmId,
    pub n: usize,
    pub m: u64,
    pub seed: u64,
    pub input_x: BitString,
    pub output: bool,
    pub correct: bool,
    pub queries: u64,
    pub params: BoundParams,
    /// Algorithm-specific settings and flags, e.g. the copy count.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, String)>,
}

/// Exact behaviour of a decision algorithm on one input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub input_x: BitString,
    pub truth: bool,
    /// Probability of answering 1.
    pub p_one: f64,
    /// Probability of answering `truth`.
    pub p_correct: f64,
    /// Largest query count over all paths (worst-case search budgets).
    pub max_queries: u64,
    pub paths: usize,
}

impl ExactSummary {
    pub fn from_paths(input_x: BitString, truth: bool, paths: &[ExactPath<bool>]) -> Self {
        let p_one: f64 = paths
            .iter()
            .filter(|p| p.value)
            .map(|p| p.probability)
            .sum();
        Self {
            input_x,
            truth,
            p_one,
            p_correct: if truth { p_one } else { 1.0 - p_one },
            max_queries: paths.iter().map(|p| p.queries).max().unwrap_or(0),
            paths: paths.len(),
        }
    }
}
