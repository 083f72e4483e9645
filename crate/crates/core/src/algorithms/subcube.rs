//! Evaluation of the subcube function in `O(sqrt N)` queries.

use crate::algorithms::{AlgorithmId, ExactSummary, RunRecord};
use crate::bits::{low_mask, BitString};
use crate::boolfn::{check_onset_size, floor_log2};
use crate::constants::SUBCUBE_TEST_ERROR;
use crate::error::{Error, Result};
use crate::measures::BoundParams;
use crate::qsim::{
    binary_grover_comparator, exact_paths, grover_equality_test, Comparison, Exec, Oracle,
    OracleView,
};
use crate::rng::substream;

/// The subcube function of `(n, m)` and everything its evaluator needs.
#[derive(Clone, Debug)]
pub struct SubcubePlan {
    n: usize,
    m: u64,
    params: BoundParams,
}

impl SubcubePlan {
    pub fn new(n: usize, m: u64) -> Result<Self> {
        check_onset_size(n, m)?;
        Ok(Self {
            n,
            m,
            params: BoundParams::new(n, m)?,
        })
    }

    /// Prefix length `floor(log2 m)`.
    fn l(&self) -> usize {
        floor_log2(self.m) as usize
    }

    /// `f(x)` in closed form, for any `n <= 64`.
    pub fn truth(&self, x: &BitString) -> bool {
        let s = self.n - self.l();
        let suffix = x.value() & low_mask(s);
        let prefix = if self.l() == 0 { 0 } else { x.value() >> s };
        let delta = self.m - (1u64 << self.l());
        suffix == 0 || (suffix == 1 << (s - 1) && prefix < delta)
    }

    /// Suffix-zero test, then (when `m` is not a power of two) the marker test
    /// and the prefix comparison against `m - 2^L - 1`.
    pub fn run(&self, exec: &mut Exec, view: &OracleView<'_>) -> Result<bool> {
        if view.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: view.len(),
            });
        }
        let l = self.l();
        let s = self.n - l;
        let suffix = view.slice(l..self.n);
        if grover_equality_test(exec, &suffix, &BitString::zeros(s), SUBCUBE_TEST_ERROR)? {
            return Ok(true);
        }
        if self.m.is_power_of_two() {
            return Ok(false);
        }
        let marker = BitString::unit(s, 0);
        if !grover_equality_test(exec, &suffix, &marker, SUBCUBE_TEST_ERROR)? {
            return Ok(false);
        }
        let delta = self.m - (1u64 << l);
        let threshold = BitString::new(l, delta - 1)?;
        let bits: Vec<bool> = threshold.bits().collect();
        Ok(binary_grover_comparator(exec, &view.slice(0..l), &bits)? == Comparison::LessOrEqual)
    }

    pub fn evaluate(&self, x: BitString, seed: u64) -> Result<RunRecord> {
        let oracle = Oracle::phase(x);
        let mut exec = Exec::sampled(substream(seed, x.value()));
        let output = self.run(&mut exec, &oracle.view())?;
        let truth = self.truth(&x);
        Ok(RunRecord {
            algorithm: AlgorithmId::Subcube,
            n: self.n,
            m: self.m,
            seed,
            input_x: x,
            output,
            correct: output == truth,
            queries: exec.queries(),
            params: self.params.clone(),
            notes: vec![],
        })
    }

    pub fn exact(&self, x: BitString) -> Result<ExactSummary> {
        let oracle = Oracle::phase(x);
        let paths = exact_paths(|e| self.run(e, &oracle.view()))?;
        Ok(ExactSummary::from_paths(x, self.truth(&x), &paths))
    }
}

/// `subcube_function(n, m)` evaluated on the hidden input with an `Exec`.
pub fn subcube_run(exec: &mut Exec, view: &OracleView<'_>, n: usize, m: u64) -> Result<bool> {
    SubcubePlan::new(n, m)?.run(exec, view)
}

/// One sampled run on `oracle`'s input.
pub fn subcube_evaluate(oracle: &Oracle, n: usize, m: u64, seed: u64) -> Result<RunRecord> {
    SubcubePlan::new(n, m)?.evaluate(oracle.reveal(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::subcube_function;

    #[test]
    fn closed_form_matches_table() {
        for n in 1..=8 {
            for m in 1..=(1u64 << (n - 1)) {
                let f = subcube_function(n, m).unwrap();
                let plan = SubcubePlan::new(n, m).unwrap();
                for v in 0..1u64 << n {
                    let x = BitString::new(n, v).unwrap();
                    assert_eq!(plan.truth(&x), f.eval(&x).unwrap(), "n={n} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_exact_n8() {
        for m in [16, 3] {
            let plan = SubcubePlan::new(8, m).unwrap();
            for v in 0..256 {
                let s = plan.exact(BitString::new(8, v).unwrap()).unwrap();
                assert!(
                    s.p_correct >= 2.0 / 3.0,
                    "m={m} x={} p={}",
                    s.input_x,
                    s.p_correct
                );
            }
        }
    }

    #[test]
    fn power_of_two_runs_one_test() {
        // x in the cube: no disagreement, one deterministic path.
        let plan = SubcubePlan::new(8, 16).unwrap();
        let s = plan.exact("10110000".parse().unwrap()).unwrap();
        assert_eq!((s.paths, s.p_correct), (1, 1.0));
    }

    #[test]
    fn sampled_query_count_matches_counter() {
        let plan = SubcubePlan::new(10, 5).unwrap();
        let r = plan.evaluate("0010100000".parse().unwrap(), 3).unwrap();
        assert!(r.queries > 0);
        assert!(r.correct);
    }
}
