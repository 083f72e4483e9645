//! Execution context shared by the composed algorithms.
//!
//! Every probabilistic branch an algorithm takes (a measurement outcome, a
//! search result) goes through [`Exec::decide`]. In sampled mode the branch is
//! drawn from a seeded RNG. In exact mode it is replayed from a script, so
//! that [`exact_paths`] can walk every branch and weight it by its exact
//! probability. Exact mode never samples and never simulates a measurement.

use crate::error::{Error, Result};
use crate::qsim::oracle::QueryCounter;
use crate::qsim::register::sample_from;
use crate::rng::SimRng;

/// Upper limit on the number of paths [`exact_paths`] will walk.
pub const MAX_EXACT_PATHS: usize = 1 << 20;

#[derive(Debug)]
enum Mode {
    Sampled(Box<SimRng>),
    Exact(Replay),
}

#[derive(Debug, Default)]
struct Replay {
    script: Vec<usize>,
    pos: usize,
    trace: Vec<(usize, Vec<f64>)>,
    prob: f64,
}

#[derive(Debug)]
pub struct Exec {
    counter: QueryCounter,
    charged: u64,
    mode: Mode,
}

impl Exec {
    pub fn sampled(rng: SimRng) -> Self {
        Self {
            counter: QueryCounter::new(),
            charged: 0,
            mode: Mode::Sampled(Box::new(rng)),
        }
    }

    fn exact(script: Vec<usize>) -> Self {
        Self {
            counter: QueryCounter::new(),
            charged: 0,
            mode: Mode::Exact(Replay {
                script,
                prob: 1.0,
                ..Replay::default()
            }),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, Mode::Exact(_))
    }

    pub fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    pub fn counter_mut(&mut self) -> &mut QueryCounter {
        &mut self.counter
    }

    /// Queries made so far. In exact mode, subroutines whose outcome is taken
    /// from an analytic distribution charge their worst-case query budget
    /// instead of simulating, and that charge is included here.
    pub fn queries(&self) -> u64 {
        self.counter.count() + self.charged
    }

    pub(crate) fn charge(&mut self, queries: u64) {
        debug_assert!(self.is_exact());
        self.charged += queries;
    }

    /// The RNG, in sampled mode.
    pub fn rng(&mut self) -> Option<&mut SimRng> {
        match &mut self.mode {
            Mode::Sampled(rng) => Some(rng),
            Mode::Exact(_) => None,
        }
    }

    pub(crate) fn sampled_parts(&mut self) -> Option<(&mut QueryCounter, &mut SimRng)> {
        match &mut self.mode {
            Mode::Sampled(rng) => Some((&mut self.counter, rng)),
            Mode::Exact(_) => None,
        }
    }

    /// Probability of the path taken so far (exact mode), 1 otherwise.
    pub fn path_probability(&self) -> f64 {
        match &self.mode {
            Mode::Sampled(_) => 1.0,
            Mode::Exact(r) => r.prob,
        }
    }

    /// Picks a branch with the given probabilities.
    pub fn decide(&mut self, probs: &[f64]) -> usize {
        assert!(!probs.is_empty());
        match &mut self.mode {
            Mode::Sampled(rng) => sample_from(probs, rng),
            Mode::Exact(r) => {
                let choice = if r.pos < r.script.len() {
                    r.script[r.pos]
                } else {
                    probs.iter().position(|&p| p > 0.0).unwrap_or(0)
                };
                r.pos += 1;
                r.prob *= probs[choice];
                r.trace.push((choice, probs.to_vec()));
                choice
            }
        }
    }
}

/// One exactly-weighted execution path.
#[derive(Clone, Debug)]
pub struct ExactPath<T> {
    pub probability: f64,
    pub queries: u64,
    pub value: T,
}

/// Runs `f` once per branch combination with positive probability.
///
/// `f` must be deterministic apart from its [`Exec::decide`] calls.
pub fn exact_paths<T, F>(mut f: F) -> Result<Vec<ExactPath<T>>>
where
    F: FnMut(&mut Exec) -> Result<T>,
{
    let mut out = Vec::new();
    let mut script = Vec::new();
    loop {
        let mut exec = Exec::exact(script);
        let value = f(&mut exec)?;
        let Mode::Exact(replay) = exec.mode else {
            unreachable!()
        };
        out.push(ExactPath {
            probability: replay.prob,
            queries: exec.counter.count() + exec.charged,
            value,
        });
        if out.len() > MAX_EXACT_PATHS {
            return Err(Error::OutsideRegime(format!(
                "more than {MAX_EXACT_PATHS} execution paths"
            )));
        }
        // Odometer step: advance the deepest decision that has a later
        // positive-probability branch.
        let next = replay
            .trace
            .iter()
            .enumerate()
            .rev()
            .find_map(|(i, (c, p))| (c + 1..p.len()).find(|&k| p[k] > 0.0).map(|k| (i, k)));
        match next {
            None => return Ok(out),
            Some((i, k)) => {
                script = replay.trace[..i].iter().map(|(c, _)| *c).collect();
                script.push(k);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_tree_with_exact_weights() {
        let paths = exact_paths(|e| {
            let a = e.decide(&[0.25, 0.0, 0.75]);
            if a == 0 {
                Ok(10 + e.decide(&[0.5, 0.5]))
            } else {
                Ok(a)
            }
        })
        .unwrap();
        let got: Vec<(f64, usize)> = paths.iter().map(|p| (p.probability, p.value)).collect();
        assert_eq!(got, vec![(0.125, 10), (0.125, 11), (0.75, 2)]);
    }

    #[test]
    fn deterministic_function_has_one_path() {
        let paths = exact_paths(|_| Ok(())).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].probability, 1.0);
    }
}
