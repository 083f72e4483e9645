//! Oracle identification over an explicit candidate set, and the worst-case
//! evaluator built on it.
//!
//! Each round works relative to the majority string `s` of the live
//! candidates, so a column "covers" the candidates that disagree with `s`
//! there and no column covers more than half of them.
//!
//! * Dense phase: greedily pick columns (largest cover first) whose cover of
//!   not-yet-covered candidates is at least `max(1, ceil(beta |S|))`. Search
//!   those columns for a disagreement between `x` and `s`. A hit at `c` keeps
//!   the candidates that disagree with `s` at `c`; a miss drops every
//!   candidate covered by the chosen columns.
//! * Sparse phase (no column qualifies): with `h = gamma' N`, if some
//!   candidate is farther than `h` from `s`, search all columns under the
//!   promise of more than `h` disagreements; a miss keeps the candidates
//!   within `h`. Otherwise search with no promise; a miss keeps `s` itself.
//!
//! A hit is always a genuine disagreement, so only misses can discard `x`.
//! Round `r` runs its search at error `IDENTIFY_ERROR * 6 / (pi^2 r^2)`,
//! which sums to at most `IDENTIFY_ERROR` however many rounds are needed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmId, ExactSummary, RunRecord};
use crate::bits::BitString;
use crate::boolfn::BooleanFunction;
use crate::constants::{IDENTIFY_ERROR, OIP_BETA_CLAMP, VERIFY_ERROR};
use crate::error::{Error, Result};
use crate::measures::{beta_prime, gamma_prime, BoundParams};
use crate::qsim::{
    attempts_for, exact_paths, grover_equality_test, search, Exec, Oracle, OracleView,
};
use crate::rng::substream;

/// What to do when `beta'` is not below 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaPolicy {
    /// Fail with [`Error::BetaOutOfRange`].
    Strict,
    /// Use [`OIP_BETA_CLAMP`] and flag the run.
    Clamp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OipConfig {
    pub n: usize,
    pub beta: f64,
    /// `beta'` itself, when defined.
    pub beta_prime: Option<f64>,
    pub clamped: bool,
}

impl OipConfig {
    /// Cover threshold for `m` candidates of length `n`. `beta'` is undefined
    /// for `m <= 2`; the clamp value is used there under either policy.
    pub fn new(n: usize, m: u64, policy: BetaPolicy) -> Result<Self> {
        let bp = beta_prime(n, m);
        let (beta, clamped) = match bp {
            Some(b) if b > 0.0 && b < 1.0 => (b, false),
            Some(b) if policy == BetaPolicy::Strict && b >= 1.0 => {
                return Err(Error::BetaOutOfRange { beta: b });
            }
            _ => (OIP_BETA_CLAMP, true),
        };
        Ok(Self {
            n,
            beta,
            beta_prime: bp,
            clamped,
        })
    }
}

fn round_error(round: usize) -> f64 {
    IDENTIFY_ERROR * 6.0 / (std::f64::consts::PI.powi(2) * (round * round) as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    live: Vec<u64>,
    round: usize,
}

enum Step {
    Done(Option<u64>),
    Next(State),
}

fn bit(v: u64, n: usize, j: usize) -> bool {
    (v >> (n - 1 - j)) & 1 == 1
}

fn majority(live: &[u64], n: usize) -> u64 {
    let mut s = 0u64;
    for j in 0..n {
        let ones = live.iter().filter(|&&v| bit(v, n, j)).count();
        if 2 * ones > live.len() {
            s |= 1 << (n - 1 - j);
        }
    }
    s
}

fn step(cfg: &OipConfig, state: &State, exec: &mut Exec, view: &OracleView<'_>) -> Result<Step> {
    let n = cfg.n;
    match state.live.len() {
        0 => return Ok(Step::Done(None)),
        1 => return Ok(Step::Done(Some(state.live[0]))),
        _ => {}
    }
    let s = majority(&state.live, n);
    let s_bits = BitString::new(n, s)?;
    let rel: Vec<u64> = state.live.iter().map(|v| v ^ s).collect();
    let size = rel.len();
    let delta = round_error(state.round);
    let keep = |pred: &dyn Fn(u64) -> bool| -> Vec<u64> {
        state
            .live
            .iter()
            .zip(&rel)
            .filter(|(_, &r)| pred(r))
            .map(|(&v, _)| v)
            .collect()
    };

    let tau = ((cfg.beta * size as f64).ceil() as usize).max(1);
    let mut cover: Vec<(usize, usize)> = (0..n)
        .map(|j| (rel.iter().filter(|&&r| bit(r, n, j)).count(), j))
        .collect();
    cover.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut covered = vec![false; size];
    let mut cols = Vec::new();
    for &(c, j) in &cover {
        if c < tau {
            break;
        }
        let fresh = (0..size)
            .filter(|&i| !covered[i] && bit(rel[i], n, j))
            .count();
        if fresh >= tau {
            cols.push(j);
            for i in 0..size {
                covered[i] |= bit(rel[i], n, j);
            }
        }
    }

    let live = if !cols.is_empty() {
        let mask: Vec<bool> = cols.iter().map(|&j| s_bits.get(j)).collect();
        let v = view.select(&cols).xor_mask(&mask)?;
        let attempts = attempts_for(cols.len(), 1, delta);
        match search(exec, &v, 1, attempts)? {
            Some(i) => {
                let c = cols[i];
                keep(&|r| bit(r, n, c))
            }
            None => keep(&|r| cols.iter().all(|&j| !bit(r, n, j))),
        }
    } else {
        let h = gamma_prime(n, size as u64).expect("two or more live candidates") * n as f64;
        let v = view.xor_bits(&s_bits)?;
        let heavy = rel.iter().any(|r| r.count_ones() as f64 > h);
        let t_min = if heavy { h.floor() as usize + 1 } else { 1 };
        let attempts = attempts_for(n, t_min, delta);
        match search(exec, &v, t_min, attempts)? {
            Some(c) => keep(&|r| bit(r, n, c)),
            None if heavy => keep(&|r| r.count_ones() as f64 <= h),
            None => keep(&|r| r == 0),
        }
    };
    debug_assert!(live.len() < size);
    Ok(Step::Next(State {
        live,
        round: state.round + 1,
    }))
}

fn initial_state(n: usize, candidates: &[BitString]) -> Result<State> {
    let mut live = Vec::with_capacity(candidates.len());
    for c in candidates {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
        live.push(c.value());
    }
    live.sort_unstable();
    live.dedup();
    if live.len() != candidates.len() {
        return Err(Error::InvalidBitString(
            "candidates must be distinct".into(),
        ));
    }
    if live.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(State { live, round: 1 })
}

/// Identifies the hidden input among `candidates`. Returns `None` if every
/// candidate was ruled out, which can only happen when the input is not a
/// candidate or a search missed.
pub fn oip_identify(
    exec: &mut Exec,
    view: &OracleView<'_>,
    candidates: &[BitString],
    cfg: &OipConfig,
) -> Result<Option<BitString>> {
    if view.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            found: view.len(),
        });
    }
    let mut state = initial_state(cfg.n, candidates)?;
    loop {
        match step(cfg, &state, exec, view)? {
            Step::Done(v) => return v.map(|v| BitString::new(cfg.n, v)).transpose(),
            Step::Next(s) => state = s,
        }
    }
}

/// Exact output distribution of [`oip_identify`] on `oracle`'s input.
#[derive(Clone, Debug)]
pub struct IdentifyDistribution {
    pub outcomes: Vec<(Option<BitString>, f64)>,
    pub max_queries: u64,
}

#[derive(Clone, Default)]
struct Dist {
    outcomes: HashMap<Option<u64>, f64>,
    max_queries: u64,
}

/// Exact output distribution, memoised over live candidate sets.
pub fn oip_identify_distribution(
    oracle: &Oracle,
    candidates: &[BitString],
    cfg: &OipConfig,
) -> Result<IdentifyDistribution> {
    let view = oracle.view();
    let start = initial_state(cfg.n, candidates)?;
    let mut memo = HashMap::new();
    let d = dist_of(cfg, &start, &view, &mut memo)?;
    let mut outcomes: Vec<(Option<BitString>, f64)> = d
        .outcomes
        .into_iter()
        .map(|(v, p)| Ok((v.map(|v| BitString::new(cfg.n, v)).transpose()?, p)))
        .collect::<Result<_>>()?;
    outcomes.sort_by_key(|o| o.0);
    Ok(IdentifyDistribution {
        outcomes,
        max_queries: d.max_queries,
    })
}

fn dist_of(
    cfg: &OipConfig,
    state: &State,
    view: &OracleView<'_>,
    memo: &mut HashMap<State, Dist>,
) -> Result<Dist> {
    if let Some(d) = memo.get(state) {
        return Ok(d.clone());
    }
    let branches = exact_paths(|e| step(cfg, state, e, view))?;
    let mut out = Dist::default();
    for b in branches {
        let (child, q) = match b.value {
            Step::Done(v) => (
                Dist {
                    outcomes: HashMap::from([(v, 1.0)]),
                    max_queries: 0,
                },
                b.queries,
            ),
            Step::Next(s) => (dist_of(cfg, &s, view, memo)?, b.queries),
        };
        for (v, p) in child.outcomes {
            *out.outcomes.entry(v).or_default() += b.probability * p;
        }
        out.max_queries = out.max_queries.max(q + child.max_queries);
    }
    memo.insert(state.clone(), out.clone());
    Ok(out)
}

/// Identification over the on-set followed by an equality test against the
/// identified candidate.
#[derive(Clone, Debug)]
pub struct WorstCasePlan {
    f: BooleanFunction,
    onset: Vec<BitString>,
    cfg: OipConfig,
    params: BoundParams,
}

impl WorstCasePlan {
    pub fn new(f: &BooleanFunction, policy: BetaPolicy) -> Result<Self> {
        let (n, m) = (f.arity(), f.onset_size());
        Ok(Self {
            f: f.clone(),
            onset: f.onset(),
            cfg: OipConfig::new(n, m, policy)?,
            params: BoundParams::new(n, m)?,
        })
    }

    pub fn config(&self) -> &OipConfig {
        &self.cfg
    }

    pub fn run(&self, exec: &mut Exec, view: &OracleView<'_>) -> Result<bool> {
        match oip_identify(exec, view, &self.onset, &self.cfg)? {
            None => Ok(false),
            Some(z) => grover_equality_test(exec, view, &z, VERIFY_ERROR),
        }
    }

    fn notes(&self) -> Vec<(String, String)> {
        let mut v = vec![("beta".to_string(), format!("{}", self.cfg.beta))];
        if self.cfg.clamped {
            v.push(("beta_clamped".into(), "true".into()));
        }
        v
    }

    pub fn evaluate(&self, x: BitString, seed: u64) -> Result<RunRecord> {
        let oracle = Oracle::phase(x);
        let mut exec = Exec::sampled(substream(seed, x.value()));
        let output = self.run(&mut exec, &oracle.view())?;
        let truth = self.f.eval(&x)?;
        Ok(RunRecord {
            algorithm: AlgorithmId::WorstCase,
            n: self.cfg.n,
            m: self.f.onset_size(),
            seed,
            input_x: x,
            output,
            correct: output == truth,
            queries: exec.queries(),
            params: self.params.clone(),
            notes: self.notes(),
        })
    }

    /// Exact success probability on `x`: the identification distribution
    /// composed with the exact behaviour of the equality test.
    pub fn exact(&self, x: BitString) -> Result<ExactSummary> {
        let oracle = Oracle::phase(x);
        let id = oip_identify_distribution(&oracle, &self.onset, &self.cfg)?;
        let mut p_one = 0.0;
        let mut verify_max = 0;
        let mut paths = 0;
        for (z, p) in &id.outcomes {
            let Some(z) = z else {
                paths += 1;
                continue;
            };
            let ps = exact_paths(|e| grover_equality_test(e, &oracle.view(), z, VERIFY_ERROR))?;
            paths += ps.len();
            for q in &ps {
                verify_max = verify_max.max(q.queries);
                if q.value {
                    p_one += p * q.probability;
                }
            }
        }
        let truth = self.f.eval(&x)?;
        Ok(ExactSummary {
            input_x: x,
            truth,
            p_one,
            p_correct: if truth { p_one } else { 1.0 - p_one },
            max_queries: id.max_queries + verify_max,
            paths,
        })
    }
}

/// One sampled worst-case run on `oracle`'s input.
pub fn worst_case_evaluate(
    oracle: &Oracle,
    f: &BooleanFunction,
    seed: u64,
    policy: BetaPolicy,
) -> Result<RunRecord> {
    WorstCasePlan::new(f, policy)?.evaluate(oracle.reveal(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{sample_uniform_fnm, subcube_function, threshold_padded_function};

    #[test]
    fn unit_vectors_identified() {
        let n = 16;
        let cands: Vec<BitString> = (0..n).map(|j| BitString::unit(n, j)).collect();
        let cfg = OipConfig::new(n, n as u64, BetaPolicy::Clamp).unwrap();
        for j in 0..n {
            let o = Oracle::phase(cands[j]);
            let d = oip_identify_distribution(&o, &cands, &cfg).unwrap();
            let p: f64 = d
                .outcomes
                .iter()
                .filter(|o| o.0 == Some(cands[j]))
                .map(|o| o.1)
                .sum();
            assert!(p >= 1.0 - IDENTIFY_ERROR, "j={j} p={p}");
            for seed in 0..5 {
                let mut e = Exec::sampled(substream(seed, j as u64));
                let got = oip_identify(&mut e, &o.view(), &cands, &cfg).unwrap();
                assert!(e.queries() > 0);
                let _ = got;
            }
        }
    }

    #[test]
    fn singleton_needs_no_queries() {
        let x: BitString = "0110".parse().unwrap();
        let cfg = OipConfig::new(4, 1, BetaPolicy::Strict).unwrap();
        let mut e = Exec::sampled(substream(0, 0));
        let got = oip_identify(&mut e, &Oracle::phase(x).view(), &[x], &cfg).unwrap();
        assert_eq!(got, Some(x));
        assert_eq!(e.queries(), 0);
    }

    #[test]
    fn strict_policy_rejects_large_beta() {
        assert!(beta_prime(12, 16).unwrap() >= 1.0);
        assert!(matches!(
            OipConfig::new(12, 16, BetaPolicy::Strict),
            Err(Error::BetaOutOfRange { .. })
        ));
        assert!(OipConfig::new(12, 16, BetaPolicy::Clamp).unwrap().clamped);
    }

    #[test]
    fn exhaustive_small_worst_case() {
        for f in [
            subcube_function(6, 5).unwrap(),
            threshold_padded_function(6, 8).unwrap(),
            sample_uniform_fnm(6, 7, 11).unwrap(),
        ] {
            let plan = WorstCasePlan::new(&f, BetaPolicy::Clamp).unwrap();
            for v in 0..64 {
                let s = plan.exact(BitString::new(6, v).unwrap()).unwrap();
                assert!(
                    s.p_correct >= 2.0 / 3.0,
                    "{f:?} x={} p={}",
                    s.input_x,
                    s.p_correct
                );
            }
        }
    }

    #[test]
    fn single_point_onset_is_equality_test() {
        let x: BitString = "101101".parse().unwrap();
        let f = BooleanFunction::from_onset(6, &[x]).unwrap();
        let plan = WorstCasePlan::new(&f, BetaPolicy::Clamp).unwrap();
        assert_eq!(plan.exact(x).unwrap().p_correct, 1.0);
        assert!(plan.exact(x.flipped(0)).unwrap().p_correct >= 5.0 / 6.0);
    }
}
