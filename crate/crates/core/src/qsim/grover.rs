//! Grover-family subroutines.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::constants::{BUDGET_FACTOR, COMPARATOR_LEAF, COMPARATOR_REPEAT, SCHEDULE_GROWTH};
use crate::error::{Error, Result};
use crate::qsim::exec::Exec;
use crate::qsim::oracle::{apply_view, query_entry, OracleMode, OracleView, QueryCounter};
use crate::qsim::register::SimRegister;
use crate::rng::SimRng;

/// Result of a fixed-iteration Grover run.
#[derive(Clone, Debug)]
pub struct GroverOutcome {
    pub index: usize,
    /// Whether the measured entry is marked. Ground truth, for reporting.
    pub success: bool,
    /// Exact probability of measuring a marked entry.
    pub success_probability: f64,
    pub probabilities: Vec<f64>,
}

fn grover_state(
    view: &OracleView<'_>,
    iterations: usize,
    counter: &mut QueryCounter,
) -> Result<SimRegister> {
    if view.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let phase = view.clone().with_mode(OracleMode::Phase);
    let mut s = SimRegister::uniform(view.len());
    for _ in 0..iterations {
        apply_view(&mut s, &phase, counter)?;
        s.diffuse_index();
    }
    Ok(s)
}

/// `iterations` Grover iterates from the uniform state, then a measurement.
/// Spends exactly `iterations` queries.
pub fn grover_search(
    view: &OracleView<'_>,
    iterations: usize,
    counter: &mut QueryCounter,
    rng: &mut SimRng,
) -> Result<GroverOutcome> {
    let s = grover_state(view, iterations, counter)?;
    let probabilities = s.index_probabilities();
    let marked = view.reveal_marked();
    let success_probability = marked.iter().map(|&j| probabilities[j]).sum();
    let index = s.sample_index(rng);
    Ok(GroverOutcome {
        index,
        success: marked.binary_search(&index).is_ok(),
        success_probability,
        probabilities,
    })
}

/// `sin^2((2j+1) theta)` with `sin^2 theta = t / k`.
pub fn grover_success_probability(k: usize, t: usize, iterations: usize) -> f64 {
    let theta = (t as f64 / k as f64).sqrt().asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Query budget of one search attempt over `k` entries promised to hold at
/// least `min_marked` marked ones.
pub fn attempt_budget(k: usize, min_marked: usize) -> usize {
    (BUDGET_FACTOR * (k as f64 / min_marked.max(1) as f64).sqrt()).ceil() as usize
}

fn schedule_next(m: f64, k: usize) -> f64 {
    (m * SCHEDULE_GROWTH).min((k as f64).sqrt())
}

/// One attempt of the unknown-count search: rounds of `j` iterations with `j`
/// uniform in `[0, ceil(m))`, each followed by one classical check of the
/// measured entry, `m` growing by [`SCHEDULE_GROWTH`] up to `sqrt(k)`. Gives
/// up before a round would exceed [`attempt_budget`].
pub fn search_attempt(
    view: &OracleView<'_>,
    min_marked: usize,
    counter: &mut QueryCounter,
    rng: &mut SimRng,
) -> Result<Option<usize>> {
    let k = view.len();
    if k == 0 {
        return Ok(None);
    }
    let budget = attempt_budget(k, min_marked);
    let mut used = 0;
    let mut m = 1.0f64;
    loop {
        let j = rng.random_range(0..m.ceil() as usize);
        if used + j + 1 > budget {
            return Ok(None);
        }
        let s = grover_state(view, j, counter)?;
        let i = s.sample_index(rng);
        used += j + 1;
        if query_entry(view, i, counter) {
            return Ok(Some(i));
        }
        m = schedule_next(m, k);
    }
}

/// Unknown-count search with a single attempt and no promise on the count.
pub fn multi_target_grover(
    view: &OracleView<'_>,
    counter: &mut QueryCounter,
    rng: &mut SimRng,
) -> Result<Option<usize>> {
    search_attempt(view, 1, counter, rng)
}

// Per-thread memo tables: exhaustive sweeps hit these from every worker, and
// recomputing a table per thread is cheaper than sharing a lock.
thread_local! {
    static MISS_CACHE: RefCell<HashMap<(usize, usize, usize), f64>> = RefCell::default();
    static WORST_CACHE: RefCell<HashMap<(usize, usize), f64>> = RefCell::default();
}

/// Exact probability that one [`search_attempt`] over `k` entries with `t`
/// marked returns nothing.
pub fn attempt_miss_probability(k: usize, t: usize, min_marked: usize) -> f64 {
    if t == 0 || k == 0 {
        return 1.0;
    }
    let key = (k, t, min_marked);
    if let Some(v) = MISS_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return v;
    }
    let budget = attempt_budget(k, min_marked);
    let p: Vec<f64> = (0..budget)
        .map(|j| grover_success_probability(k, t, j))
        .collect();
    // dist[u] = probability of still searching having spent u queries.
    let mut dist = vec![0.0; budget + 1];
    dist[0] = 1.0;
    let mut miss = 0.0;
    let mut m = 1.0f64;
    while dist.iter().any(|&w| w > 0.0) {
        let cm = m.ceil() as usize;
        let mut next = vec![0.0; budget + 1];
        for (u, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (j, &pj) in p.iter().enumerate().take(cm) {
                let w = w / cm as f64;
                if u + j + 1 > budget {
                    miss += w;
                } else {
                    next[u + j + 1] += w * (1.0 - pj);
                }
            }
            if cm > p.len() {
                // Any j >= budget overruns.
                miss += w * (cm - p.len()) as f64 / cm as f64;
            }
        }
        dist = next;
        m = schedule_next(m, k);
    }
    MISS_CACHE.with(|c| c.borrow_mut().insert(key, miss));
    miss
}

/// Largest single-attempt miss probability over every admissible marked count.
pub fn worst_attempt_miss(k: usize, min_marked: usize) -> f64 {
    let key = (k, min_marked);
    if let Some(v) = WORST_CACHE.with(|c| c.borrow().get(&key).copied()) {
        return v;
    }
    let w = (min_marked.max(1)..=k)
        .map(|t| attempt_miss_probability(k, t, min_marked))
        .fold(0.0, f64::max);
    WORST_CACHE.with(|c| c.borrow_mut().insert(key, w));
    w
}

/// Fewest attempts whose combined miss probability is at most `delta`
/// whenever at least `min_marked` of `k` entries are marked.
pub fn attempts_for(k: usize, min_marked: usize, delta: f64) -> usize {
    assert!(delta > 0.0 && delta < 1.0);
    if k == 0 || min_marked > k {
        return 1;
    }
    let w = worst_attempt_miss(k, min_marked);
    if w <= delta {
        return 1;
    }
    (delta.ln() / w.ln()).ceil() as usize
}

/// Up to `attempts` search attempts; the first marked entry found, if any.
///
/// In exact mode the outcome is drawn from its analytic distribution (miss
/// with probability `q = miss^attempts`, otherwise a uniformly random marked
/// entry, by symmetry of the Grover state) and the worst-case budget is
/// charged.
pub fn search(
    exec: &mut Exec,
    view: &OracleView<'_>,
    min_marked: usize,
    attempts: usize,
) -> Result<Option<usize>> {
    let k = view.len();
    if k == 0 {
        return Ok(None);
    }
    if exec.is_exact() {
        exec.charge((attempts * attempt_budget(k, min_marked)) as u64);
        let marked = view.reveal_marked();
        if marked.is_empty() {
            return Ok(None);
        }
        let q = attempt_miss_probability(k, marked.len(), min_marked).powi(attempts as i32);
        let mut probs = vec![(1.0 - q) / marked.len() as f64; marked.len() + 1];
        probs[0] = q;
        let c = exec.decide(&probs);
        return Ok(if c == 0 { None } else { Some(marked[c - 1]) });
    }
    for _ in 0..attempts {
        let (counter, rng) = exec.sampled_parts().expect("sampled mode");
        if let Some(i) = search_attempt(view, min_marked, counter, rng)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Like [`search`] when only found / not found matters; exact mode then
/// branches two ways instead of `t + 1`.
pub fn search_any(
    exec: &mut Exec,
    view: &OracleView<'_>,
    min_marked: usize,
    attempts: usize,
) -> Result<bool> {
    let k = view.len();
    if k == 0 {
        return Ok(false);
    }
    if exec.is_exact() {
        exec.charge((attempts * attempt_budget(k, min_marked)) as u64);
        let t = view.reveal_marked().len();
        if t == 0 {
            return Ok(false);
        }
        let q = attempt_miss_probability(k, t, min_marked).powi(attempts as i32);
        return Ok(exec.decide(&[q, 1.0 - q]) == 1);
    }
    Ok(search(exec, view, min_marked, attempts)?.is_some())
}

/// One-sided equality test of the viewed string against `z`: searches for a
/// disagreement. Returns `true` (equal) unless one is found, so equal inputs
/// are always accepted; unequal ones are accepted with probability at most
/// `delta`.
pub fn grover_equality_test(
    exec: &mut Exec,
    view: &OracleView<'_>,
    z: &BitString,
    delta: f64,
) -> Result<bool> {
    if z.len() != view.len() {
        return Err(Error::LengthMismatch {
            expected: view.len(),
            found: z.len(),
        });
    }
    let diff = view.xor_bits(z)?;
    let attempts = attempts_for(diff.len(), 1, delta);
    Ok(!search_any(exec, &diff, 1, attempts)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    LessOrEqual,
    Greater,
}

/// Compares the viewed string `z` with `threshold` as binary integers.
///
/// Binary search for the first (most significant) disagreement: at level `k`
/// the left half of the current range is searched with `COMPARATOR_REPEAT * k`
/// attempts; a hit recurses left, a miss recurses right. Ranges of at most
/// [`COMPARATOR_LEAF`] entries are read classically.
pub fn binary_grover_comparator(
    exec: &mut Exec,
    z: &OracleView<'_>,
    threshold: &[bool],
) -> Result<Comparison> {
    let diff = z.xor_mask(threshold)?;
    let (mut lo, mut hi) = (0, diff.len());
    let mut level = 1;
    while hi - lo > COMPARATOR_LEAF {
        let mid = lo + (hi - lo) / 2;
        if search_any(exec, &diff.slice(lo..mid), 1, COMPARATOR_REPEAT * level)? {
            hi = mid;
        } else {
            lo = mid;
        }
        level += 1;
    }
    for (j, &t) in threshold.iter().enumerate().take(hi).skip(lo) {
        if query_entry(&diff, j, exec.counter_mut()) {
            // z_j = !threshold_j here.
            return Ok(if t {
                Comparison::LessOrEqual
            } else {
                Comparison::Greater
            });
        }
    }
    Ok(Comparison::LessOrEqual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::exec::exact_paths;
    use crate::qsim::oracle::Oracle;
    use crate::rng::substream;

    fn onehot(k: usize, marked: &[usize]) -> BitString {
        let bits: Vec<bool> = (0..k).map(|i| marked.contains(&i)).collect();
        BitString::from_bits(&bits).unwrap()
    }

    #[test]
    fn fixed_iteration_examples() {
        let mut rng = substream(1, 0);
        let o = Oracle::phase(onehot(4, &[2]));
        let out = grover_search(&o.view(), 1, &mut QueryCounter::new(), &mut rng).unwrap();
        assert!((out.success_probability - 1.0).abs() < 1e-12);
        assert!(out.success && out.index == 2);

        let o = Oracle::phase(onehot(2, &[0]));
        let out = grover_search(&o.view(), 0, &mut QueryCounter::new(), &mut rng).unwrap();
        assert!((out.success_probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn k_1024_single_marked() {
        // 1024 bits exceeds a BitString, so build the view over a 64-bit
        // input repeated through `select`.
        let x = BitString::unit(64, 60);
        let o = Oracle::phase(x);
        let entries: Vec<usize> = (0..1024)
            .map(|i| if i == 700 { 60 } else { i % 60 })
            .collect();
        let v = o.view().select(&entries);
        assert_eq!(v.reveal_marked(), vec![700]);
        let mut c = QueryCounter::new();
        let out = grover_search(&v, 25, &mut c, &mut substream(2, 0)).unwrap();
        assert!(out.success_probability >= 0.99);
        assert_eq!(c.count(), 25);
    }

    #[test]
    fn simulated_success_matches_formula() {
        for (k, t) in [(8usize, 1usize), (16, 3), (37, 5), (64, 64)] {
            let marked: Vec<usize> = (0..t).map(|i| (i * 7) % k).collect();
            let x = onehot(k, &marked);
            let o = Oracle::phase(x);
            let tt = o.view().reveal_marked().len();
            for j in 0..8 {
                let out =
                    grover_search(&o.view(), j, &mut QueryCounter::new(), &mut substream(3, 0))
                        .unwrap();
                assert!(
                    (out.success_probability - grover_success_probability(k, tt, j)).abs() < 1e-9
                );
                assert!((out.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn attempt_miss_matches_sampling() {
        let k = 16;
        let x = onehot(k, &[3]);
        let o = Oracle::phase(x);
        let mut rng = substream(4, 0);
        let trials = 4000;
        let mut misses = 0;
        for _ in 0..trials {
            if search_attempt(&o.view(), 1, &mut QueryCounter::new(), &mut rng)
                .unwrap()
                .is_none()
            {
                misses += 1;
            }
        }
        let q = attempt_miss_probability(k, 1, 1);
        let rate = misses as f64 / trials as f64;
        let sd = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((rate - q).abs() < 4.0 * sd, "rate {rate} vs exact {q}");
        assert!(q < 0.5);
    }

    #[test]
    fn multi_target_examples() {
        let mut rng = substream(5, 0);
        // No marked entries: not found within budget.
        let o = Oracle::phase(BitString::zeros(16));
        let mut c = QueryCounter::new();
        assert!(multi_target_grover(&o.view(), &mut c, &mut rng)
            .unwrap()
            .is_none());
        assert!(c.count() as usize <= attempt_budget(16, 1));
        // All marked: first round succeeds.
        let o = Oracle::phase(BitString::ones(16));
        let mut c = QueryCounter::new();
        assert!(multi_target_grover(&o.view(), &mut c, &mut rng)
            .unwrap()
            .is_some());
        assert_eq!(c.count(), 1);
    }

    #[test]
    fn attempts_reach_target() {
        for k in [1, 2, 5, 16, 64] {
            for tmin in [1, 2] {
                if tmin > k {
                    continue;
                }
                let r = attempts_for(k, tmin, 0.01);
                assert!(worst_attempt_miss(k, tmin).powi(r as i32) <= 0.01);
            }
        }
    }

    #[test]
    fn equality_test_is_one_sided() {
        let z: BitString = "1011001110001111".parse().unwrap();
        let o = Oracle::phase(z);
        let paths = exact_paths(|e| grover_equality_test(e, &o.view(), &z, 1.0 / 3.0)).unwrap();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].value);

        let y = z.flipped(5);
        let paths = exact_paths(|e| grover_equality_test(e, &o.view(), &y, 1.0 / 3.0)).unwrap();
        let p_false: f64 = paths
            .iter()
            .filter(|p| !p.value)
            .map(|p| p.probability)
            .sum();
        assert!(p_false >= 2.0 / 3.0);
    }

    #[test]
    fn comparator_trivial_cases() {
        let t: BitString = "0110".parse().unwrap();
        let tb: Vec<bool> = t.bits().collect();
        let o = Oracle::phase(t);
        let paths = exact_paths(|e| binary_grover_comparator(e, &o.view(), &tb)).unwrap();
        assert!(paths.iter().all(|p| p.value == Comparison::LessOrEqual));

        let o = Oracle::phase(BitString::zeros(12));
        let ones = vec![true; 12];
        let paths = exact_paths(|e| binary_grover_comparator(e, &o.view(), &ones)).unwrap();
        assert!(paths.iter().all(|p| p.value == Comparison::LessOrEqual));
    }

    #[test]
    fn comparator_agrees_with_integer_order() {
        let mut rng = substream(6, 0);
        for _ in 0..200 {
            let z = BitString::new(12, rng.random_range(0..4096)).unwrap();
            let t = BitString::new(12, rng.random_range(0..4096)).unwrap();
            let tb: Vec<bool> = t.bits().collect();
            let o = Oracle::phase(z);
            let want = if z.value() <= t.value() {
                Comparison::LessOrEqual
            } else {
                Comparison::Greater
            };
            let paths = exact_paths(|e| binary_grover_comparator(e, &o.view(), &tb)).unwrap();
            let p: f64 = paths
                .iter()
                .filter(|p| p.value == want)
                .map(|p| p.probability)
                .sum();
            assert!(p >= 2.0 / 3.0, "z={z} t={t} p={p}");
        }
    }
}
