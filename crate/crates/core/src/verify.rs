//! Monte-Carlo and exact checks of the probabilistic and inequality claims.
//!
//! Every check returns a [`TrialReport`]. Stochastic checks run trial `t` on
//! substream `t` of the seed and merge by summation, so results do not depend
//! on thread count or scheduling.

use std::f64::consts::LOG2_E;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::boolfn::{enumerate_fnm, sample_onset, sample_with, subcube_function};
use crate::error::{Error, Result};
use crate::measures::{
    binom_partial_sum, d_of_log2z, edge_boundary, lemma_lhs_log2, log2_family_size, m_prime,
    sensitivity, sign_count_t,
};
use crate::rng::substream;

/// Default Chernoff slack: `2 log2(e) - 2`, just above 0.88.
pub const DEFAULT_EPS: f64 = 2.0 * LOG2_E - 2.0;

/// Exponent in the stated failure fraction `2 / M^0.88`.
pub const STATED_EXPONENT: f64 = 0.88;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub claim: String,
    pub params: TrialParams,
    pub violation_count: u64,
    pub empirical_rate: f64,
    pub bound: f64,
    pub passed: bool,
    /// Seconds. Not part of the deterministic output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, String)>,
}

/// `rate <= bound + 3 sqrt(bound (1 - bound) / trials)`.
pub fn three_sigma_pass(violations: u64, trials: u64, bound: f64) -> bool {
    if trials == 0 {
        return violations == 0;
    }
    let rate = violations as f64 / trials as f64;
    let b = bound.clamp(0.0, 1.0);
    rate <= bound + 3.0 * (b * (1.0 - b) / trials as f64).sqrt()
}

impl TrialReport {
    fn new(claim: &str, params: TrialParams, violations: u64, bound: f64, start: Instant) -> Self {
        let trials = params.trials;
        Self {
            claim: claim.to_string(),
            params,
            violation_count: violations,
            empirical_rate: if trials == 0 {
                0.0
            } else {
                violations as f64 / trials as f64
            },
            bound,
            passed: three_sigma_pass(violations, trials, bound),
            wall_time: Some(start.elapsed().as_secs_f64()),
            notes: vec![],
        }
    }

    fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.to_string(), value.to_string()));
        self
    }

    pub fn without_timing(mut self) -> Self {
        self.wall_time = None;
        self
    }
}

/// `r* = N (1/2 - sqrt((2 + eps) / log2(e) * log2(M) / (2N)))`.
pub fn r_star(n: usize, m: u64, eps: f64) -> f64 {
    let nf = n as f64;
    nf * (0.5 - ((2.0 + eps) / LOG2_E * (m as f64).log2() / (2.0 * nf)).sqrt())
}

fn min_pairwise_distance(values: &[u64]) -> Option<u32> {
    let mut best: Option<u32> = None;
    for (i, &a) in values.iter().enumerate() {
        for &b in &values[..i] {
            let d = (a ^ b).count_ones();
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    best
}

fn parallel_count<F>(trials: u64, f: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(t).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Uniform `f` in `F_{N,M}`: violation when two on-set members are closer
/// than `r*`. Bound `2 / M^eps`.
pub fn check_min_distance(
    n: usize,
    m: u64,
    eps: f64,
    trials: u64,
    seed: u64,
) -> Result<TrialReport> {
    let start = Instant::now();
    let r = r_star(n, m, eps);
    if r.is_nan() || r <= 0.0 {
        return Err(Error::OutsideRegime(format!(
            "r* = {r} <= 0: parameters outside the claim's regime"
        )));
    }
    crate::boolfn::check_onset_size(n, m)?;
    let violations = parallel_count(trials, |t| {
        let onset = sample_onset(n, m, &mut substream(seed, t))?;
        let values: Vec<u64> = onset.iter().map(BitString::value).collect();
        Ok(min_pairwise_distance(&values).is_some_and(|d| (d as f64) < r))
    })?;
    let params = TrialParams {
        n: Some(n),
        m: Some(m),
        eps: Some(eps),
        r_star: Some(r),
        trials,
        seed: Some(seed),
    };
    let bound = 2.0 / (m as f64).powf(eps);
    let mut rep = TrialReport::new("min-distance", params, violations, bound, start);
    if (m as f64).log2() > n as f64 / 4.0 {
        rep = rep.note("regime", "M > 2^(N/4): outside the claim's stated regime");
    }
    Ok(rep)
}

/// Uniform `f` in `F_{N,M}`: violation when some pair of on-set states has
/// `|<psi_x|psi_y>| > 2 sqrt(log M / N)`. Bound `2 / M^0.88`; the bound with
/// the exact exponent `2 log e - 2` is reported alongside.
pub fn check_overlap_bound(n: usize, m: u64, trials: u64, seed: u64) -> Result<TrialReport> {
    let start = Instant::now();
    crate::boolfn::check_onset_size(n, m)?;
    let limit = 2.0 * ((m as f64).log2() / n as f64).sqrt();
    let params = TrialParams {
        n: Some(n),
        m: Some(m),
        eps: Some(STATED_EXPONENT),
        r_star: None,
        trials,
        seed: Some(seed),
    };
    let bound = 2.0 / (m as f64).powf(STATED_EXPONENT);
    let exact_bound = 2.0 / (m as f64).powf(DEFAULT_EPS);
    if limit >= 1.0 {
        return Ok(TrialReport::new("overlap", params, 0, bound, start)
            .note("overlap_limit", limit)
            .note("status", "trivially satisfied: |overlap| <= 1 <= limit"));
    }
    // |1 - 2h/N| > limit  <=>  h < N(1 - limit)/2  or  h > N(1 + limit)/2.
    let nf = n as f64;
    let (lo, hi) = (nf * (1.0 - limit) / 2.0, nf * (1.0 + limit) / 2.0);
    let violations = parallel_count(trials, |t| {
        let onset = sample_onset(n, m, &mut substream(seed, t))?;
        let values: Vec<u64> = onset.iter().map(BitString::value).collect();
        for (i, &a) in values.iter().enumerate() {
            for &b in &values[..i] {
                let h = (a ^ b).count_ones() as f64;
                if h < lo || h > hi {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    })?;
    let exact_pass = three_sigma_pass(violations, trials, exact_bound);
    Ok(
        TrialReport::new("overlap", params, violations, bound, start)
            .note("overlap_limit", limit)
            .note("exact_exponent_bound", exact_bound)
            .note("exact_exponent_passed", exact_pass),
    )
}

/// Pointwise `(eN/d(z))^{d(z)} <= z` and monotonicity of `d` in `z`, over
/// `log2 z` values in `(0, n]` for each `n`. Relative tolerance `1e-9` in the
/// log domain.
pub fn check_d_property(n_grid: &[usize], log2_z_grid: &[f64]) -> TrialReport {
    let start = Instant::now();
    let tol = 1e-9;
    let mut checks = 0u64;
    let mut violations = 0u64;
    let mut worst_slack = f64::INFINITY;
    for &n in n_grid {
        let mut zs: Vec<f64> = log2_z_grid
            .iter()
            .copied()
            .filter(|&l| l > 0.0 && l <= n as f64)
            .collect();
        zs.sort_by(f64::total_cmp);
        let mut prev: Option<f64> = None;
        for &l in &zs {
            let d = d_of_log2z(l, n);
            let lhs = lemma_lhs_log2(d, n);
            checks += 1;
            worst_slack = worst_slack.min(l - lhs);
            if lhs > l + tol * l.abs().max(1.0) {
                violations += 1;
            }
            if let Some(p) = prev {
                checks += 1;
                if d + tol * d.abs().max(1.0) < p {
                    violations += 1;
                }
            }
            prev = Some(d);
        }
    }
    let params = TrialParams {
        trials: checks,
        ..TrialParams::default()
    };
    TrialReport::new("d-property", params, violations, 0.0, start)
        .note("min_log2_slack", worst_slack)
}

/// Values of the counting chain at one `(N, M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingChain {
    pub n: usize,
    pub m: u64,
    pub m_prime: f64,
    pub log2_z: f64,
    pub d_z: f64,
    pub big_d: u128,
    /// `N D <= M'`.
    pub nd_le_m_prime: bool,
    pub log2_t: f64,
    /// `log2 T <= N D - N`.
    pub t_le_2nd_minus_n: bool,
    /// `log2 T - log2 C(2^N, M)`.
    pub log2_t_over_family: f64,
}

pub fn counting_chain(n: usize, m: u64) -> CountingChain {
    let mp = m_prime(n, m);
    let log2_z = mp.log2() - 2.0 * ((n + 1) as f64).log2();
    let d = d_of_log2z(log2_z, n);
    let big_d = binom_partial_sum(n as u64, d.max(0.0).floor() as u64);
    let nd = n as f64 * big_d as f64;
    let log2_t = sign_count_t(n, d);
    CountingChain {
        n,
        m,
        m_prime: mp,
        log2_z,
        d_z: d,
        big_d,
        nd_le_m_prime: nd <= mp,
        log2_t,
        t_le_2nd_minus_n: log2_t <= nd - n as f64,
        log2_t_over_family: log2_t - log2_family_size(n, m),
    }
}

/// Both counting inequalities at `(N, M)`, plus the smallest `N' >= N` at
/// which both hold along `M' = 2^{round(alpha N')}` with `alpha = log M / N`.
pub fn check_counting_chain(n: usize, m: u64) -> Result<TrialReport> {
    let start = Instant::now();
    crate::boolfn::check_onset_size(n, m)?;
    let c = counting_chain(n, m);
    let violations = u64::from(!c.nd_le_m_prime) + u64::from(!c.t_le_2nd_minus_n);
    let params = TrialParams {
        n: Some(n),
        m: Some(m),
        trials: 2,
        ..TrialParams::default()
    };
    let alpha = (m as f64).log2() / n as f64;
    let threshold = (n..=63).find(|&k| {
        let e = (alpha * k as f64).round().clamp(0.0, (k - 1) as f64) as u32;
        let c = counting_chain(k, 1u64 << e);
        c.nd_le_m_prime && c.t_le_2nd_minus_n
    });
    let mut rep = TrialReport::new("counting-chain", params, violations, 0.0, start)
        .note("m_prime", c.m_prime)
        .note("log2_z", c.log2_z)
        .note("d_z", c.d_z)
        .note("D", c.big_d)
        .note("N*D", n as u128 * c.big_d)
        .note("nd_le_m_prime", c.nd_le_m_prime)
        .note("log2_T", c.log2_t)
        .note("ND-N", n as f64 * c.big_d as f64 - n as f64)
        .note("log2_T_le_ND-N", c.t_le_2nd_minus_n)
        .note("log2_T_over_family", c.log2_t_over_family)
        .note("T_over_family_le_2^-N", c.log2_t_over_family <= -(n as f64));
    rep = match threshold {
        Some(k) => rep.note("smallest_n_both_hold", k),
        None => rep.note("smallest_n_both_hold", "none up to 63"),
    };
    let root = (n as f64).sqrt();
    let log_m = (m as f64).log2();
    if log_m <= root {
        rep = rep.note("regime", "M <= 2^sqrt(N): outside the stated regime");
    }
    Ok(rep)
}

/// Functions `{0,1}^n -> {0,1}` sign-representable by a polynomial of
/// degree `<= d` with integer coefficients in `[-w, w]`, by exhaustive search.
/// Matches the true count whenever `w` is large enough.
pub fn brute_force_sign_count(n: usize, d: usize, w: i32) -> usize {
    let monomials: Vec<u64> = (0..1u64 << n)
        .filter(|s| s.count_ones() as usize <= d)
        .collect();
    let points = 1usize << n;
    let mut seen = std::collections::HashSet::new();
    let k = monomials.len();
    let span = (2 * w + 1) as usize;
    let mut coef = vec![-w; k];
    for _ in 0..span.pow(k as u32) {
        let mut pattern = 0u64;
        let mut zero = false;
        for x in 0..points as u64 {
            let v: i32 = monomials
                .iter()
                .zip(&coef)
                .filter(|(s, _)| x & **s == **s)
                .map(|(_, c)| c)
                .sum();
            if v == 0 {
                zero = true;
                break;
            }
            if v > 0 {
                pattern |= 1 << x;
            }
        }
        if !zero {
            seen.insert(pattern);
        }
        for c in coef.iter_mut() {
            if *c < w {
                *c += 1;
                break;
            }
            *c = -w;
        }
    }
    seen.len()
}

fn chain_violated(s: u32, boundary: u64, n: usize, m: u64) -> bool {
    let tol = 1e-12;
    let mf = m as f64;
    let iso = n as f64 - mf.log2();
    (s as f64) < boundary as f64 / mf - tol || boundary as f64 / mf < iso - tol
}

/// On-set sizes sampled at arity `n`: a fixed spread over `[1, 2^(n-1)]`.
pub fn sensitivity_m_grid(n: usize) -> Vec<u64> {
    let max = 1u64 << (n - 1);
    let mut v = vec![
        1,
        2,
        3,
        5,
        n as u64,
        (n * n) as u64,
        1u64 << (n / 2),
        (max / 2) + 3,
        max - 1,
        max,
    ];
    v.retain(|&m| m >= 1 && m <= max);
    v.sort_unstable();
    v.dedup();
    v
}

/// `s(f) >= |boundary| / M >= log2(2^N / M)`: exhaustively over every `f`
/// with `1 <= M <= 2^N` for `N <= min(n_max, 4)`, and over `samples` uniform
/// draws per `(N, M)` on [`sensitivity_m_grid`] for `4 < N <= n_max`. Subcube
/// functions with `M` a power of two are checked for equality in the
/// isoperimetric step.
pub fn check_sensitivity_chain(n_max: usize, samples: u64, seed: u64) -> Result<TrialReport> {
    let start = Instant::now();
    if n_max > 12 {
        return Err(Error::Domain {
            name: "n_max",
            value: n_max as f64,
            reason: "sampled range stops at 12",
        });
    }
    let mut checked = 0u64;
    let mut violations = 0u64;
    for n in 1..=n_max.min(4) {
        for m in 1..=(1usize << n) {
            let (c, v) = enumerate_fnm(n, m)?
                .par_bridge()
                .map(|f| {
                    (
                        1u64,
                        u64::from(chain_violated(
                            sensitivity(&f),
                            edge_boundary(&f),
                            n,
                            m as u64,
                        )),
                    )
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            checked += c;
            violations += v;
        }
    }
    let mut cell = 0u64;
    for n in 5..=n_max {
        for m in sensitivity_m_grid(n) {
            let stream = cell;
            cell += 1;
            let v = parallel_count(samples, |t| {
                let mut rng = substream(seed, (stream << 32) | t);
                let f = sample_with(n, m, &mut rng)?;
                Ok(chain_violated(sensitivity(&f), edge_boundary(&f), n, m))
            })?;
            checked += samples;
            violations += v;
        }
    }
    let mut subcube_equal = true;
    for n in 1..=n_max {
        for e in 0..n {
            let f = subcube_function(n, 1 << e)?;
            let m = 1u64 << e;
            subcube_equal &= edge_boundary(&f) == m * (n as u64 - e as u64);
        }
    }
    let params = TrialParams {
        n: Some(n_max),
        trials: checked,
        seed: Some(seed),
        ..TrialParams::default()
    };
    Ok(
        TrialReport::new("sensitivity-chain", params, violations, 0.0, start)
            .note("subcube_isoperimetric_equality", subcube_equal),
    )
}
