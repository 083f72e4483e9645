use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use onsetqlab::adversary::{hamming_slice_relation, AdversaryRelation};
use onsetqlab::algorithms::{
    AverageCasePlan, BetaPolicy, ExactSummary, RunRecord, SubcubePlan, WorstCasePlan,
};
use onsetqlab::boolfn::{
    check_onset_size, floor_log2, sample_uniform_fnm, sample_with, subcube_function,
    threshold_padded_function,
};
use onsetqlab::constants::MAX_GRAM;
use onsetqlab::measures::{
    binom_partial_sum, counting_lower_bound, edge_boundary, formula_row, isoperimetric_bound,
    log2_family_size, sensitivity, BoundParams,
};
use onsetqlab::rng::{derive_seed, substream};
use onsetqlab::verify::{self, TrialReport};
use onsetqlab::{BitString, BooleanFunction, Error};

use crate::output::{Provenance, Rows};
use crate::{m_from, AdversaryCmd, AlgArgs, Algorithm, Cli, Command, Kind, VerifyCmd};

/// Largest N accepted by `alg --exhaustive`.
const MAX_EXHAUSTIVE_N: usize = 20;

/// Error bound every evaluator is held to.
const TARGET_ERROR: f64 = 1.0 / 3.0;

/// Attempts at drawing an on-set without complementary pairs.
const MAX_REDRAWS: u64 = 1000;

pub enum Output {
    Rows(Rows),
    Text(String),
}

pub fn dispatch(cli: &Cli) -> Result<Output> {
    let timing = cli.timing;
    Ok(match &cli.command {
        Command::Sample {
            size,
            seed,
            kind,
            table,
        } => {
            let m = size.m()?;
            let f = build_function(size.n, m, *kind, *seed)?;
            if *table {
                Output::Text(f.to_file_string())
            } else {
                let mut rows = Rows::default();
                rows.push(json!({
                    "n": size.n,
                    "m": m,
                    "kind": kind_name(*kind),
                    "seed": seed,
                    "table_hex": f.to_hex(),
                }));
                Output::Rows(rows)
            }
        }
        Command::Measure {
            n,
            m,
            m_exp,
            seed,
            kind,
            function,
        } => {
            let f = match function {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    BooleanFunction::from_file_str(&text)?
                }
                None => {
                    let Some(n) = *n else {
                        bail!("--n is required without --function");
                    };
                    build_function(n, m_from(n, *m, *m_exp)?, *kind, *seed)?
                }
            };
            Output::Rows(measure(&f))
        }
        Command::Adversary(cmd) => Output::Rows(adversary(cmd)?),
        Command::Alg { algorithm, args } => Output::Rows(alg(*algorithm, args, timing)?),
        Command::Verify(cmd) => Output::Rows(verify_cmd(cmd, timing)?),
        Command::Bounds { size } => Output::Rows(bounds(size.n, size.m()?)?),
        Command::Table1 {
            n,
            m_exp,
            seed,
            trials,
        } => Output::Rows(table1(n, m_exp, *seed, *trials)?),
    })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Uniform => "uniform",
        Kind::Subcube => "subcube",
        Kind::Threshold => "threshold",
    }
}

fn build_function(n: usize, m: u64, kind: Kind, seed: Option<u64>) -> Result<BooleanFunction> {
    Ok(match kind {
        Kind::Uniform => {
            let Some(seed) = seed else {
                bail!("--seed is required for uniform sampling");
            };
            sample_uniform_fnm(n, m, derive_seed(seed, "function"))?
        }
        Kind::Subcube => subcube_function(n, m)?,
        Kind::Threshold => threshold_padded_function(n, m)?,
    })
}

fn measure(f: &BooleanFunction) -> Rows {
    let (n, m) = (f.arity(), f.onset_size());
    let ctx = json!({ "n": n, "m": m });
    let s = sensitivity(f);
    let boundary = edge_boundary(f);
    let per = boundary as f64 / m as f64;
    let iso = isoperimetric_bound(n, m);
    let mut rows = Rows::default();
    rows.quantity(&ctx, "sensitivity", s, Provenance::Measured);
    rows.quantity(&ctx, "edge_boundary", boundary, Provenance::Measured);
    rows.quantity(&ctx, "edge_boundary_per_onset", per, Provenance::Measured);
    rows.quantity(&ctx, "isoperimetric_bound", iso, Provenance::Formula);
    rows.quantity(
        &ctx,
        "isoperimetric_bound_per_onset",
        iso / m as f64,
        Provenance::Formula,
    );
    let holds = s as f64 >= per && boundary as f64 >= iso - 1e-9 * iso.max(1.0);
    rows.quantity(&ctx, "chain_holds", holds, Provenance::Measured);
    rows
}

fn adversary(cmd: &AdversaryCmd) -> Result<Rows> {
    let mut rows = Rows::default();
    match cmd {
        AdversaryCmd::HammingSlice { n, k } => {
            let (n, k) = (*n, *k);
            if n == 0 || n > 20 {
                bail!("N must be in 1..=20 for the explicit relation");
            }
            if k >= n {
                bail!("need k < N");
            }
            // The padded threshold function when it exists, otherwise the
            // plain weight-<=k indicator; both separate the two slices.
            let d = binom_partial_sum(n as u64, k as u64) as u64;
            let (f, construction) = if d <= 1u64 << (n - 1) {
                (threshold_padded_function(n, d)?, "threshold-padded")
            } else {
                let onset = (0..1u64 << n)
                    .filter(|x| x.count_ones() as usize <= k)
                    .map(|x| BitString::new(n, x))
                    .collect::<onsetqlab::Result<Vec<_>>>()?;
                (BooleanFunction::from_onset(n, &onset)?, "weight-ball")
            };
            let rel = hamming_slice_relation(n, k, &f)?;
            let ctx = json!({ "n": n, "k": k, "m": f.onset_size(), "function": construction });
            relation_rows(&mut rows, &ctx, &rel)?;
            let (kf, nf) = ((k + 1) as f64, (n - k) as f64);
            rows.quantity(&ctx, "theta_a", 1.0 / kf, Provenance::Formula);
            rows.quantity(&ctx, "theta_b", 1.0 / nf, Provenance::Formula);
            rows.quantity(&ctx, "quantum_bound", (kf * nf).sqrt(), Provenance::Formula);
            rows.quantity(&ctx, "randomized_bound", kf.max(nf), Provenance::Formula);
        }
        AdversaryCmd::Eval { relation } => {
            let text = std::fs::read_to_string(relation)
                .with_context(|| format!("reading {}", relation.display()))?;
            let rel: AdversaryRelation = serde_json::from_str(&text).context("parsing relation")?;
            let ctx = json!({
                "n": rel.f().arity(),
                "m": rel.f().onset_size(),
                "pairs": rel.weights().len(),
            });
            relation_rows(&mut rows, &ctx, &rel)?;
        }
    }
    Ok(rows)
}

fn relation_rows(rows: &mut Rows, ctx: &Value, rel: &AdversaryRelation) -> Result<()> {
    let pairs = rel.theta_pairs()?;
    let theta_a = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let theta_b = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let v_geom = rel.v_geom()?;
    let v_min = rel.v_min()?;
    rows.quantity(ctx, "theta_a", theta_a, Provenance::Measured);
    rows.quantity(ctx, "theta_b", theta_b, Provenance::Measured);
    rows.quantity(ctx, "v_geom", v_geom, Provenance::Measured);
    rows.quantity(ctx, "quantum_bound", 1.0 / v_geom, Provenance::Measured);
    rows.quantity(ctx, "v_min", v_min, Provenance::Measured);
    rows.quantity(ctx, "randomized_bound", 1.0 / v_min, Provenance::Measured);
    Ok(())
}

/// The function an algorithm is run against, with notes on how it was chosen.
struct Target {
    f: Option<BooleanFunction>,
    notes: Vec<(String, String)>,
}

enum Plan {
    Subcube(SubcubePlan),
    Worst(WorstCasePlan),
    Average(AverageCasePlan),
}

impl Plan {
    fn evaluate(&self, x: BitString, seed: u64) -> onsetqlab::Result<RunRecord> {
        match self {
            Plan::Subcube(p) => p.evaluate(x, seed),
            Plan::Worst(p) => p.evaluate(x, seed),
            Plan::Average(p) => p.evaluate(x, seed),
        }
    }

    fn exact(&self, x: BitString) -> onsetqlab::Result<ExactSummary> {
        match self {
            Plan::Subcube(p) => p.exact(x),
            Plan::Worst(p) => p.exact(x),
            Plan::Average(p) => p.exact(x),
        }
    }
}

/// An accepted uniform draw for the average-case evaluator: on-sets with a
/// complementary pair are redrawn from the next substream.
pub(crate) fn average_case_target(
    n: usize,
    m: u64,
    seed: u64,
) -> Result<(BooleanFunction, AverageCasePlan, u64)> {
    let base = derive_seed(seed, "function");
    for attempt in 0..MAX_REDRAWS {
        let f = if attempt == 0 {
            sample_uniform_fnm(n, m, base)?
        } else {
            sample_with(n, m, &mut substream(base, attempt))?
        };
        match AverageCasePlan::new(&f) {
            Ok(plan) => return Ok((f, plan, attempt)),
            Err(Error::IndistinguishableOnset(..)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    bail!("no on-set without complementary pairs in {MAX_REDRAWS} draws")
}

fn make_plan(algorithm: Algorithm, args: &AlgArgs, n: usize, m: u64) -> Result<(Plan, Target)> {
    check_onset_size(n, m)?;
    let policy = if args.strict_beta {
        BetaPolicy::Strict
    } else {
        BetaPolicy::Clamp
    };
    Ok(match algorithm {
        Algorithm::Subcube => (
            Plan::Subcube(SubcubePlan::new(n, m)?),
            Target {
                f: None,
                notes: vec![],
            },
        ),
        Algorithm::WorstCase => {
            let f = build_function(n, m, args.kind, Some(args.seed))?;
            let plan = WorstCasePlan::new(&f, policy)?;
            let mut notes = vec![("function".to_string(), kind_name(args.kind).to_string())];
            notes.push(("beta".into(), plan.config().beta.to_string()));
            if plan.config().clamped {
                notes.push(("beta_clamped".into(), "true".into()));
            }
            (Plan::Worst(plan), Target { f: Some(f), notes })
        }
        Algorithm::AverageCase => {
            if m as usize > MAX_GRAM {
                bail!("M = {m} exceeds the discrimination limit {MAX_GRAM}");
            }
            let (f, plan, redraws) = average_case_target(n, m, args.seed)?;
            let notes = vec![
                ("function".to_string(), "uniform".to_string()),
                ("redraws".into(), redraws.to_string()),
                ("copies".into(), plan.copies().to_string()),
                ("copy_cap".into(), plan.copy_cap().to_string()),
                ("target_reached".into(), plan.target_reached().to_string()),
                ("max_overlap".into(), plan.max_overlap().to_string()),
                (
                    "overlap_check_passed".into(),
                    plan.overlap_check_passed().to_string(),
                ),
            ];
            (Plan::Average(plan), Target { f: Some(f), notes })
        }
    })
}

/// Sampled input `t`: an on-set member or a uniform string with equal odds.
fn sample_input(
    n: usize,
    m: u64,
    f: Option<&BooleanFunction>,
    onset: &[BitString],
    seed: u64,
    t: u64,
) -> BitString {
    let mut rng = substream(derive_seed(seed, "inputs"), t);
    let from_onset: bool = rng.random();
    let value = if from_onset {
        match f {
            Some(_) => onset[rng.random_range(0..onset.len())].value(),
            None => {
                // Subcube on-set member number i, without building the table.
                let l = floor_log2(m) as usize;
                let s = n - l;
                let i = rng.random_range(0..m);
                if i < 1u64 << l {
                    i << s
                } else {
                    ((i - (1u64 << l)) << s) | (1u64 << (s - 1))
                }
            }
        }
    } else if n == 64 {
        rng.random()
    } else {
        rng.random_range(0..1u64 << n)
    };
    BitString::new(n, value).expect("value fits")
}

fn alg(algorithm: Algorithm, args: &AlgArgs, timing: bool) -> Result<Rows> {
    let start = Instant::now();
    let n = args.size.n;
    let m = args.size.m()?;
    let (plan, target) = make_plan(algorithm, args, n, m)?;
    let name = match algorithm {
        Algorithm::Subcube => "subcube",
        Algorithm::WorstCase => "worst-case",
        Algorithm::AverageCase => "average-case",
    };
    let ctx = json!({ "algorithm": name, "n": n, "m": m, "seed": args.seed });
    let mut rows = Rows::default();
    for (k, v) in &target.notes {
        let mut r = ctx.as_object().cloned().unwrap_or_default();
        r.insert("note".into(), json!(k));
        r.insert("value".into(), json!(v));
        rows.push(Value::Object(r));
    }
    let formula = formula_row(n, m);
    let formula_value = match algorithm {
        Algorithm::Subcube => Some(formula.best_quantum),
        Algorithm::WorstCase => formula.worst_quantum,
        Algorithm::AverageCase => Some(formula.average_quantum),
    };

    if args.exhaustive {
        if n > MAX_EXHAUSTIVE_N {
            bail!("--exhaustive supports N <= {MAX_EXHAUSTIVE_N}");
        }
        let summaries: Vec<ExactSummary> = (0..1u64 << n)
            .into_par_iter()
            .map(|v| plan.exact(BitString::new(n, v)?))
            .collect::<onsetqlab::Result<_>>()?;
        for s in &summaries {
            rows.push(with_ctx(
                &ctx,
                json!({
                    "x": s.input_x.to_string(),
                    "truth": s.truth,
                    "p_one": s.p_one,
                    "p_correct": s.p_correct,
                    "max_queries": s.max_queries,
                    "paths": s.paths,
                }),
            ));
        }
        let max_error = summaries
            .iter()
            .map(|s| 1.0 - s.p_correct)
            .fold(0.0, f64::max);
        let max_queries = summaries.iter().map(|s| s.max_queries).max().unwrap_or(0);
        rows.quantity(&ctx, "max_error", max_error, Provenance::Measured);
        rows.quantity(&ctx, "error_bound", TARGET_ERROR, Provenance::ClaimBound);
        rows.quantity(
            &ctx,
            "passed",
            max_error <= TARGET_ERROR,
            Provenance::Measured,
        );
        rows.quantity(
            &ctx,
            "max_charged_queries",
            max_queries,
            Provenance::Measured,
        );
    } else {
        let onset = target.f.as_ref().map(|f| f.onset()).unwrap_or_default();
        let records: Vec<(u64, RunRecord)> = (0..args.trials)
            .into_par_iter()
            .map(|t| {
                let x = sample_input(n, m, target.f.as_ref(), &onset, args.seed, t);
                let run_seed = substream(derive_seed(args.seed, "runs"), t).random();
                plan.evaluate(x, run_seed).map(|r| (t, r))
            })
            .collect::<onsetqlab::Result<_>>()?;
        for (t, r) in &records {
            rows.push(with_ctx(
                &ctx,
                json!({
                    "trial": t,
                    "x": r.input_x.to_string(),
                    "output": r.output,
                    "correct": r.correct,
                    "queries": r.queries,
                }),
            ));
        }
        let trials = records.len().max(1) as f64;
        let errors = records.iter().filter(|(_, r)| !r.correct).count();
        let mean_q = records.iter().map(|(_, r)| r.queries as f64).sum::<f64>() / trials;
        let max_q = records.iter().map(|(_, r)| r.queries).max().unwrap_or(0);
        rows.quantity(
            &ctx,
            "error_rate",
            errors as f64 / trials,
            Provenance::Measured,
        );
        rows.quantity(&ctx, "error_bound", TARGET_ERROR, Provenance::ClaimBound);
        rows.quantity(
            &ctx,
            "passed",
            verify::three_sigma_pass(errors as u64, records.len() as u64, TARGET_ERROR),
            Provenance::Measured,
        );
        rows.quantity(&ctx, "mean_queries", mean_q, Provenance::Measured);
        rows.quantity(&ctx, "max_queries", max_q, Provenance::Measured);
    }
    if let Some(v) = formula_value {
        rows.quantity(&ctx, "query_formula", v, Provenance::Formula);
    }
    if timing {
        rows.quantity(
            &ctx,
            "wall_time",
            start.elapsed().as_secs_f64(),
            Provenance::Measured,
        );
    }
    Ok(rows)
}

fn with_ctx(ctx: &Value, extra: Value) -> Value {
    let mut r = ctx.as_object().cloned().unwrap_or_default();
    if let Value::Object(e) = extra {
        r.extend(e);
    }
    Value::Object(r)
}

/// A report as one flat row; `notes` and `provenance` stay nested.
pub(crate) fn report_row(rep: &TrialReport) -> Value {
    let mut row = Map::new();
    row.insert("claim".into(), json!(rep.claim));
    if let Value::Object(p) = json!(rep.params) {
        row.extend(p);
    }
    row.insert("violation_count".into(), json!(rep.violation_count));
    row.insert("empirical_rate".into(), json!(rep.empirical_rate));
    row.insert("bound".into(), json!(rep.bound));
    row.insert("passed".into(), json!(rep.passed));
    if let Some(t) = rep.wall_time {
        row.insert("wall_time".into(), json!(t));
    }
    let notes: Map<String, Value> = rep
        .notes
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    row.insert("notes".into(), Value::Object(notes));
    let mut prov = Map::new();
    prov.insert(
        "violation_count".into(),
        json!(Provenance::Measured.as_str()),
    );
    prov.insert(
        "empirical_rate".into(),
        json!(Provenance::Measured.as_str()),
    );
    prov.insert("bound".into(), json!(Provenance::ClaimBound.as_str()));
    if rep.params.r_star.is_some() {
        prov.insert("r_star".into(), json!(Provenance::Formula.as_str()));
    }
    row.insert("provenance".into(), Value::Object(prov));
    Value::Object(row)
}

fn verify_cmd(cmd: &VerifyCmd, timing: bool) -> Result<Rows> {
    let rep = match cmd {
        VerifyCmd::MinDistance {
            size,
            eps,
            trials,
            seed,
        } => verify::check_min_distance(size.n, size.m()?, *eps, *trials, *seed)?,
        VerifyCmd::Overlap { size, trials, seed } => {
            verify::check_overlap_bound(size.n, size.m()?, *trials, *seed)?
        }
        VerifyCmd::DProperty { n, points } => {
            let top = n.iter().copied().max().unwrap_or(0) as f64;
            let grid: Vec<f64> = (1..=*points)
                .map(|i| top * i as f64 / *points as f64)
                .collect();
            verify::check_d_property(n, &grid)
        }
        VerifyCmd::CountingChain { size } => verify::check_counting_chain(size.n, size.m()?)?,
        VerifyCmd::SensitivityChain {
            n_max,
            samples,
            seed,
        } => verify::check_sensitivity_chain(*n_max, *samples, *seed)?,
    };
    let rep = if timing { rep } else { rep.without_timing() };
    let mut rows = Rows::default();
    rows.push(report_row(&rep));
    Ok(rows)
}

fn bounds(n: usize, m: u64) -> Result<Rows> {
    let p = BoundParams::new(n, m)?;
    let ctx = json!({ "n": n, "m": m });
    let mut rows = Rows::default();
    let f = Provenance::Formula;
    rows.quantity(&ctx, "m_prime", p.m_prime, f);
    rows.quantity(&ctx, "d_z", p.d_z, f);
    // D can exceed 2^64 when d(z) reaches N; keep it exact as a string then.
    match u64::try_from(p.big_d) {
        Ok(d) => rows.quantity(&ctx, "big_d", d, f),
        Err(_) => rows.quantity(&ctx, "big_d", p.big_d.to_string(), f),
    }
    rows.quantity(&ctx, "log2_t", p.log2_t, f);
    rows.quantity(&ctx, "k", p.k, f);
    rows.quantity(&ctx, "beta_prime", p.beta_prime, f);
    rows.quantity(&ctx, "gamma_prime", p.gamma_prime, f);
    rows.quantity(&ctx, "overlap_f", p.overlap_f, f);
    rows.quantity(&ctx, "copies_cap", p.m_copies, f);
    rows.quantity(&ctx, "report_c", p.report_c, f);
    rows.quantity(&ctx, "kappa", p.kappa, f);
    rows.quantity(&ctx, "isoperimetric_bound", isoperimetric_bound(n, m), f);
    rows.quantity(&ctx, "counting_lower_bound", counting_lower_bound(n, m), f);
    rows.quantity(&ctx, "log2_family_size", log2_family_size(n, m), f);
    rows.quantity(&ctx, "r_star", verify::r_star(n, m, verify::DEFAULT_EPS), f);
    let row = formula_row(n, m);
    rows.quantity(&ctx, "worst_quantum", row.worst_quantum, f);
    rows.quantity(&ctx, "best_quantum", row.best_quantum, f);
    rows.quantity(&ctx, "average_quantum", row.average_quantum, f);
    rows.quantity(&ctx, "worst_randomized", row.worst_randomized, f);
    rows.quantity(&ctx, "best_randomized", row.best_randomized, f);
    rows.quantity(&ctx, "average_randomized", row.average_randomized, f);
    Ok(rows)
}

fn table1(ns: &[usize], alphas: &[f64], seed: u64, trials: u64) -> Result<Rows> {
    let mut rows = Rows::default();
    for &n in ns {
        for &alpha in alphas {
            let m = m_from(n, None, Some(alpha))?;
            check_onset_size(n, m)?;
            let formula = formula_row(n, m);
            for (case, algorithm, quantum, randomized) in [
                (
                    "worst",
                    Algorithm::WorstCase,
                    formula.worst_quantum,
                    formula.worst_randomized,
                ),
                (
                    "best",
                    Algorithm::Subcube,
                    Some(formula.best_quantum),
                    formula.best_randomized,
                ),
                (
                    "average",
                    Algorithm::AverageCase,
                    Some(formula.average_quantum),
                    formula.average_randomized,
                ),
            ] {
                let ctx = json!({ "n": n, "alpha": alpha, "m": m, "case": case });
                let qctx = with_ctx(&ctx, json!({ "model": "quantum" }));
                let rctx = with_ctx(&ctx, json!({ "model": "randomized" }));
                match measured_queries(algorithm, n, m, seed, trials) {
                    Ok((mean, max)) => {
                        rows.quantity(&qctx, "mean_queries", mean, Provenance::Measured);
                        rows.quantity(&qctx, "max_queries", max, Provenance::Measured);
                    }
                    Err(e) => {
                        rows.push(with_ctx(
                            &qctx,
                            json!({ "quantity": "unavailable", "value": e.to_string() }),
                        ));
                    }
                }
                rows.quantity(&qctx, "formula", quantum, Provenance::Formula);
                rows.quantity(&rctx, "formula", randomized, Provenance::Formula);
            }
        }
    }
    Ok(rows)
}

fn measured_queries(
    algorithm: Algorithm,
    n: usize,
    m: u64,
    seed: u64,
    trials: u64,
) -> Result<(f64, u64)> {
    let args = AlgArgs {
        size: crate::Size {
            n,
            m: Some(m),
            m_exp: None,
        },
        seed,
        trials,
        exhaustive: false,
        kind: Kind::Uniform,
        strict_beta: false,
    };
    let (plan, target) = make_plan(algorithm, &args, n, m)?;
    let onset = target.f.as_ref().map(|f| f.onset()).unwrap_or_default();
    let queries: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let x = sample_input(n, m, target.f.as_ref(), &onset, seed, t);
            let run_seed = substream(derive_seed(seed, "runs"), t).random();
            plan.evaluate(x, run_seed).map(|r| r.queries)
        })
        .collect::<onsetqlab::Result<_>>()?;
    let mean = queries.iter().sum::<u64>() as f64 / queries.len().max(1) as f64;
    Ok((mean, queries.iter().copied().max().unwrap_or(0)))
}
