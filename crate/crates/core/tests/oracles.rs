//! Library routines against naive reimplementations and against each other
//! (sampled runs versus exact branch enumeration).

use proptest::prelude::*;
use rand::Rng;

use onsetqlab::algorithms::{AverageCasePlan, BetaPolicy, SubcubePlan, WorstCasePlan};
use onsetqlab::boolfn::{sample_uniform_fnm, threshold_padded_function};
use onsetqlab::measures::{edge_boundary, isoperimetric_bound, sensitivity};
use onsetqlab::qsim::{exact_paths, search, Exec, Oracle};
use onsetqlab::rng::substream;
use onsetqlab::{BitString, BooleanFunction};

fn naive_sensitivity(f: &BooleanFunction) -> u32 {
    let n = f.arity();
    (0..1u64 << n)
        .map(|x| {
            (0..n)
                .filter(|i| f.eval_index(x) != f.eval_index(x ^ (1 << i)))
                .count() as u32
        })
        .max()
        .unwrap()
}

fn naive_boundary(f: &BooleanFunction) -> u64 {
    let n = f.arity();
    let mut edges = 0;
    for x in 0..1u64 << n {
        for i in 0..n {
            let y = x ^ (1 << i);
            if x < y && f.eval_index(x) != f.eval_index(y) {
                edges += 1;
            }
        }
    }
    edges
}

#[test]
fn measures_match_naive_counts() {
    for n in 1..=9usize {
        for seed in 0..6 {
            let m = 1 + seed % (1u64 << (n - 1));
            let f = sample_uniform_fnm(n, m, seed).unwrap();
            assert_eq!(sensitivity(&f), naive_sensitivity(&f), "n={n} seed={seed}");
            assert_eq!(edge_boundary(&f), naive_boundary(&f), "n={n} seed={seed}");
            assert!(edge_boundary(&f) as f64 >= isoperimetric_bound(n, m) - 1e-9);
        }
    }
}

/// Sampled success frequency within 4.5 sigma of the exact probability.
fn agrees(exact: f64, hits: u64, runs: u64) -> bool {
    let sigma = (exact * (1.0 - exact) / runs as f64).sqrt().max(1e-3);
    ((hits as f64 / runs as f64) - exact).abs() <= 4.5 * sigma
}

#[test]
fn subcube_sampled_agrees_with_exact() {
    let plan = SubcubePlan::new(8, 11).unwrap();
    for v in [0u64, 0b0000_1000, 0b0100_1000, 0b1111_1111, 0b0010_0000] {
        let x = BitString::new(8, v).unwrap();
        let exact = plan.exact(x).unwrap().p_correct;
        let runs = 3000;
        let hits = (0..runs)
            .filter(|&s| plan.evaluate(x, s).unwrap().correct)
            .count() as u64;
        assert!(
            agrees(exact, hits, runs),
            "x={x}: exact {exact}, sampled {hits}/{runs}"
        );
    }
}

#[test]
fn worst_case_sampled_agrees_with_exact() {
    let f = threshold_padded_function(8, 12).unwrap();
    let plan = WorstCasePlan::new(&f, BetaPolicy::Clamp).unwrap();
    let mut inputs = f.onset()[..3].to_vec();
    inputs.push(BitString::new(8, 0b1110_0000).unwrap());
    for x in inputs {
        let exact = plan.exact(x).unwrap().p_correct;
        let runs = 2000;
        let hits = (0..runs)
            .filter(|&s| plan.evaluate(x, s).unwrap().correct)
            .count() as u64;
        assert!(
            agrees(exact, hits, runs),
            "x={x}: exact {exact}, sampled {hits}/{runs}"
        );
    }
}

#[test]
fn average_case_sampled_agrees_with_exact() {
    let f = sample_uniform_fnm(12, 16, 8).unwrap();
    let plan = AverageCasePlan::new(&f).unwrap();
    let mut inputs = f.onset()[..2].to_vec();
    let mut rng = substream(8, 1);
    inputs.push(BitString::new(12, rng.random_range(0..1 << 12)).unwrap());
    for x in inputs {
        let exact = plan.exact(x).unwrap().p_correct;
        let runs = 2000;
        let hits = (0..runs)
            .filter(|&s| plan.evaluate(x, s).unwrap().correct)
            .count() as u64;
        assert!(
            agrees(exact, hits, runs),
            "x={x}: exact {exact}, sampled {hits}/{runs}"
        );
    }
}

#[test]
fn search_outcomes_agree_with_exact_distribution() {
    let x = BitString::new(16, 0b0000_0100_0000_0101).unwrap();
    let oracle = Oracle::phase(x);
    let paths = exact_paths(|e| Ok(search(e, &oracle.view(), 1, 1)?.is_some())).unwrap();
    let p_hit: f64 = paths
        .iter()
        .filter(|p| p.value)
        .map(|p| p.probability)
        .sum();
    let runs = 4000;
    let hits = (0..runs)
        .filter(|&s| {
            let mut e = Exec::sampled(substream(s, 0));
            let r = search(&mut e, &oracle.view(), 1, 1).unwrap();
            if let Some(j) = r {
                assert!(oracle.view().reveal_marked().contains(&j));
            }
            r.is_some()
        })
        .count() as u64;
    assert!(
        agrees(p_hit, hits, runs),
        "exact {p_hit}, sampled {hits}/{runs}"
    );
}

proptest! {
    #[test]
    fn truth_table_file_round_trips(n in 1usize..=10, seed in 0u64..1000) {
        let m = 1 + seed % (1u64 << (n - 1));
        let f = sample_uniform_fnm(n, m, seed).unwrap();
        let back = BooleanFunction::from_file_str(&f.to_file_string()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn bit_string_display_parses_back(n in 1usize..=64, v in any::<u64>()) {
        let v = if n == 64 { v } else { v & ((1u64 << n) - 1) };
        let x = BitString::new(n, v).unwrap();
        let y: BitString = x.to_string().parse().unwrap();
        prop_assert_eq!(x, y);
    }
}
