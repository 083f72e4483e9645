//! Fixed inputs shared by the benchmarks.

use onsetqlab::boolfn::sample_uniform_fnm;
use onsetqlab::{BitString, BooleanFunction};

/// Seed used for every fixture.
pub const SEED: u64 = 0x5eed;

/// A uniform member of `F_{n,m}`, the same on every run.
pub fn function(n: usize, m: u64) -> BooleanFunction {
    sample_uniform_fnm(n, m, SEED).expect("valid (n, m)")
}

/// The first on-set member and an off-set input of `f`.
pub fn inputs(f: &BooleanFunction) -> (BitString, BitString) {
    let on = f.onset()[0];
    let off = (0..f.table_len())
        .find(|&v| !f.eval_index(v))
        .map(|v| BitString::new(f.arity(), v).expect("fits"))
        .expect("M <= 2^(N-1) leaves an off-set");
    (on, off)
}
