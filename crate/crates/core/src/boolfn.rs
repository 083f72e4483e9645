//! Boolean functions stored as packed truth tables, with samplers and the two
//! explicit on-set constructions used by the evaluation algorithms.

use std::collections::HashSet;
use std::fmt::Write as _;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::measures::binomial;
use crate::rng::{substream, SimRng};

/// Largest arity for which a full truth table is materialised.
pub const MAX_TABLE_ARITY: usize = 28;

/// An `n`-variable Boolean function. Bit `x` of the table is `f(x)` where `x`
/// is read with `x_1` as the most significant bit.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    arity: usize,
    words: Vec<u64>,
    onset_size: u64,
}

impl BooleanFunction {
    /// Builds a function from its truth-table words (little-endian bit order:
    /// bit `x % 64` of word `x / 64` is `f(x)`).
    pub fn from_words(arity: usize, mut words: Vec<u64>) -> Result<Self> {
        check_table_arity(arity)?;
        let len = table_words(arity);
        if words.len() != len {
            return Err(Error::TruthTableFormat(format!(
                "expected {len} words, got {}",
                words.len()
            )));
        }
        if arity < 6 {
            words[0] &= (1u64 << (1u64 << arity)) - 1;
        }
        let onset_size = words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(Self {
            arity,
            words,
            onset_size,
        })
    }

    pub fn from_onset<'a, I>(arity: usize, onset: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BitString>,
    {
        check_table_arity(arity)?;
        let mut words = vec![0u64; table_words(arity)];
        let mut any = false;
        for x in onset {
            if x.len() != arity {
                return Err(Error::LengthMismatch {
                    expected: arity,
                    found: x.len(),
                });
            }
            let v = x.value() as usize;
            words[v / 64] |= 1 << (v % 64);
            any = true;
        }
        if !any {
            return Err(Error::EmptyOnset);
        }
        Self::from_words(arity, words)
    }

    fn from_indices(arity: usize, onset: impl IntoIterator<Item = u64>) -> Self {
        let mut words = vec![0u64; table_words(arity)];
        for v in onset {
            words[(v / 64) as usize] |= 1 << (v % 64);
        }
        Self::from_words(arity, words).expect("arity validated by caller")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn onset_size(&self) -> u64 {
        self.onset_size
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn table_len(&self) -> u64 {
        1u64 << self.arity
    }

    #[inline]
    pub fn eval_index(&self, x: u64) -> bool {
        (self.words[(x / 64) as usize] >> (x % 64)) & 1 == 1
    }

    pub fn eval(&self, x: &BitString) -> Result<bool> {
        if x.len() != self.arity {
            return Err(Error::LengthMismatch {
                expected: self.arity,
                found: x.len(),
            });
        }
        Ok(self.eval_index(x.value()))
    }

    /// The on-set in increasing (lexicographic) order.
    pub fn onset(&self) -> Vec<BitString> {
        let mut out = Vec::with_capacity(self.onset_size as usize);
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                out.push(BitString::new(self.arity, wi as u64 * 64 + b).unwrap());
                w &= w - 1;
            }
        }
        out
    }

    pub fn onset_contains(&self, x: &BitString) -> bool {
        x.len() == self.arity && self.eval_index(x.value())
    }

    /// Hexadecimal encoding of the table read as the integer `sum f(x) 2^x`,
    /// most significant nibble first.
    pub fn to_hex(&self) -> String {
        let nibbles = ((1usize << self.arity) / 4).max(1);
        let mut s = String::with_capacity(nibbles);
        for k in (0..nibbles).rev() {
            let word = self.words[k / 16];
            let nib = (word >> ((k % 16) * 4)) & 0xf;
            write!(s, "{nib:x}").unwrap();
        }
        s
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        check_table_arity(arity)?;
        let nibbles = ((1usize << arity) / 4).max(1);
        let hex = hex.trim();
        if hex.len() != nibbles {
            return Err(Error::TruthTableFormat(format!(
                "expected {nibbles} hex digits for n={arity}, got {}",
                hex.len()
            )));
        }
        let mut words = vec![0u64; table_words(arity)];
        for (pos, c) in hex.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::TruthTableFormat(format!("bad hex digit {c:?}")))?
                as u64;
            let k = nibbles - 1 - pos;
            words[k / 16] |= nib << ((k % 16) * 4);
        }
        if arity < 2 && words[0] >> (1u64 << arity) != 0 {
            return Err(Error::TruthTableFormat(
                "table has bits beyond 2^n".to_string(),
            ));
        }
        Self::from_words(arity, words)
    }

    /// Truth-table file: `n=<N>` then the hex table, one per line.
    pub fn to_file_string(&self) -> String {
        format!("n={}\n{}\n", self.arity, self.to_hex())
    }

    pub fn from_file_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::TruthTableFormat("empty file".into()))?;
        let n = header
            .strip_prefix("n=")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::TruthTableFormat(format!("bad header {header:?}")))?;
        let hex = lines
            .next()
            .ok_or_else(|| Error::TruthTableFormat("missing table line".into()))?;
        if lines.next().is_some() {
            return Err(Error::TruthTableFormat("trailing content".into()));
        }
        Self::from_hex(n, hex)
    }

    pub fn and(arity: usize) -> Self {
        Self::from_indices(arity, [(1u64 << arity) - 1])
    }

    pub fn or(arity: usize) -> Self {
        Self::from_indices(arity, 1..(1u64 << arity))
    }

    pub fn parity(arity: usize) -> Self {
        Self::from_indices(
            arity,
            (0..(1u64 << arity)).filter(|x| x.count_ones() % 2 == 1),
        )
    }
}

impl std::fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BooleanFunction(n={}, M={}, {})",
            self.arity,
            self.onset_size,
            self.to_hex()
        )
    }
}

/// Serialized as `{"n": N, "table": "<hex>"}`.
#[derive(Serialize, Deserialize)]
struct TableRepr {
    n: usize,
    table: String,
}

impl Serialize for BooleanFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr {
            n: self.arity,
            table: self.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TableRepr::deserialize(d)?;
        Self::from_hex(r.n, &r.table).map_err(serde::de::Error::custom)
    }
}

fn table_words(arity: usize) -> usize {
    ((1usize << arity) / 64).max(1)
}

fn check_table_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_TABLE_ARITY {
        return Err(Error::ArityOutOfRange(arity));
    }
    Ok(())
}

/// Checks `1 <= m <= 2^(n-1)`.
pub fn check_onset_size(n: usize, m: u64) -> Result<()> {
    if n == 0 || n > 64 {
        return Err(Error::ArityOutOfRange(n));
    }
    let max = 1u64 << (n - 1);
    if m == 0 || m > max {
        return Err(Error::OnsetOutOfRange { n, m, max });
    }
    Ok(())
}

/// Draws a uniformly random `m`-subset of `{0,1}^n` (Floyd's algorithm), sorted.
/// Never touches the full cube, so it works for any `n <= 64`.
pub fn sample_onset(n: usize, m: u64, rng: &mut SimRng) -> Result<Vec<BitString>> {
    check_onset_size(n, m)?;
    let universe: u128 = 1u128 << n;
    let mut chosen: HashSet<u64> = HashSet::with_capacity(m as usize);
    for j in (universe - m as u128)..universe {
        let j = j as u64;
        let t: u64 = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut values: Vec<u64> = chosen.into_iter().collect();
    values.sort_unstable();
    Ok(values
        .into_iter()
        .map(|v| BitString::new(n, v).unwrap())
        .collect())
}

/// A uniformly random member of `F_{n,m}` drawn from `rng`.
pub fn sample_with(n: usize, m: u64, rng: &mut SimRng) -> Result<BooleanFunction> {
    check_table_arity(n)?;
    let onset = sample_onset(n, m, rng)?;
    Ok(BooleanFunction::from_indices(
        n,
        onset.iter().map(BitString::value),
    ))
}

/// A uniformly random member of `F_{n,m}`; stream 0 of `seed`.
pub fn sample_uniform_fnm(n: usize, m: u64, seed: u64) -> Result<BooleanFunction> {
    sample_with(n, m, &mut substream(seed, 0))
}

/// Every member of `F_{n,m}`, each exactly once, in lexicographic order of
/// on-sets. The caller is responsible for `C(2^n, m)` being small.
pub fn enumerate_fnm(n: usize, m: usize) -> Result<impl Iterator<Item = BooleanFunction>> {
    check_table_arity(n)?;
    if m == 0 || m as u64 > 1u64 << n {
        return Err(Error::OnsetOutOfRange {
            n,
            m: m as u64,
            max: 1u64 << n,
        });
    }
    Ok((0..1u64 << n)
        .combinations(m)
        .map(move |c| BooleanFunction::from_indices(n, c)))
}

/// On-set `{0,1}^L 0^(n-L)` with `L = floor(log2 m)`, extended for non-powers
/// of two by `y 1 0^(n-L-1)` for the `m - 2^L` smallest `L`-bit prefixes `y`.
pub fn subcube_function(n: usize, m: u64) -> Result<BooleanFunction> {
    check_table_arity(n)?;
    check_onset_size(n, m)?;
    let l = floor_log2(m) as usize;
    let suffix = n - l;
    let mut onset: Vec<u64> = (0..1u64 << l).map(|y| y << suffix).collect();
    let delta = m - (1u64 << l);
    // `y 1 0^(suffix-1)`: the marker bit is the top bit of the suffix.
    onset.extend((0..delta).map(|y| (y << suffix) | (1u64 << (suffix - 1))));
    let f = BooleanFunction::from_indices(n, onset);
    debug_assert_eq!(f.onset_size(), m);
    Ok(f)
}

/// `floor(log2 m)` for `m >= 1`.
pub fn floor_log2(m: u64) -> u32 {
    63 - m.leading_zeros()
}

/// The threshold index of the padded construction: the largest `k` with
/// `D = sum_{i<=k} C(n,i) <= m`, together with `D`.
pub fn threshold_index(n: usize, m: u64) -> (usize, u64) {
    let mut k = 0usize;
    let mut d = 1u64;
    while k < n {
        let next = d + binomial(n as u64, k as u64 + 1) as u64;
        if next > m {
            break;
        }
        d = next;
        k += 1;
    }
    (k, d)
}

/// `f = 1` on every string of weight `<= k`, plus the lexicographically
/// smallest `m - D` strings of weight `>= k + 2`; `0` elsewhere, so that no
/// on-set member has weight `k + 1`.
pub fn threshold_padded_function(n: usize, m: u64) -> Result<BooleanFunction> {
    check_table_arity(n)?;
    check_onset_size(n, m)?;
    let (k, d) = threshold_index(n, m);
    let mut onset: Vec<u64> = (0..1u64 << n)
        .filter(|x| x.count_ones() as usize <= k)
        .collect();
    let padding = m - d;
    let pad: Vec<u64> = (0..1u64 << n)
        .filter(|x| x.count_ones() as usize >= k + 2)
        .take(padding as usize)
        .collect();
    assert_eq!(
        pad.len() as u64,
        padding,
        "not enough weight >= k+2 strings to pad"
    );
    onset.extend(pad);
    Ok(BooleanFunction::from_indices(n, onset))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn onset_strings(f: &BooleanFunction) -> Vec<String> {
        f.onset().iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn from_onset_examples() {
        let and2 = BooleanFunction::from_onset(2, &[bs("11")]).unwrap();
        assert_eq!(and2.onset_size(), 1);
        assert_eq!(and2, BooleanFunction::and(2));

        let f = BooleanFunction::from_onset(3, &[bs("000"), bs("100")]).unwrap();
        assert_eq!(f.onset_size(), 2);

        let or2 = BooleanFunction::from_onset(2, &[bs("01"), bs("10"), bs("11")]).unwrap();
        // brute-force OR table
        for x in 0..4u64 {
            assert_eq!(or2.eval_index(x), (x & 1 == 1) || (x & 2 == 2));
        }
        assert_eq!(or2.onset_size(), 3);
    }

    #[test]
    fn from_onset_errors() {
        assert!(matches!(
            BooleanFunction::from_onset(3, &[bs("00")]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            BooleanFunction::from_onset(3, &[]),
            Err(Error::EmptyOnset)
        ));
    }

    #[test]
    fn sampler_is_deterministic_and_sized() {
        let a = sample_uniform_fnm(3, 4, 11).unwrap();
        let b = sample_uniform_fnm(3, 4, 11).unwrap();
        assert_eq!(a, b);
        for seed in 0..50 {
            assert_eq!(sample_uniform_fnm(2, 2, seed).unwrap().onset_size(), 2);
        }
        assert!(sample_uniform_fnm(3, 5, 0).is_err());
        assert!(sample_uniform_fnm(3, 0, 0).is_err());
    }

    #[test]
    fn sample_onset_large_arity() {
        let mut rng = substream(3, 0);
        let s = sample_onset(64, 256, &mut rng).unwrap();
        assert_eq!(s.len(), 256);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_fnm(2, 1).unwrap().count(), 4);
        assert_eq!(enumerate_fnm(2, 2).unwrap().count(), 6);
        let all: Vec<_> = enumerate_fnm(3, 4).unwrap().collect();
        assert_eq!(all.len(), 70);
        let distinct: HashSet<Vec<u64>> = all.iter().map(|f| f.words().to_vec()).collect();
        assert_eq!(distinct.len(), 70);
        for m in 1..=4 {
            assert_eq!(
                enumerate_fnm(2, m).unwrap().count() as u128,
                binomial(4, m as u64)
            );
        }
    }

    #[test]
    fn subcube_examples() {
        assert_eq!(
            onset_strings(&subcube_function(3, 2).unwrap()),
            ["000", "100"]
        );
        assert_eq!(
            onset_strings(&subcube_function(3, 3).unwrap()),
            ["000", "010", "100"]
        );
        assert_eq!(
            onset_strings(&subcube_function(4, 4).unwrap()),
            ["0000", "0100", "1000", "1100"]
        );
    }

    #[test]
    fn subcube_power_of_two_is_closed_under_prefix_flips() {
        for n in 1..=8 {
            for l in 0..n {
                let f = subcube_function(n, 1 << l).unwrap();
                for x in f.onset() {
                    for i in 0..l {
                        assert!(f.onset_contains(&x.flipped(i)));
                    }
                }
            }
        }
    }

    #[test]
    fn subcube_sizes() {
        for n in 1..=7 {
            for m in 1..=(1u64 << (n - 1)) {
                assert_eq!(subcube_function(n, m).unwrap().onset_size(), m);
            }
        }
    }

    #[test]
    fn threshold_padded_examples() {
        let f = threshold_padded_function(4, 5).unwrap();
        assert_eq!(threshold_index(4, 5), (1, 5));
        assert!(f.onset().iter().all(|x| x.weight() <= 1));
        assert_eq!(f.onset_size(), 5);

        let f = threshold_padded_function(4, 6).unwrap();
        assert!(f.onset_contains(&bs("0111")));
        assert_eq!(f.onset_size(), 6);

        let f = threshold_padded_function(5, 16).unwrap();
        assert_eq!(threshold_index(5, 16), (2, 16));
        assert!(f.onset().iter().all(|x| x.weight() <= 2));
    }

    #[test]
    fn threshold_padded_avoids_weight_k_plus_one() {
        for n in 2..=8 {
            for m in 1..=(1u64 << (n - 1)) {
                let f = threshold_padded_function(n, m).unwrap();
                let (k, _) = threshold_index(n, m);
                assert_eq!(f.onset_size(), m);
                assert!(f.onset().iter().all(|x| x.weight() as usize != k + 1));
            }
        }
    }

    #[test]
    fn hex_and_file_format() {
        let and2 = BooleanFunction::and(2);
        assert_eq!(and2.to_hex(), "8");
        let or3 = BooleanFunction::or(3);
        assert_eq!(or3.to_hex(), "fe");
        let f = BooleanFunction::from_onset(1, &[bs("1")]).unwrap();
        assert_eq!(f.to_hex(), "2");
        let text = or3.to_file_string();
        assert_eq!(text, "n=3\nfe\n");
        assert_eq!(BooleanFunction::from_file_str(&text).unwrap(), or3);
        assert!(BooleanFunction::from_file_str("n=3\nf\n").is_err());
        assert!(BooleanFunction::from_file_str("m=3\nfe\n").is_err());
        assert!(BooleanFunction::from_hex(1, "4").is_err());
    }

    #[test]
    fn hex_round_trip_wide_table() {
        let f = sample_uniform_fnm(9, 100, 5).unwrap();
        assert_eq!(BooleanFunction::from_hex(9, &f.to_hex()).unwrap(), f);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<BooleanFunction>(&json).unwrap(), f);
    }
}
