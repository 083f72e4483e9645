//! Query access to a hidden input.
//!
//! An [`Oracle`] owns `x` and never hands it to algorithm code; algorithms
//! only see [`OracleView`]s (sub-ranges of `x`, optionally XORed with a known
//! mask) and spend one query per application. The query counter can only be
//! advanced from inside this module.

use num_complex::Complex64;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::qsim::register::SimRegister;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// `|i>|b>|w> -> |i>|b xor x_i>|w>`.
    BitFlip,
    /// `|i>|w> -> (-1)^{x_i} |i>|w>`, the bit-flip oracle with its flag in `|->`.
    Phase,
}

#[derive(Clone, Debug)]
pub struct Oracle {
    x: BitString,
    mode: OracleMode,
}

impl Oracle {
    pub fn new(x: BitString, mode: OracleMode) -> Self {
        Self { x, mode }
    }

    pub fn bit_flip(x: BitString) -> Self {
        Self::new(x, OracleMode::BitFlip)
    }

    pub fn phase(x: BitString) -> Self {
        Self::new(x, OracleMode::Phase)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    /// The hidden input. For test harnesses and exact-distribution drivers
    /// only; nothing in the algorithms module calls this.
    pub fn reveal(&self) -> BitString {
        self.x
    }

    /// View of the whole input.
    pub fn view(&self) -> OracleView<'_> {
        OracleView {
            oracle: self,
            positions: (0..self.len()).collect(),
            mask: vec![false; self.len()],
            mode: self.mode,
        }
    }
}

/// Monotone query count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryCounter {
    count: u64,
}

impl QueryCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn tick(&mut self) {
        self.count += 1;
    }
}

/// The string `y_j = x_{positions[j]} xor mask[j]`, queryable through the
/// underlying oracle at one query per application.
#[derive(Clone, Debug)]
pub struct OracleView<'a> {
    oracle: &'a Oracle,
    positions: Vec<usize>,
    mask: Vec<bool>,
    mode: OracleMode,
}

impl<'a> OracleView<'a> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    /// Positions into the underlying input, in view order.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn with_mode(mut self, mode: OracleMode) -> Self {
        self.mode = mode;
        self
    }

    /// Sub-view on entries `range` of this view.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            oracle: self.oracle,
            positions: self.positions[range.clone()].to_vec(),
            mask: self.mask[range].to_vec(),
            mode: self.mode,
        }
    }

    /// Sub-view on an arbitrary list of entries of this view.
    pub fn select(&self, entries: &[usize]) -> Self {
        Self {
            oracle: self.oracle,
            positions: entries.iter().map(|&j| self.positions[j]).collect(),
            mask: entries.iter().map(|&j| self.mask[j]).collect(),
            mode: self.mode,
        }
    }

    /// XORs a known string into the view.
    pub fn xor_mask(&self, extra: &[bool]) -> Result<Self> {
        if extra.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: extra.len(),
            });
        }
        Ok(Self {
            oracle: self.oracle,
            positions: self.positions.clone(),
            mask: self.mask.iter().zip(extra).map(|(a, b)| a ^ b).collect(),
            mode: self.mode,
        })
    }

    pub fn xor_bits(&self, z: &BitString) -> Result<Self> {
        self.xor_mask(&z.bits().collect::<Vec<_>>())
    }

    /// Entry `j` evaluated against an explicit candidate string. Pure
    /// bookkeeping: no query is made.
    pub fn entry_under(&self, x: &BitString, j: usize) -> bool {
        x.get(self.positions[j]) ^ self.mask[j]
    }

    /// Entries equal to 1 when the hidden input is `x`.
    pub fn marked_under(&self, x: &BitString) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.entry_under(x, j))
            .collect()
    }

    fn entry(&self, j: usize) -> bool {
        self.entry_under(&self.oracle.x, j)
    }

    /// Ground-truth marked set of this view. Harness use only, like
    /// [`Oracle::reveal`].
    pub fn reveal_marked(&self) -> Vec<usize> {
        self.marked_under(&self.oracle.x)
    }
}

/// Applies the full-input oracle in its own mode.
pub fn apply_oracle(
    state: &mut SimRegister,
    oracle: &Oracle,
    counter: &mut QueryCounter,
) -> Result<()> {
    apply_view(state, &oracle.view(), counter)
}

/// Applies a view in its mode. Bit-flip mode needs a flag qubit
/// (`flag_dim == 2`); phase mode acts on every flag/workspace slice.
pub fn apply_view(
    state: &mut SimRegister,
    view: &OracleView<'_>,
    counter: &mut QueryCounter,
) -> Result<()> {
    if state.index_dim() != view.len() {
        return Err(Error::DimensionMismatch {
            expected: view.len(),
            found: state.index_dim(),
        });
    }
    let (fd, wd) = (state.flag_dim(), state.work_dim());
    let inner = fd * wd;
    match view.mode {
        OracleMode::Phase => {
            let amps = state.amps_mut();
            for j in 0..view.len() {
                if view.entry(j) {
                    for a in &mut amps[j * inner..(j + 1) * inner] {
                        *a = -*a;
                    }
                }
            }
        }
        OracleMode::BitFlip => {
            if fd != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: fd,
                });
            }
            let amps = state.amps_mut();
            for j in 0..view.len() {
                if view.entry(j) {
                    let base = j * inner;
                    let (zero, one) = amps[base..base + inner].split_at_mut(wd);
                    zero.swap_with_slice(one);
                }
            }
        }
    }
    counter.tick();
    Ok(())
}

/// Classical query of entry `j`: one bit-flip application on `|j>|0>`
/// followed by a measurement of the flag.
pub fn query_entry(view: &OracleView<'_>, j: usize, counter: &mut QueryCounter) -> bool {
    let mut s = SimRegister::basis(view.len(), 2, 1, j, 0, 0);
    let bf = view.clone().with_mode(OracleMode::BitFlip);
    apply_view(&mut s, &bf, counter).expect("dimensions match by construction");
    s.amplitude(j, 1, 0) != Complex64::new(0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn bit_flip_sets_flag() {
        let o = Oracle::bit_flip(bs("0100"));
        let mut c = QueryCounter::new();
        let mut s = SimRegister::basis(4, 2, 1, 1, 0, 0);
        apply_oracle(&mut s, &o, &mut c).unwrap();
        assert_eq!(s.amplitude(1, 1, 0), Complex64::new(1.0, 0.0));
        let mut s = SimRegister::basis(4, 2, 1, 2, 0, 0);
        apply_oracle(&mut s, &o, &mut c).unwrap();
        assert_eq!(s.amplitude(2, 0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(c.count(), 2);
    }

    #[test]
    fn phase_on_zero_input_is_identity() {
        let o = Oracle::phase(BitString::zeros(8));
        let mut c = QueryCounter::new();
        let mut s = SimRegister::uniform(8);
        let before = s.clone();
        apply_oracle(&mut s, &o, &mut c).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn counter_increments_by_one() {
        let o = Oracle::phase(bs("101"));
        let mut c = QueryCounter::new();
        let mut s = SimRegister::uniform(3);
        for _ in 0..5 {
            apply_oracle(&mut s, &o, &mut c).unwrap();
        }
        assert_eq!(c.count(), 5);
        apply_oracle(&mut s, &o, &mut c).unwrap();
        assert_eq!(c.count(), 6);
    }

    #[test]
    fn dimension_mismatch() {
        let o = Oracle::phase(bs("101"));
        let mut s = SimRegister::uniform(4);
        assert!(apply_oracle(&mut s, &o, &mut QueryCounter::new()).is_err());
        let o = Oracle::bit_flip(bs("101"));
        let mut s = SimRegister::uniform(3);
        assert!(apply_oracle(&mut s, &o, &mut QueryCounter::new()).is_err());
    }

    #[test]
    fn phase_equals_bit_flip_under_minus_conjugation() {
        let mut rng = substream(7, 0);
        for trial in 0..20 {
            let n = 1 + trial % 9;
            let x = BitString::new(n, rng.random::<u64>() & ((1 << n) - 1)).unwrap();
            let (wd, amps): (usize, Vec<Complex64>) = {
                let wd = 1 + trial % 3;
                (
                    wd,
                    (0..n * wd)
                        .map(|_| {
                            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                        })
                        .collect(),
                )
            };
            let phi = SimRegister::from_amplitudes(n, 1, wd, amps.clone());

            let mut via_phase = phi.clone();
            apply_oracle(&mut via_phase, &Oracle::phase(x), &mut QueryCounter::new()).unwrap();

            // phi (x) |-> through the bit-flip oracle.
            let mut lifted = vec![Complex64::new(0.0, 0.0); n * 2 * wd];
            for i in 0..n {
                for w in 0..wd {
                    lifted[(i * 2) * wd + w] = phi.amplitude(i, 0, w);
                }
            }
            let mut s = SimRegister::from_amplitudes(n, 2, wd, lifted);
            s.prepare_flag_minus();
            apply_oracle(&mut s, &Oracle::bit_flip(x), &mut QueryCounter::new()).unwrap();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n {
                for w in 0..wd {
                    let a0 = s.amplitude(i, 0, w) / r;
                    let a1 = -s.amplitude(i, 1, w) / r;
                    let want = via_phase.amplitude(i, 0, w);
                    assert!((a0 - want).norm() < 1e-12 && (a1 - want).norm() < 1e-12);
                }
            }
            assert!(s.is_normalized());
        }
    }

    #[test]
    fn views_mask_and_select() {
        let o = Oracle::phase(bs("0110"));
        let v = o.view().xor_bits(&bs("0011")).unwrap();
        assert_eq!(v.reveal_marked(), vec![1, 3]);
        let s = v.slice(2..4);
        assert_eq!(s.positions(), &[2, 3]);
        assert_eq!(s.reveal_marked(), vec![1]);
        let mut c = QueryCounter::new();
        assert!(query_entry(&s, 1, &mut c));
        assert!(!query_entry(&s, 0, &mut c));
        assert_eq!(c.count(), 2);
    }
}
