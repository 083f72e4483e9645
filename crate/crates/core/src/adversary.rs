//! Relational adversary quantities for explicit weighted relations.
//!
//! For a weight function `R` on `A x B` with `A` inside `f^-1(0)` and `B`
//! inside `f^-1(1)`, `theta(a, i)` is the share of `a`'s weight on partners
//! that differ from `a` at position `i`. The quantum bound is
//! `1 / max sqrt(theta(a,i) theta(b,i))` and the randomized one
//! `1 / max min(theta(a,i), theta(b,i))`, both over weighted pairs that
//! differ at `i`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::A => "A",
            Side::B => "B",
        }
    }
}

/// A sparse nonnegative weight function on `A x B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelationRepr", into = "RelationRepr")]
pub struct AdversaryRelation {
    f: BooleanFunction,
    a: Vec<BitString>,
    b: Vec<BitString>,
    /// `(index into a, index into b, weight)`, zero weights dropped.
    weights: Vec<(usize, usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RelationRepr {
    f: BooleanFunction,
    a: Vec<BitString>,
    b: Vec<BitString>,
    weights: Vec<(usize, usize, f64)>,
}

impl TryFrom<RelationRepr> for AdversaryRelation {
    type Error = Error;

    fn try_from(r: RelationRepr) -> Result<Self> {
        Self::new(r.f, r.a, r.b, r.weights)
    }
}

impl From<AdversaryRelation> for RelationRepr {
    fn from(r: AdversaryRelation) -> Self {
        Self {
            f: r.f,
            a: r.a,
            b: r.b,
            weights: r.weights,
        }
    }
}

impl AdversaryRelation {
    /// Checks membership (`f = 0` on `A`, `f = 1` on `B`), index ranges and
    /// weight signs. Denominators are checked by the evaluators.
    pub fn new(
        f: BooleanFunction,
        a: Vec<BitString>,
        b: Vec<BitString>,
        weights: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for (members, expected) in [(&a, false), (&b, true)] {
            for x in members {
                let value = f.eval(x)?;
                if value != expected {
                    return Err(Error::RelationMismatch {
                        bits: x.to_string(),
                        value,
                        expected,
                    });
                }
            }
        }
        let mut kept = Vec::with_capacity(weights.len());
        for (i, j, w) in weights {
            if i >= a.len() || j >= b.len() {
                return Err(Error::DimensionMismatch {
                    expected: if i >= a.len() { a.len() } else { b.len() },
                    found: if i >= a.len() { i } else { j },
                });
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Domain {
                    name: "weight",
                    value: w,
                    reason: "weights must be finite and nonnegative",
                });
            }
            if w > 0.0 {
                kept.push((i, j, w));
            }
        }
        Ok(Self {
            f,
            a,
            b,
            weights: kept,
        })
    }

    pub fn f(&self) -> &BooleanFunction {
        &self.f
    }

    pub fn a(&self) -> &[BitString] {
        &self.a
    }

    pub fn b(&self) -> &[BitString] {
        &self.b
    }

    pub fn weights(&self) -> &[(usize, usize, f64)] {
        &self.weights
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c > 0.0);
        let mut r = self.clone();
        for w in &mut r.weights {
            w.2 *= c;
        }
        r
    }

    fn members(&self, side: Side) -> &[BitString] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    fn thetas(&self) -> Result<Thetas> {
        if self.weights.is_empty() {
            return Err(Error::EmptyRelation);
        }
        let n = self.f.arity();
        let mut ta = Theta::new(self.a.len(), n);
        let mut tb = Theta::new(self.b.len(), n);
        for &(i, j, w) in &self.weights {
            let diff = self.a[i].value() ^ self.b[j].value();
            ta.add(i, diff, w);
            tb.add(j, diff, w);
        }
        ta.check(Side::A)?;
        tb.check(Side::B)?;
        Ok(Thetas { a: ta, b: tb })
    }

    /// `theta(element, i)` on the given side.
    pub fn theta(&self, side: Side, element: &BitString, i: usize) -> Result<f64> {
        let idx = self
            .members(side)
            .iter()
            .position(|x| x == element)
            .ok_or_else(|| {
                Error::InvalidBitString(format!("{element} is not in side {}", side.name()))
            })?;
        let t = self.thetas()?;
        match side {
            Side::A => t.a.ratio(idx, i, Side::A),
            Side::B => t.b.ratio(idx, i, Side::B),
        }
    }

    /// `theta(element, i)` for every member of `side` (in order) and every
    /// position, computed in one pass.
    pub fn theta_table(&self, side: Side) -> Result<Vec<Vec<f64>>> {
        let t = self.thetas()?;
        let (theta, len) = match side {
            Side::A => (&t.a, self.a.len()),
            Side::B => (&t.b, self.b.len()),
        };
        (0..len)
            .map(|idx| (0..theta.n).map(|i| theta.ratio(idx, i, side)).collect())
            .collect()
    }

    /// `max sqrt(theta(a,i) theta(b,i))` over weighted pairs differing at `i`.
    pub fn v_geom(&self) -> Result<f64> {
        self.max_over_triples(|x, y| (x * y).sqrt())
    }

    /// `max min(theta(a,i), theta(b,i))` over weighted pairs differing at `i`.
    pub fn v_min(&self) -> Result<f64> {
        self.max_over_triples(f64::min)
    }

    /// Every `(theta(a,i), theta(b,i))` over weighted pairs differing at `i`.
    pub fn theta_pairs(&self) -> Result<Vec<(f64, f64)>> {
        let t = self.thetas()?;
        let n = self.f.arity();
        let mut out = Vec::new();
        for &(ia, ib, _) in &self.weights {
            let diff = self.a[ia].value() ^ self.b[ib].value();
            for pos in 0..n {
                if diff >> (n - 1 - pos) & 1 == 1 {
                    out.push((t.a.ratio(ia, pos, Side::A)?, t.b.ratio(ib, pos, Side::B)?));
                }
            }
        }
        Ok(out)
    }

    fn max_over_triples(&self, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let pairs = self.theta_pairs()?;
        Ok(pairs.into_iter().map(|(x, y)| g(x, y)).fold(0.0, f64::max))
    }
}

struct Thetas {
    a: Theta,
    b: Theta,
}

/// Per-element total weight and per-position differing weight.
struct Theta {
    n: usize,
    total: Vec<f64>,
    differing: Vec<f64>,
}

impl Theta {
    fn new(len: usize, n: usize) -> Self {
        Self {
            n,
            total: vec![0.0; len],
            differing: vec![0.0; len * n],
        }
    }

    fn add(&mut self, idx: usize, diff: u64, w: f64) {
        self.total[idx] += w;
        for pos in 0..self.n {
            if diff >> (self.n - 1 - pos) & 1 == 1 {
                self.differing[idx * self.n + pos] += w;
            }
        }
    }

    fn check(&self, side: Side) -> Result<()> {
        match self.total.iter().position(|&t| t <= 0.0) {
            Some(index) => Err(Error::ZeroDenominator {
                side: side.name(),
                index,
            }),
            None => Ok(()),
        }
    }

    fn ratio(&self, idx: usize, pos: usize, side: Side) -> Result<f64> {
        let total = self.total[idx];
        if total <= 0.0 {
            return Err(Error::ZeroDenominator {
                side: side.name(),
                index: idx,
            });
        }
        Ok(self.differing[idx * self.n + pos] / total)
    }
}

/// `A` = weight `k+1` strings, `B` = weight `k` strings, unit weight on pairs
/// at distance 1.
pub fn hamming_slice_relation(
    n: usize,
    k: usize,
    f: &BooleanFunction,
) -> Result<AdversaryRelation> {
    if f.arity() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: f.arity(),
        });
    }
    if k >= n {
        return Err(Error::Domain {
            name: "k",
            value: k as f64,
            reason: "need k < n",
        });
    }
    let slice = |w: usize| -> Vec<BitString> {
        (0..1u64 << n)
            .filter(|v| v.count_ones() as usize == w)
            .map(|v| BitString::new(n, v).expect("fits"))
            .collect()
    };
    let a = slice(k + 1);
    let b = slice(k);
    let b_index: HashMap<u64, usize> = b.iter().enumerate().map(|(j, x)| (x.value(), j)).collect();
    let mut weights = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for pos in 0..n {
            if x.get(pos) {
                weights.push((i, b_index[&x.flipped(pos).value()], 1.0));
            }
        }
    }
    AdversaryRelation::new(f.clone(), a, b, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::threshold_padded_function;

    fn slice(n: usize, k: usize) -> AdversaryRelation {
        // The smallest M with threshold index k.
        let m: u64 = (0..=k as u64)
            .map(|i| crate::measures::binomial(n as u64, i) as u64)
            .sum();
        let f = threshold_padded_function(n, m).unwrap();
        hamming_slice_relation(n, k, &f).unwrap()
    }

    /// The slice relation for `f = [|x| <= k]`, defined for every `k < n`
    /// even where that on-set is too large for `F_{n,m}`.
    fn ball_slice(n: usize, k: usize) -> AdversaryRelation {
        let ball: Vec<BitString> = (0..1u64 << n)
            .filter(|v| v.count_ones() as usize <= k)
            .map(|v| BitString::new(n, v).unwrap())
            .collect();
        let f = BooleanFunction::from_onset(n, &ball).unwrap();
        hamming_slice_relation(n, k, &f).unwrap()
    }

    #[test]
    fn slice_sizes() {
        let r = slice(4, 1);
        assert_eq!((r.a().len(), r.b().len(), r.weights().len()), (6, 4, 12));
        assert!(r.weights().iter().all(|w| w.2 == 1.0));
        let r = slice(3, 0);
        assert_eq!((r.a().len(), r.b().len(), r.weights().len()), (3, 1, 3));
    }

    #[test]
    fn slice_thetas_and_bounds() {
        let r = slice(4, 1);
        let a = r.a()[0];
        let i = (0..4).find(|&i| a.get(i)).unwrap();
        assert!((r.theta(Side::A, &a, i).unwrap() - 0.5).abs() < 1e-15);
        let b = r.b()[0];
        let i = (0..4).find(|&i| !b.get(i)).unwrap();
        assert!((r.theta(Side::B, &b, i).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.v_geom().unwrap() - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!((r.v_min().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_up_to_12() {
        for n in 1..=12 {
            for k in 0..n {
                let r = ball_slice(n, k);
                for (ta, tb) in r.theta_pairs().unwrap() {
                    assert!((ta - 1.0 / (k + 1) as f64).abs() < 1e-12);
                    assert!((tb - 1.0 / (n - k) as f64).abs() < 1e-12);
                    assert!(ta.min(tb) <= (ta * tb).sqrt() + 1e-15);
                }
                let want = (1.0 / ((k + 1) * (n - k)) as f64).sqrt();
                assert!((r.v_geom().unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_pair() {
        let f = BooleanFunction::from_onset(3, &["011".parse().unwrap()]).unwrap();
        let r = AdversaryRelation::new(
            f,
            vec!["000".parse().unwrap()],
            vec!["011".parse().unwrap()],
            vec![(0, 0, 2.5)],
        )
        .unwrap();
        assert_eq!(r.v_geom().unwrap(), 1.0);
        assert_eq!(r.v_min().unwrap(), 1.0);
        assert_eq!(r.theta(Side::A, &"000".parse().unwrap(), 1).unwrap(), 1.0);
    }

    #[test]
    fn scaling_invariance() {
        let r = slice(5, 2);
        let s = r.scaled(7.25);
        assert!((r.v_geom().unwrap() - s.v_geom().unwrap()).abs() < 1e-15);
        assert!((r.v_min().unwrap() - s.v_min().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let f = threshold_padded_function(4, 5).unwrap();
        // Weight-1 strings are in the on-set, so they cannot sit in A.
        assert!(matches!(
            hamming_slice_relation(4, 0, &f),
            Err(Error::RelationMismatch { .. })
        ));
        let r = AdversaryRelation::new(f.clone(), vec![], vec![], vec![]).unwrap();
        assert!(matches!(r.v_geom(), Err(Error::EmptyRelation)));
        // An A member with no weighted partner has a zero denominator.
        let r = AdversaryRelation::new(
            f,
            vec!["0011".parse().unwrap(), "0101".parse().unwrap()],
            vec!["0001".parse().unwrap()],
            vec![(0, 0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            r.theta(Side::A, &"0101".parse().unwrap(), 0),
            Err(Error::ZeroDenominator { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let r = slice(4, 1);
        let s = serde_json::to_string(&r).unwrap();
        let back: AdversaryRelation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
