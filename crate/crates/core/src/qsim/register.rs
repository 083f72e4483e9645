use num_complex::Complex64;
use rand::Rng;

use crate::constants::NORM_TOL;
use crate::rng::SimRng;

/// State vector over `|i>|b>|w>`: index `i < index_dim`, flag `b < flag_dim`
/// (1 when the flag qubit is factored out, 2 otherwise) and workspace
/// `w < work_dim`. Amplitudes are stored index-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRegister {
    amps: Vec<Complex64>,
    index_dim: usize,
    flag_dim: usize,
    work_dim: usize,
}

impl SimRegister {
    /// The basis state `|i>|b>|w>`.
    pub fn basis(
        index_dim: usize,
        flag_dim: usize,
        work_dim: usize,
        i: usize,
        b: usize,
        w: usize,
    ) -> Self {
        assert!(index_dim > 0 && (flag_dim == 1 || flag_dim == 2) && work_dim > 0);
        assert!(i < index_dim && b < flag_dim && w < work_dim);
        let mut amps = vec![Complex64::new(0.0, 0.0); index_dim * flag_dim * work_dim];
        amps[(i * flag_dim + b) * work_dim + w] = Complex64::new(1.0, 0.0);
        Self {
            amps,
            index_dim,
            flag_dim,
            work_dim,
        }
    }

    /// `1/sqrt(K) sum_i |i>` with no flag or workspace.
    pub fn uniform(index_dim: usize) -> Self {
        assert!(index_dim > 0);
        let a = Complex64::new(1.0 / (index_dim as f64).sqrt(), 0.0);
        Self {
            amps: vec![a; index_dim],
            index_dim,
            flag_dim: 1,
            work_dim: 1,
        }
    }

    /// Builds a register from raw amplitudes, normalising them.
    pub fn from_amplitudes(
        index_dim: usize,
        flag_dim: usize,
        work_dim: usize,
        amps: Vec<Complex64>,
    ) -> Self {
        assert_eq!(amps.len(), index_dim * flag_dim * work_dim);
        let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero vector");
        Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
            index_dim,
            flag_dim,
            work_dim,
        }
    }

    pub fn index_dim(&self) -> usize {
        self.index_dim
    }

    pub fn flag_dim(&self) -> usize {
        self.flag_dim
    }

    pub fn work_dim(&self) -> usize {
        self.work_dim
    }

    pub fn dimension(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    #[inline]
    pub(crate) fn pos(&self, i: usize, b: usize, w: usize) -> usize {
        (i * self.flag_dim + b) * self.work_dim + w
    }

    pub fn amplitude(&self, i: usize, b: usize, w: usize) -> Complex64 {
        self.amps[self.pos(i, b, w)]
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Inversion about the mean of the index register, `2|s><s| - I`, applied
    /// independently on every flag/workspace slice.
    pub fn diffuse_index(&mut self) {
        let inner = self.flag_dim * self.work_dim;
        for slot in 0..inner {
            let mean = (0..self.index_dim)
                .map(|i| self.amps[i * inner + slot])
                .sum::<Complex64>()
                / self.index_dim as f64;
            for i in 0..self.index_dim {
                let a = &mut self.amps[i * inner + slot];
                *a = 2.0 * mean - *a;
            }
        }
    }

    /// Puts the flag qubit into `|->`: `|i>|0>|w> -> |i>|->|w>`.
    /// Requires `flag_dim == 2` and zero amplitude on `b = 1`.
    pub fn prepare_flag_minus(&mut self) {
        assert_eq!(self.flag_dim, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.index_dim {
            for w in 0..self.work_dim {
                let p0 = self.pos(i, 0, w);
                let p1 = self.pos(i, 1, w);
                debug_assert!(self.amps[p1].norm_sqr() == 0.0);
                let a = self.amps[p0];
                self.amps[p0] = a * s;
                self.amps[p1] = -a * s;
            }
        }
    }

    /// Marginal distribution of the index register.
    pub fn index_probabilities(&self) -> Vec<f64> {
        let inner = self.flag_dim * self.work_dim;
        self.amps
            .chunks(inner)
            .map(|c| c.iter().map(Complex64::norm_sqr).sum())
            .collect()
    }

    /// Marginal distribution of the flag qubit.
    pub fn flag_probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.flag_dim];
        for i in 0..self.index_dim {
            for (b, pb) in p.iter_mut().enumerate() {
                for w in 0..self.work_dim {
                    *pb += self.amps[self.pos(i, b, w)].norm_sqr();
                }
            }
        }
        p
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SimRegister) -> Complex64 {
        assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Samples an index from the exact marginal.
    pub fn sample_index(&self, rng: &mut SimRng) -> usize {
        sample_from(&self.index_probabilities(), rng)
    }
}

/// Samples from a probability vector (need not be normalised exactly).
pub fn sample_from(probs: &[f64], rng: &mut SimRng) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // Rounding fallback: last outcome with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
