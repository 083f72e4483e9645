//! State discrimination on copies of `|psi_x>`, and the average-case
//! evaluator built on it.
//!
//! The pretty-good measurement on `m` copies is simulated through the Gram
//! matrix `G_{yz} = <psi_y|psi_z>^m` of the on-set, so the `N^m`-dimensional
//! product states are never formed. With `G = V diag(l) V^T`, outcome `y` on a
//! state with overlaps `v_z = <psi_z|phi>` has probability
//! `((G^{-1/2} v)_y)^2`; the remaining mass is the inconclusive outcome.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::algorithms::{AlgorithmId, ExactSummary, RunRecord};
use crate::bits::{hamming, BitString};
use crate::boolfn::BooleanFunction;
use crate::constants::{IDENTIFY_ERROR, MAX_GRAM, PSD_TOL, VERIFY_ERROR};
use crate::error::{Error, Result};
use crate::measures::{copy_count_cap, BoundParams};
use crate::qsim::{
    exact_paths, grover_equality_test, inner_product_psi, prepare_psi_state, Exec, Oracle,
    OracleView,
};
use crate::rng::substream;

/// Pretty-good measurement for equal-prior pure states, given their Gram
/// matrix.
#[derive(Clone, Debug)]
pub struct Pgm {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    min_eigenvalue: f64,
}

impl Pgm {
    /// `gram[i][j] = <phi_i|phi_j>` for real states.
    pub fn new(gram: &[Vec<f64>]) -> Result<Self> {
        let k = gram.len();
        if k == 0 {
            return Err(Error::NoCandidates);
        }
        if gram.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: gram.iter().map(Vec::len).find(|&l| l != k).unwrap_or(k),
            });
        }
        Self::from_matrix(DMatrix::from_fn(k, k, |i, j| gram[i][j]))
    }

    fn from_matrix(g: DMatrix<f64>) -> Result<Self> {
        let k = g.nrows();
        let eig = SymmetricEigen::new(g);
        let min_eigenvalue = eig.eigenvalues.min();
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NotPsd(min_eigenvalue));
        }
        let v = &eig.eigenvectors;
        let rebuild = |h: &dyn Fn(f64) -> f64| {
            let d = DVector::from_iterator(k, eig.eigenvalues.iter().map(|&l| h(l)));
            v * DMatrix::from_diagonal(&d) * v.transpose()
        };
        Ok(Self {
            sqrt: rebuild(&|l| l.max(0.0).sqrt()),
            inv_sqrt: rebuild(&|l| if l > PSD_TOL { 1.0 / l.sqrt() } else { 0.0 }),
            min_eigenvalue,
        })
    }

    pub fn len(&self) -> usize {
        self.sqrt.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `P(y | x)`: `(G^{1/2})_{yx}^2`, row `x`. Sums to 1 when the states are
    /// linearly independent.
    pub fn confusion_row(&self, x: usize) -> Vec<f64> {
        (0..self.len()).map(|y| self.sqrt[(y, x)].powi(2)).collect()
    }

    /// `(G^{1/2})_{xx}^2` for every state.
    pub fn success_probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|x| self.sqrt[(x, x)].powi(2)).collect()
    }

    /// Outcome probabilities for a state with `overlaps[z] = <phi_z|phi>`,
    /// one entry per state followed by the inconclusive outcome.
    pub fn outcome_distribution(&self, overlaps: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(overlaps);
        let a = &self.inv_sqrt * v;
        let mut p: Vec<f64> = a.iter().map(|c| c * c).collect();
        let total: f64 = p.iter().sum();
        p.push((1.0 - total).max(0.0));
        p
    }
}

/// The measurement for `copies` copies of each on-set member's `|psi_x>`.
#[derive(Clone, Debug)]
pub struct PgmModel {
    onset: Vec<BitString>,
    copies: u32,
    pgm: Pgm,
}

impl PgmModel {
    pub fn new(onset: &[BitString], copies: u32) -> Result<Self> {
        if onset.is_empty() {
            return Err(Error::NoCandidates);
        }
        if onset.len() > MAX_GRAM {
            return Err(Error::GramTooLarge {
                size: onset.len(),
                limit: MAX_GRAM,
            });
        }
        if copies == 0 {
            return Err(Error::Domain {
                name: "copies",
                value: 0.0,
                reason: "need at least one copy",
            });
        }
        let k = onset.len();
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let v = inner_product_psi(&onset[i], &onset[j])?.powi(copies as i32);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(Self {
            onset: onset.to_vec(),
            copies,
            pgm: Pgm::from_matrix(g)?,
        })
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn onset(&self) -> &[BitString] {
        &self.onset
    }

    pub fn pgm(&self) -> &Pgm {
        &self.pgm
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.pgm.min_eigenvalue()
    }

    pub fn confusion_row(&self, x: usize) -> Vec<f64> {
        self.pgm.confusion_row(x)
    }

    pub fn success_probabilities(&self) -> Vec<f64> {
        self.pgm.success_probabilities()
    }

    /// See [`Pgm::outcome_distribution`]; `overlaps[z] = <psi_z^m|phi>`.
    pub fn outcome_distribution(&self, overlaps: &[f64]) -> Vec<f64> {
        self.pgm.outcome_distribution(overlaps)
    }
}

/// Success probability of the pretty-good measurement for each on-set member
/// given `copies` copies of its state.
pub fn pgm_success_probabilities(onset: &[BitString], copies: u32) -> Result<Vec<f64>> {
    Ok(PgmModel::new(onset, copies)?.success_probabilities())
}

/// Copy count chosen for one on-set.
#[derive(Clone, Debug)]
struct CopyChoice {
    copies: u32,
    cap: u32,
    reached: bool,
}

/// Smallest copy count whose worst-case PGM success reaches
/// `1 - IDENTIFY_ERROR`, searched up to `4 * cap`.
fn choose_copies(onset: &[BitString], n: usize) -> Result<(CopyChoice, PgmModel)> {
    let cap = copy_count_cap(n, onset.len() as u64);
    let target = 1.0 - IDENTIFY_ERROR;
    let mut last = None;
    for copies in 1..=4 * cap {
        let model = PgmModel::new(onset, copies)?;
        let worst = model
            .success_probabilities()
            .into_iter()
            .fold(1.0, f64::min);
        if worst >= target {
            return Ok((
                CopyChoice {
                    copies,
                    cap,
                    reached: true,
                },
                model,
            ));
        }
        last = Some(model);
    }
    Ok((
        CopyChoice {
            copies: 4 * cap,
            cap,
            reached: false,
        },
        last.expect("cap >= 1"),
    ))
}

/// Discrimination over the on-set followed by an equality test against the
/// identified member.
#[derive(Clone, Debug)]
pub struct AverageCasePlan {
    f: BooleanFunction,
    n: usize,
    model: PgmModel,
    choice: CopyChoice,
    max_overlap: f64,
    overlap_bound: f64,
    params: BoundParams,
}

impl AverageCasePlan {
    /// Fails with [`Error::IndistinguishableOnset`] if two on-set members are
    /// complementary: their states differ only by a global phase, so no
    /// number of copies separates them.
    pub fn new(f: &BooleanFunction) -> Result<Self> {
        let n = f.arity();
        let onset = f.onset();
        if onset.len() > MAX_GRAM {
            return Err(Error::GramTooLarge {
                size: onset.len(),
                limit: MAX_GRAM,
            });
        }
        let mut max_overlap: f64 = 0.0;
        for (i, x) in onset.iter().enumerate() {
            for y in &onset[..i] {
                if hamming(x, y)? as usize == n {
                    return Err(Error::IndistinguishableOnset(x.to_string(), y.to_string()));
                }
                max_overlap = max_overlap.max(inner_product_psi(x, y)?.abs());
            }
        }
        let m = onset.len() as f64;
        let (choice, model) = choose_copies(&onset, n)?;
        Ok(Self {
            f: f.clone(),
            n,
            model,
            choice,
            max_overlap,
            overlap_bound: 2.0 * (m.log2() / n as f64).sqrt(),
            params: BoundParams::new(n, f.onset_size())?,
        })
    }

    pub fn copies(&self) -> u32 {
        self.choice.copies
    }

    pub fn copy_cap(&self) -> u32 {
        self.choice.cap
    }

    /// Whether the chosen copy count reaches the identification target.
    pub fn target_reached(&self) -> bool {
        self.choice.reached
    }

    /// Largest pairwise `|<psi_x|psi_y>|` over the on-set.
    pub fn max_overlap(&self) -> f64 {
        self.max_overlap
    }

    pub fn overlap_check_passed(&self) -> bool {
        self.max_overlap <= self.overlap_bound
    }

    pub fn model(&self) -> &PgmModel {
        &self.model
    }

    /// Prepares the copies (one query each) and returns the measurement's
    /// outcome distribution, computed from the prepared states.
    fn measure_distribution(&self, exec: &mut Exec, view: &OracleView<'_>) -> Result<Vec<f64>> {
        let onset = self.model.onset();
        let mut overlaps = vec![1.0; onset.len()];
        let norm = 1.0 / (self.n as f64).sqrt();
        for _ in 0..self.choice.copies {
            let state = prepare_psi_state(view, exec.counter_mut())?;
            let amps = state.amplitudes();
            for (o, z) in overlaps.iter_mut().zip(onset) {
                let ip: f64 = (0..self.n)
                    .map(|i| if z.get(i) { -norm } else { norm } * amps[i].re)
                    .sum();
                *o *= ip;
            }
        }
        Ok(self.model.outcome_distribution(&overlaps))
    }

    pub fn run(&self, exec: &mut Exec, view: &OracleView<'_>) -> Result<bool> {
        let probs = self.measure_distribution(exec, view)?;
        let y = exec.decide(&probs);
        match self.model.onset().get(y) {
            None => Ok(false),
            Some(z) => grover_equality_test(exec, view, z, VERIFY_ERROR),
        }
    }

    fn notes(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("copies".to_string(), self.choice.copies.to_string()),
            ("copy_cap".to_string(), self.choice.cap.to_string()),
            ("kappa".to_string(), self.params.kappa.to_string()),
            ("c".to_string(), self.params.report_c.to_string()),
            ("max_overlap".to_string(), self.max_overlap.to_string()),
        ];
        if !self.overlap_check_passed() {
            v.push(("overlap_check".into(), "violated".into()));
        }
        if !self.choice.reached {
            v.push(("identify_target".into(), "not reached".into()));
        }
        v
    }

    pub fn evaluate(&self, x: BitString, seed: u64) -> Result<RunRecord> {
        let oracle = Oracle::phase(x);
        let mut exec = Exec::sampled(substream(seed, x.value()));
        let output = self.run(&mut exec, &oracle.view())?;
        let truth = self.f.eval(&x)?;
        Ok(RunRecord {
            algorithm: AlgorithmId::AverageCase,
            n: self.n,
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

    /// Exact success probability on `x`: the measurement's outcome
    /// distribution composed with the exact equality test.
    pub fn exact(&self, x: BitString) -> Result<ExactSummary> {
        let oracle = Oracle::phase(x);
        let view = oracle.view();
        let mut prep = Exec::sampled(substream(0, 0));
        let probs = self.measure_distribution(&mut prep, &view)?;
        let copies_queries = prep.queries();
        let mut p_one = 0.0;
        let mut verify_max = 0;
        let mut paths = 1;
        for (z, &p) in self.model.onset().iter().zip(&probs) {
            if p == 0.0 {
                continue;
            }
            let ps = exact_paths(|e| grover_equality_test(e, &view, z, VERIFY_ERROR))?;
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
            max_queries: copies_queries + verify_max,
            paths,
        })
    }
}

/// One sampled average-case run on `oracle`'s input.
pub fn average_case_evaluate(oracle: &Oracle, f: &BooleanFunction, seed: u64) -> Result<RunRecord> {
    AverageCasePlan::new(f)?.evaluate(oracle.reveal(), seed)
}
