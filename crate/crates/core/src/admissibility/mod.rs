//! Desk-scale filtered phi-modules: Newton and Hodge numbers, weak
//! admissibility, sub-module candidates and the alignment lemma.
//!
//! Indices are 0-based throughout this module.

mod scan;

use std::ops::ControlFlow;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::scalar::{scalar_str, Scalar};

pub use scan::{keylemma_scan, ScanError, ScanFinding, ScanGrid, ScanSummary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdmissibilityError {
    #[error("expected {expected} weight rows (e*f), got {got}")]
    EmbeddingCount { expected: usize, got: usize },
    #[error("weight row {sigma} has length {got}, expected rank {rank}")]
    RowLength { sigma: usize, got: usize, rank: usize },
    #[error("weight row {sigma} is not sorted ascending")]
    Unsorted { sigma: usize },
    #[error("e and f must be at least 1")]
    BadShape,
    #[error("slopes are not pairwise distinct")]
    NotDistinct,
    #[error("embedding index {0} out of range")]
    BadEmbedding(usize),
    #[error("invalid subset or assignment")]
    BadSubset,
}

/// Slopes of the linearised Frobenius and per-embedding Hodge-Tate weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PhiModuleDatum<S> {
    e: u32,
    f: u32,
    #[serde(with = "scalar_str::vec")]
    slopes: Vec<S>,
    weights: Vec<Vec<i64>>,
    distinct: bool,
}

impl<S: Scalar> PhiModuleDatum<S> {
    /// Validates shapes; the distinctness flag is computed from the slopes.
    pub fn new(e: u32, f: u32, slopes: Vec<S>, weights: Vec<Vec<i64>>) -> Result<Self, AdmissibilityError> {
        let mut d = Self::relaxed(e, f, slopes, weights)?;
        d.distinct = d.slopes.iter().all_unique();
        Ok(d)
    }

    /// Same validation, but the slopes are treated as distinct eigenvalues
    /// regardless of their valuations (the relaxed inequality system).
    pub fn relaxed(e: u32, f: u32, slopes: Vec<S>, weights: Vec<Vec<i64>>) -> Result<Self, AdmissibilityError> {
        if e == 0 || f == 0 {
            return Err(AdmissibilityError::BadShape);
        }
        let m = (e * f) as usize;
        if weights.len() != m {
            return Err(AdmissibilityError::EmbeddingCount { expected: m, got: weights.len() });
        }
        let rank = slopes.len();
        for (sigma, row) in weights.iter().enumerate() {
            if row.len() != rank {
                return Err(AdmissibilityError::RowLength { sigma, got: row.len(), rank });
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(AdmissibilityError::Unsorted { sigma });
            }
        }
        Ok(PhiModuleDatum { e, f, slopes, weights, distinct: true })
    }

    pub fn rank(&self) -> usize {
        self.slopes.len()
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn embeddings(&self) -> usize {
        self.weights.len()
    }

    pub fn slopes(&self) -> &[S] {
        &self.slopes
    }

    pub fn weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    /// `(1/e) sum_sigma kappa[sigma][j]`.
    pub fn weight_average(&self, j: usize) -> S {
        S::from_frac(self.weights.iter().map(|row| row[j]).sum(), self.e as i64)
    }
}

/// A sub-module `I` (eigenline span) with the per-embedding bijections
/// `theta[sigma]`, increasing on `I` and on its complement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubmoduleCandidate {
    pub subset: Vec<usize>,
    pub theta: Vec<Vec<usize>>,
}

impl SubmoduleCandidate {
    /// `theta[tau]` is the identity.
    pub fn is_identity_at(&self, tau: usize) -> bool {
        self.theta[tau].iter().enumerate().all(|(i, &t)| i == t)
    }

    /// `kappa[tau][theta(i)] = kappa[tau][i]` for every `i`; differs from
    /// [`Self::is_identity_at`] only when the row has repeated weights.
    pub fn is_aligned_at<S>(&self, datum: &PhiModuleDatum<S>, tau: usize) -> bool {
        let row = &datum.weights[tau];
        self.theta[tau].iter().enumerate().all(|(i, &t)| row[i] == row[t])
    }

    /// The complement with the same bijections.
    pub fn complement(&self) -> SubmoduleCandidate {
        let n = self.theta.first().map_or(0, Vec::len);
        SubmoduleCandidate {
            subset: (0..n).filter(|i| !self.subset.contains(i)).collect(),
            theta: self.theta.clone(),
        }
    }
}

fn check_subset(n: usize, subset: &[usize]) -> Result<(), AdmissibilityError> {
    if subset.iter().any(|&i| i >= n) || !subset.iter().all_unique() {
        return Err(AdmissibilityError::BadSubset);
    }
    Ok(())
}

pub fn newton_number<S: Scalar>(datum: &PhiModuleDatum<S>, subset: &[usize]) -> Result<S, AdmissibilityError> {
    check_subset(datum.rank(), subset)?;
    Ok(subset.iter().fold(S::zero(), |a, &i| a + datum.slopes[i].clone()))
}

pub fn hodge_number<S: Scalar>(
    datum: &PhiModuleDatum<S>,
    subset: &[usize],
    theta: &[Vec<usize>],
) -> Result<S, AdmissibilityError> {
    check_subset(datum.rank(), subset)?;
    if theta.len() != datum.embeddings() || theta.iter().any(|t| t.len() != datum.rank()) {
        return Err(AdmissibilityError::BadSubset);
    }
    let total: i64 = datum
        .weights
        .iter()
        .zip(theta)
        .map(|(row, t)| subset.iter().map(|&i| row[t[i]]).sum::<i64>())
        .sum();
    Ok(S::from_frac(total, datum.e as i64))
}

/// Sorted slope prefixes dominate the averaged weight prefixes, with
/// equality for the whole module.
pub fn newton_above_hodge<S: Scalar>(datum: &PhiModuleDatum<S>) -> bool {
    let mut sorted = datum.slopes.clone();
    sorted.sort();
    let mut newton = S::zero();
    let mut hodge = S::zero();
    for (j, s) in sorted.into_iter().enumerate() {
        newton = newton + s;
        hodge = hodge + datum.weight_average(j);
        if newton < hodge {
            return false;
        }
    }
    newton == hodge
}

struct Prefixes {
    members: Vec<usize>,
    // floor(e * prefix sums of slopes), for the subset and its complement
    cap_in: Vec<i64>,
    cap_out: Vec<i64>,
}

struct Enumerator<'a, S> {
    datum: &'a PhiModuleDatum<S>,
    combos: Vec<Vec<usize>>,
    // per embedding, per combo: prefix sums of weights on the combo and on its complement
    pre_in: Vec<Vec<Vec<i64>>>,
    pre_out: Vec<Vec<Vec<i64>>>,
    // per embedding, prefix sums of the smallest weights
    row_min: Vec<Vec<i64>>,
}

fn prefix(v: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut acc = 0;
    std::iter::once(0)
        .chain(v.map(|x| {
            acc += x;
            acc
        }))
        .collect()
}

impl<'a, S: Scalar> Enumerator<'a, S> {
    fn new(datum: &'a PhiModuleDatum<S>, size: usize) -> Self {
        let n = datum.rank();
        let combos: Vec<Vec<usize>> = (0..n).combinations(size).collect();
        let mut pre_in = Vec::new();
        let mut pre_out = Vec::new();
        let mut row_min = Vec::new();
        for row in &datum.weights {
            let mut pin = Vec::with_capacity(combos.len());
            let mut pout = Vec::with_capacity(combos.len());
            for c in &combos {
                pin.push(prefix(c.iter().map(|&j| row[j])));
                pout.push(prefix((0..n).filter(|j| !c.contains(j)).map(|j| row[j])));
            }
            pre_in.push(pin);
            pre_out.push(pout);
            row_min.push(prefix(row.iter().copied()));
        }
        Enumerator { datum, combos, pre_in, pre_out, row_min }
    }

    fn prefixes(&self, subset: &[usize]) -> Option<Prefixes> {
        let e = S::from_int(self.datum.e as i64);
        let caps = |idx: &mut dyn Iterator<Item = usize>| -> Option<Vec<i64>> {
            let mut acc = S::zero();
            let mut out = vec![0];
            for i in idx {
                acc = acc + self.datum.slopes[i].clone();
                out.push((acc.clone() * e.clone()).floor_i64()?);
            }
            Some(out)
        };
        let n = self.datum.rank();
        Some(Prefixes {
            members: subset.to_vec(),
            cap_in: caps(&mut subset.iter().copied())?,
            cap_out: caps(&mut (0..n).filter(|j| !subset.contains(j)))?,
        })
    }

    fn run(
        &self,
        p: &Prefixes,
        visit: &mut dyn FnMut(&SubmoduleCandidate) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let m = self.datum.embeddings();
        let size = p.members.len();
        let n = self.datum.rank();
        let mut acc_in = vec![0i64; size + 1];
        let mut acc_out = vec![0i64; n - size + 1];
        let mut rest_in = vec![0i64; size + 1];
        let mut rest_out = vec![0i64; n - size + 1];
        for s in 0..m {
            for x in 0..=size {
                rest_in[x] += self.row_min[s][x];
            }
            for x in 0..=n - size {
                rest_out[x] += self.row_min[s][x];
            }
        }
        let mut choice = vec![0usize; m];
        self.dfs(0, p, &mut choice, &mut acc_in, &mut acc_out, &mut rest_in, &mut rest_out, visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        sigma: usize,
        p: &Prefixes,
        choice: &mut Vec<usize>,
        acc_in: &mut [i64],
        acc_out: &mut [i64],
        rest_in: &mut [i64],
        rest_out: &mut [i64],
        visit: &mut dyn FnMut(&SubmoduleCandidate) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let m = self.datum.embeddings();
        if sigma == m {
            let cand = self.candidate(p, choice);
            return visit(&cand);
        }
        for x in 0..acc_in.len() {
            rest_in[x] -= self.row_min[sigma][x];
        }
        for x in 0..acc_out.len() {
            rest_out[x] -= self.row_min[sigma][x];
        }
        let mut flow = ControlFlow::Continue(());
        for c in 0..self.combos.len() {
            let pin = &self.pre_in[sigma][c];
            let pout = &self.pre_out[sigma][c];
            let ok_in = (1..acc_in.len()).all(|x| acc_in[x] + pin[x] + rest_in[x] <= p.cap_in[x]);
            let ok_out = (1..acc_out.len()).all(|x| acc_out[x] + pout[x] + rest_out[x] <= p.cap_out[x]);
            if !(ok_in && ok_out) {
                continue;
            }
            for x in 0..acc_in.len() {
                acc_in[x] += pin[x];
            }
            for x in 0..acc_out.len() {
                acc_out[x] += pout[x];
            }
            choice[sigma] = c;
            flow = self.dfs(sigma + 1, p, choice, acc_in, acc_out, rest_in, rest_out, visit);
            for x in 0..acc_in.len() {
                acc_in[x] -= pin[x];
            }
            for x in 0..acc_out.len() {
                acc_out[x] -= pout[x];
            }
            if flow.is_break() {
                break;
            }
        }
        for x in 0..acc_in.len() {
            rest_in[x] += self.row_min[sigma][x];
        }
        for x in 0..acc_out.len() {
            rest_out[x] += self.row_min[sigma][x];
        }
        flow
    }

    fn candidate(&self, p: &Prefixes, choice: &[usize]) -> SubmoduleCandidate {
        let n = self.datum.rank();
        let outside: Vec<usize> = (0..n).filter(|j| !p.members.contains(j)).collect();
        let theta = choice
            .iter()
            .map(|&c| {
                let image = &self.combos[c];
                let image_out: Vec<usize> = (0..n).filter(|j| !image.contains(j)).collect();
                let mut t = vec![0; n];
                for (a, b) in p.members.iter().zip(image) {
                    t[*a] = *b;
                }
                for (a, b) in outside.iter().zip(&image_out) {
                    t[*a] = *b;
                }
                t
            })
            .collect();
        SubmoduleCandidate { subset: p.members.clone(), theta }
    }
}

fn full_equality<S: Scalar>(datum: &PhiModuleDatum<S>) -> bool {
    let newton = datum.slopes.iter().fold(S::zero(), |a, b| a + b.clone());
    let hodge = (0..datum.rank()).fold(S::zero(), |a, j| a + datum.weight_average(j));
    newton == hodge
}

/// Visit every admissible candidate in the documented order: subsets by size
/// then lexicographically, then per-embedding images lexicographically with
/// embedding 0 outermost.
pub fn for_each_candidate<S: Scalar>(
    datum: &PhiModuleDatum<S>,
    mut visit: impl FnMut(&SubmoduleCandidate) -> ControlFlow<()>,
) -> Result<(), AdmissibilityError> {
    if !datum.distinct {
        return Err(AdmissibilityError::NotDistinct);
    }
    let n = datum.rank();
    if n < 2 || !full_equality(datum) {
        return Ok(());
    }
    for size in 1..n {
        let en = Enumerator::new(datum, size);
        for subset in (0..n).combinations(size) {
            // slopes too large for i64 cannot be met by integer weights anyway
            let Some(p) = en.prefixes(&subset) else { continue };
            if en.run(&p, &mut visit).is_break() {
                return Ok(());
            }
        }
    }
    Ok(())
}

pub fn admissible_candidates<S: Scalar>(datum: &PhiModuleDatum<S>) -> Result<Vec<SubmoduleCandidate>, AdmissibilityError> {
    let mut out = Vec::new();
    for_each_candidate(datum, |c| {
        out.push(c.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Which deviation band is required before enumerating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hypothesis<S> {
    /// `|dev_i| <= min_gap(tau) / (e N)`.
    Standard,
    /// The standard band multiplied by a factor.
    Scaled(S),
    /// No band at all.
    Waived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case", bound = "S: Scalar")]
pub enum AlignmentOutcome<S> {
    /// Every candidate is the identity at `tau`. `bound` is `None` when the
    /// band is unbounded (rank 1, or hypothesis waived).
    Certified {
        #[serde(with = "scalar_str::opt")]
        bound: Option<S>,
        #[serde(with = "scalar_str")]
        max_deviation: S,
    },
    /// `slack = bound - |dev_index|`, negative.
    HypothesisFailed {
        index: usize,
        #[serde(with = "scalar_str")]
        slack: S,
    },
    CounterExample { candidate: SubmoduleCandidate },
}

impl<S> AlignmentOutcome<S> {
    pub fn is_certified(&self) -> bool {
        matches!(self, AlignmentOutcome::Certified { .. })
    }
}

/// The deviation band `min_gap(tau) / (e N)`; `None` when rank < 2.
pub fn hypothesis_bound<S: Scalar>(datum: &PhiModuleDatum<S>, tau: usize) -> Option<S> {
    let row = &datum.weights[tau];
    let gap = row.windows(2).map(|w| w[1] - w[0]).min()?;
    Some(S::from_frac(gap, datum.e as i64 * datum.rank() as i64))
}

/// Largest `|slope_i - (1/e) sum_sigma kappa[sigma][i]|`.
pub fn max_deviation<S: Scalar>(datum: &PhiModuleDatum<S>) -> S {
    (0..datum.rank())
        .map(|i| (datum.slopes[i].clone() - datum.weight_average(i)).abs())
        .max()
        .unwrap_or_else(S::zero)
}

pub fn alignment_check<S: Scalar>(datum: &PhiModuleDatum<S>, tau: usize) -> Result<AlignmentOutcome<S>, AdmissibilityError> {
    alignment_check_with(datum, tau, &Hypothesis::Standard)
}

pub fn alignment_check_with<S: Scalar>(
    datum: &PhiModuleDatum<S>,
    tau: usize,
    hypothesis: &Hypothesis<S>,
) -> Result<AlignmentOutcome<S>, AdmissibilityError> {
    if tau >= datum.embeddings() {
        return Err(AdmissibilityError::BadEmbedding(tau));
    }
    if !datum.distinct {
        return Err(AdmissibilityError::NotDistinct);
    }
    let bound = match hypothesis {
        Hypothesis::Standard => hypothesis_bound(datum, tau),
        Hypothesis::Scaled(k) => hypothesis_bound(datum, tau).map(|b| b * k.clone()),
        Hypothesis::Waived => None,
    };
    if let Some(b) = &bound {
        for i in 0..datum.rank() {
            let dev = (datum.slopes[i].clone() - datum.weight_average(i)).abs();
            if dev > *b {
                return Ok(AlignmentOutcome::HypothesisFailed { index: i, slack: b.clone() - dev });
            }
        }
    }
    let mut found = None;
    for_each_candidate(datum, |c| {
        if c.is_aligned_at(datum, tau) {
            ControlFlow::Continue(())
        } else {
            found = Some(c.clone());
            ControlFlow::Break(())
        }
    })?;
    Ok(match found {
        Some(candidate) => AlignmentOutcome::CounterExample { candidate },
        None => AlignmentOutcome::Certified { bound, max_deviation: max_deviation(datum) },
    })
}
