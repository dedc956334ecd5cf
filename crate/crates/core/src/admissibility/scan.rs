//! Exhaustive scan of the alignment lemma over a finite grid of data.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{alignment_check_with, AlignmentOutcome, Hypothesis, PhiModuleDatum, SubmoduleCandidate};
use crate::scalar::{scalar_str, Scalar};

/// Grid of `PhiModuleDatum`s: ranks `1..=max_rank`, the listed `(e, f)`
/// pairs, weight rows sorted from `weight_min..=weight_max`, and slopes on
/// the `(1/e)` lattice inside `band_factor` times the hypothesis band.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScanGrid<S> {
    pub max_rank: usize,
    pub ef: Vec<(u32, u32)>,
    pub weight_min: i64,
    pub weight_max: i64,
    #[serde(with = "scalar_str")]
    pub band_factor: S,
    /// Weight rows vary independently per embedding; otherwise every
    /// embedding carries the same row.
    pub independent_rows: bool,
    /// Refuse grids with more checks than this.
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScanFinding<S> {
    pub datum: PhiModuleDatum<S>,
    pub tau: usize,
    pub candidate: SubmoduleCandidate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScanSummary<S> {
    pub checks: u64,
    pub skipped_not_distinct: u64,
    pub certified: u64,
    pub hypothesis_failed: u64,
    pub counterexamples: u64,
    /// The first few misaligned findings in scan order.
    pub findings: Vec<ScanFinding<S>>,
}

impl<S> Default for ScanSummary<S> {
    fn default() -> Self {
        ScanSummary { checks: 0, skipped_not_distinct: 0, certified: 0, hypothesis_failed: 0, counterexamples: 0, findings: Vec::new() }
    }
}

const KEPT_FINDINGS: usize = 8;

impl<S> ScanSummary<S> {
    fn merge(mut self, other: ScanSummary<S>) -> Self {
        self.checks += other.checks;
        self.skipped_not_distinct += other.skipped_not_distinct;
        self.certified += other.certified;
        self.hypothesis_failed += other.hypothesis_failed;
        self.counterexamples += other.counterexamples;
        for f in other.findings {
            if self.findings.len() < KEPT_FINDINGS {
                self.findings.push(f);
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("grid has {size} checks, above the cap of {cap}")]
    GridTooLarge { size: u64, cap: u64 },
    #[error("invalid grid: {0}")]
    Invalid(String),
}

struct Shard {
    e: u32,
    f: u32,
    rows: Vec<Vec<i64>>,
}

impl Shard {
    fn rank(&self) -> usize {
        self.rows[0].len()
    }

    fn taus(&self) -> Vec<usize> {
        // identical rows give identical checks
        let mut seen: Vec<&Vec<i64>> = Vec::new();
        let mut out = Vec::new();
        for (t, row) in self.rows.iter().enumerate() {
            if !seen.contains(&row) {
                seen.push(row);
                out.push(t);
            }
        }
        out
    }

    /// Largest `t` with `|t / e|` inside the band for `tau`.
    fn reach<S: Scalar>(&self, tau: usize, factor: &S) -> i64 {
        let n = self.rank() as i64;
        if n < 2 {
            return 0;
        }
        let gap = self.rows[tau].windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
        // e * factor * gap / (e n)
        (factor.clone() * S::from_frac(gap, n)).floor_i64().unwrap_or(0).max(0)
    }

    fn size<S: Scalar>(&self, factor: &S) -> u64 {
        self.taus()
            .into_iter()
            .map(|t| (2 * self.reach(t, factor) as u64 + 1).saturating_pow(self.rank() as u32))
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    fn run<S: Scalar>(&self, factor: &S) -> ScanSummary<S> {
        let n = self.rank();
        let e = self.e as i64;
        let center: Vec<i64> = (0..n).map(|j| self.rows.iter().map(|r| r[j]).sum()).collect();
        let hypothesis = Hypothesis::Scaled(factor.clone());
        let mut summary = ScanSummary::default();
        for tau in self.taus() {
            let reach = self.reach(tau, factor);
            for shift in (0..n).map(|_| -reach..=reach).multi_cartesian_product() {
                summary.checks += 1;
                // slope_j = center_j / e + t_j / e
                let slopes: Vec<S> = center.iter().zip(&shift).map(|(c, t)| S::from_frac(c + t, e)).collect();
                let datum = PhiModuleDatum::new(self.e, self.f, slopes, self.rows.clone()).expect("grid data are well formed");
                if !datum.is_distinct() {
                    summary.skipped_not_distinct += 1;
                    continue;
                }
                match alignment_check_with(&datum, tau, &hypothesis).expect("distinct data") {
                    AlignmentOutcome::Certified { .. } => summary.certified += 1,
                    AlignmentOutcome::HypothesisFailed { .. } => summary.hypothesis_failed += 1,
                    AlignmentOutcome::CounterExample { candidate } => {
                        summary.counterexamples += 1;
                        if summary.findings.len() < KEPT_FINDINGS {
                            summary.findings.push(ScanFinding { datum, tau, candidate });
                        }
                    }
                }
            }
        }
        summary
    }
}

fn shards<S: Scalar>(grid: &ScanGrid<S>) -> Vec<Shard> {
    let mut out = Vec::new();
    for &(e, f) in &grid.ef {
        let m = (e * f) as usize;
        for n in 1..=grid.max_rank {
            let rows: Vec<Vec<i64>> = (grid.weight_min..=grid.weight_max).combinations_with_replacement(n).collect();
            if grid.independent_rows {
                for pick in (0..rows.len()).combinations_with_replacement(m) {
                    out.push(Shard { e, f, rows: pick.iter().map(|&i| rows[i].clone()).collect() });
                }
            } else {
                for row in &rows {
                    out.push(Shard { e, f, rows: vec![row.clone(); m] });
                }
            }
        }
    }
    out
}

/// Run the alignment check on every datum of the grid, in parallel over
/// weight shards; the summary does not depend on the thread count.
pub fn keylemma_scan<S: Scalar>(grid: &ScanGrid<S>) -> Result<ScanSummary<S>, ScanError> {
    if grid.ef.iter().any(|&(e, f)| e == 0 || f == 0) {
        return Err(ScanError::Invalid("e and f must be at least 1".into()));
    }
    if grid.band_factor.is_negative() {
        return Err(ScanError::Invalid("band factor must be nonnegative".into()));
    }
    let shards = shards(grid);
    let size = shards.iter().fold(0u64, |a, s| a.saturating_add(s.size(&grid.band_factor)));
    if size > grid.cap {
        return Err(ScanError::GridTooLarge { size, cap: grid.cap });
    }
    let parts: Vec<ScanSummary<S>> = shards.par_iter().map(|s| s.run(&grid.band_factor)).collect();
    Ok(parts.into_iter().fold(ScanSummary::default(), ScanSummary::merge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::SmallRat;

    fn grid(max_rank: usize, lo: i64, hi: i64, factor: i64) -> ScanGrid<SmallRat> {
        ScanGrid {
            max_rank,
            ef: vec![(1, 1), (1, 2), (2, 1)],
            weight_min: lo,
            weight_max: hi,
            band_factor: SmallRat::from_int(factor),
            independent_rows: false,
            cap: 1_000_000,
        }
    }

    #[test]
    fn small_scan_is_clean() {
        let s = keylemma_scan(&grid(3, -2, 2, 1)).unwrap();
        assert_eq!(s.counterexamples, 0);
        assert_eq!(s.hypothesis_failed, 0);
        assert!(s.certified > 0);
    }

    #[test]
    fn doubled_band_finds_misalignment() {
        let s = keylemma_scan(&grid(3, -2, 2, 2)).unwrap();
        assert!(s.counterexamples > 0);
        let f = &s.findings[0];
        assert!(!f.candidate.is_aligned_at(&f.datum, f.tau));
    }

    #[test]
    fn empty_grid_and_cap() {
        let mut g = grid(3, -2, 2, 1);
        g.ef.clear();
        assert_eq!(keylemma_scan(&g).unwrap(), ScanSummary::default());
        let mut g = grid(3, -2, 2, 1);
        g.cap = 3;
        assert!(matches!(keylemma_scan(&g), Err(ScanError::GridTooLarge { .. })));
    }

    #[test]
    fn independent_rows_small() {
        let mut g = grid(3, -2, 2, 1);
        g.ef = vec![(1, 2), (2, 1)];
        g.independent_rows = true;
        let s = keylemma_scan(&g).unwrap();
        assert_eq!(s.counterexamples, 0, "{:?}", s.findings);
        assert!(s.certified > 0);
    }
}
