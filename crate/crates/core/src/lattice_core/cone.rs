//! Search for dominant integral weights strictly inside an affine cone.
//!
//! Points are enumerated in gap coordinates `g[sigma][i] = k[i] - k[i+1]`
//! (with `g[sigma][n] = k[n]`), which turns dominance into nonnegativity.
//! The returned point minimises the total `sum_sigma k[sigma][1]`, ties broken
//! lexicographically in the order `k[.][n], k[.][n-1], ..., k[.][1]`
//! (embeddings in order inside each index).

use std::collections::HashSet;

use crate::lattice_core::weights::WeightTable;
use crate::scalar::Scalar;

/// Largest coordinate total explored by [`cone_find`].
pub const DEFAULT_RADIUS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("no dominant integral point with coordinate total <= {radius}")]
    EmptyCone { radius: u64 },
    #[error("constraint {index} has {got} coefficients, expected {expected}")]
    ShapeMismatch { index: usize, got: usize, expected: usize },
    #[error("constraint {index} has a bound outside the searchable range")]
    BoundOutOfRange { index: usize },
}

/// `sum coeffs * k > bound` and `sum coeffs * k - bound >= slack`.
///
/// Coefficients are indexed `sigma * rank + (i - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeConstraint<S> {
    pub coeffs: Vec<i64>,
    pub bound: S,
    pub slack: S,
}

impl<S: Scalar> ConeConstraint<S> {
    pub fn strict(coeffs: Vec<i64>, bound: S) -> Self {
        ConeConstraint { coeffs, bound, slack: S::zero() }
    }

    pub fn value(&self, weights: &WeightTable) -> i64 {
        let n = weights.rank();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * weights.k(idx / n, (idx % n + 1) as isize))
            .sum()
    }

    pub fn holds(&self, weights: &WeightTable) -> bool {
        let v = S::from_int(self.value(weights));
        v > self.bound && v - self.bound.clone() >= self.slack
    }

    /// Smallest integer value satisfying the constraint.
    fn threshold(&self) -> Option<i128> {
        let strict = self.bound.floor_i64()? as i128 + 1;
        let slacked = (self.bound.clone() + self.slack.clone()).ceil_i64()? as i128;
        Some(strict.max(slacked))
    }
}

#[derive(Debug, Clone)]
pub struct ConeQuery<S> {
    pub rank: usize,
    pub embeddings: usize,
    pub constraints: Vec<ConeConstraint<S>>,
    pub radius: u64,
}

/// Smallest dominant integral point strictly inside every form.
pub fn cone_find<S: Scalar>(
    forms: &[Vec<i64>],
    strict_bounds: &[S],
    rank: usize,
    embeddings: usize,
) -> Result<WeightTable, ConeError> {
    assert_eq!(forms.len(), strict_bounds.len(), "one bound per form");
    let constraints = forms
        .iter()
        .zip(strict_bounds)
        .map(|(f, b)| ConeConstraint::strict(f.clone(), b.clone()))
        .collect();
    cone_search(&ConeQuery { rank, embeddings, constraints, radius: DEFAULT_RADIUS })
}

struct Search {
    order: Vec<usize>,
    // per constraint, per coordinate (in storage order)
    d: Vec<Vec<i128>>,
    need: Vec<i128>,
    lb: Vec<i128>,
    suffix_lb: Vec<i128>,
    suffix_max_d: Vec<Vec<i128>>,
    suffix_d_lb: Vec<Vec<i128>>,
    // constraint c can only grow from position pos on
    monotone: Vec<Vec<bool>>,
    fixed: Vec<i128>,
    gaps: Vec<i128>,
    // (pos, budget, partial values) known to have no completion; the key
    // does not depend on the total, so it stays valid across totals
    dead: HashSet<(usize, i128, Vec<i128>)>,
}

impl Search {
    fn feasible(&self, pos: usize, budget: i128) -> bool {
        let len = self.order.len();
        if budget < self.suffix_lb[pos] {
            return false;
        }
        (0..self.need.len()).all(|c| {
            if pos == len {
                self.fixed[c] >= self.need[c]
            } else {
                let best = self.fixed[c]
                    + self.suffix_d_lb[c][pos]
                    + (budget - self.suffix_lb[pos]) * self.suffix_max_d[c][pos];
                best >= self.need[c]
            }
        }) && (pos < len || budget == 0)
    }

    fn key(&self, pos: usize, budget: i128) -> (usize, i128, Vec<i128>) {
        let vals = (0..self.need.len())
            .map(|c| if self.monotone[c][pos] { self.fixed[c].min(self.need[c]) } else { self.fixed[c] })
            .collect();
        (pos, budget, vals)
    }

    fn dfs(&mut self, pos: usize, budget: i128) -> bool {
        if pos == self.order.len() {
            return budget == 0;
        }
        let key = self.key(pos, budget);
        if self.dead.contains(&key) {
            return false;
        }
        let coord = self.order[pos];
        let hi = if pos + 1 == self.order.len() { budget } else { budget - self.suffix_lb[pos + 1] };
        let lo = if pos + 1 == self.order.len() { budget } else { self.lb[coord] };
        let mut v = lo;
        while v <= hi {
            for c in 0..self.need.len() {
                self.fixed[c] += self.d[c][coord] * v;
            }
            self.gaps[coord] = v;
            let ok = self.feasible(pos + 1, budget - v) && self.dfs(pos + 1, budget - v);
            for c in 0..self.need.len() {
                self.fixed[c] -= self.d[c][coord] * v;
            }
            if ok {
                return true;
            }
            v += 1;
        }
        self.dead.insert(key);
        false
    }
}

/// Cone search with explicit slacks and search radius.
pub fn cone_search<S: Scalar>(query: &ConeQuery<S>) -> Result<WeightTable, ConeError> {
    let (n, m) = (query.rank, query.embeddings.max(1));
    let dim = n * m;
    let mut need = Vec::with_capacity(query.constraints.len());
    let mut d = Vec::with_capacity(query.constraints.len());
    for (index, c) in query.constraints.iter().enumerate() {
        if c.coeffs.len() != dim {
            return Err(ConeError::ShapeMismatch { index, got: c.coeffs.len(), expected: dim });
        }
        need.push(c.threshold().ok_or(ConeError::BoundOutOfRange { index })?);
        let mut row = vec![0i128; dim];
        for s in 0..m {
            let mut acc = 0i128;
            for i in 0..n {
                acc += c.coeffs[s * n + i] as i128;
                row[s * n + i] = acc;
            }
        }
        d.push(row);
    }
    let empty = Err(ConeError::EmptyCone { radius: query.radius });

    // per-coordinate lower bounds from single-coordinate constraints
    let mut lb = vec![0i128; dim];
    for (c, row) in d.iter().enumerate() {
        let support: Vec<usize> = (0..dim).filter(|&j| row[j] != 0).collect();
        match support.as_slice() {
            [] if need[c] > 0 => return empty,
            [j] if row[*j] > 0 => lb[*j] = lb[*j].max(div_ceil(need[c], row[*j]).max(0)),
            _ => {}
        }
    }

    let mut order = Vec::with_capacity(dim);
    for i in (0..n).rev() {
        for s in 0..m {
            order.push(s * n + i);
        }
    }
    let mut suffix_lb = vec![0i128; dim + 1];
    for pos in (0..dim).rev() {
        suffix_lb[pos] = suffix_lb[pos + 1] + lb[order[pos]];
    }
    let mut suffix_max_d = vec![vec![i128::MIN; dim + 1]; d.len()];
    let mut suffix_d_lb = vec![vec![0i128; dim + 1]; d.len()];
    let mut monotone = vec![vec![true; dim + 1]; d.len()];
    for (c, row) in d.iter().enumerate() {
        for pos in (0..dim).rev() {
            let j = order[pos];
            monotone[c][pos] = monotone[c][pos + 1] && row[j] >= 0;
            suffix_max_d[c][pos] = suffix_max_d[c][pos + 1].max(row[j]);
            suffix_d_lb[c][pos] = suffix_d_lb[c][pos + 1] + row[j] * lb[j];
        }
    }

    // Each constraint alone is monotone in the total; intersect the ranges.
    let base = suffix_lb[0];
    let mut t_lo = base;
    let mut t_hi = query.radius as i128;
    if dim == 0 {
        t_hi = t_hi.min(0);
    }
    for c in 0..d.len() {
        if dim == 0 {
            if need[c] > 0 {
                return empty;
            }
            continue;
        }
        let at_base = suffix_d_lb[c][0];
        let slope = suffix_max_d[c][0];
        let deficit = need[c] - at_base;
        if slope > 0 {
            t_lo = t_lo.max(base + div_ceil(deficit, slope).max(0));
        } else if slope == 0 {
            if deficit > 0 {
                return empty;
            }
        } else if deficit > 0 {
            return empty;
        } else {
            t_hi = t_hi.min(base + (-deficit) / (-slope));
        }
    }

    let mut search = Search {
        order,
        d,
        need,
        lb,
        suffix_lb,
        suffix_max_d,
        suffix_d_lb,
        monotone,
        fixed: vec![0; query.constraints.len()],
        gaps: vec![0; dim],
        dead: HashSet::new(),
    };
    let mut total = t_lo;
    while total <= t_hi {
        if search.feasible(0, total) && search.dfs(0, total) {
            let gaps: Vec<Vec<i64>> = (0..m)
                .map(|s| (0..n).map(|i| search.gaps[s * n + i] as i64).collect())
                .collect();
            let table = if n == 0 {
                WeightTable::zero(0, m)
            } else {
                WeightTable::from_gaps(&gaps).expect("gap coordinates are nonnegative")
            };
            debug_assert!(query.constraints.iter().all(|c| c.holds(&table)));
            return Ok(table);
        }
        total += 1;
    }
    empty
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}
