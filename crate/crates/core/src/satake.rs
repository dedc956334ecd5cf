//! Dictionary between refinement slopes, Frobenius slopes and Hodge-Tate
//! weights, Weyl refinement moves and the small-slope classicality test.
//!
//! Conventions for a torus of rank `r` (schema C: `r = n`, schema D: `r = 2n`):
//! the refinement slope attached to the Satake entry `y_i` has index
//! `(r+1)·sign(i) - i`, and its q-power is `c·sign(i) - i` with `c = r + 1`
//! for C and `c = r` for D.

use serde::{Deserialize, Serialize};

use crate::lattice_core::{LocalDatum, SignedPerm, WeightTable, WeylType};
use crate::scalar::{scalar_str, Scalar};

/// Schema of the Satake parameter: C for `Sp_2n` (standard rep of rank
/// `2n+1`), D for `SO_4n` (rank `4n`).
pub type Schema = WeylType;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatakeError {
    #[error("rank mismatch: weights have rank {weights}, slopes have rank {slopes}")]
    RankMismatch { weights: usize, slopes: usize },
    #[error("weights have {got} embeddings, the place has {expected}")]
    EmbeddingMismatch { got: usize, expected: usize },
    #[error("Weyl element has rank {got}, expected {expected}")]
    WeylRankMismatch { got: usize, expected: usize },
    #[error("{groups} root groups but {slopes} slopes")]
    GroupCountMismatch { groups: usize, slopes: usize },
}

/// Valuations `v_p(phi_i)` for `i = 1..=r` at one place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent, bound = "S: Scalar")]
pub struct RefinedSlopes<S> {
    #[serde(with = "scalar_str::vec")]
    values: Vec<S>,
}

impl<S: Scalar> RefinedSlopes<S> {
    pub fn new(values: Vec<S>) -> Self {
        RefinedSlopes { values }
    }

    pub fn zero(rank: usize) -> Self {
        RefinedSlopes { values: vec![S::zero(); rank] }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `phi[j]` with `phi[-j] = -phi[j]` and `phi[0] = 0`.
    pub fn get(&self, j: i64) -> S {
        match j.signum() {
            0 => S::zero(),
            1 => self.values[j as usize - 1].clone(),
            _ => -self.values[(-j) as usize - 1].clone(),
        }
    }

    pub fn total(&self) -> S {
        self.values.iter().fold(S::zero(), |a, b| a + b.clone())
    }
}

/// Sorted multiset of Frobenius slopes; closed under negation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent, bound = "S: Scalar")]
pub struct SatakeSlopeMultiset<S> {
    #[serde(with = "scalar_str::vec")]
    values: Vec<S>,
}

impl<S: Scalar> SatakeSlopeMultiset<S> {
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn is_negation_closed(&self) -> bool {
        let mut neg: Vec<S> = self.values.iter().map(|v| -v.clone()).collect();
        neg.sort();
        neg == self.values
    }
}

/// How [`change_refinement`] derives the new exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementConvention {
    /// Permute the Satake multiset; Frobenius slopes are preserved exactly.
    #[default]
    Invariant,
    /// The alternative exponent `i - w(i) + c·(sign(i) - sign(w(i)))`,
    /// which differs from `Invariant` only when `w` changes signs.
    PaperSign,
}

pub(crate) fn rho_constant(schema: Schema, r: usize) -> i64 {
    match schema {
        WeylType::C => r as i64 + 1,
        WeylType::D => r as i64,
    }
}

/// Index of the refinement slope paired with `y_i`.
pub fn phi_index(r: usize, i: i64) -> i64 {
    (r as i64 + 1) * i.signum() - i
}

/// Power of `q` in `y_i`.
pub fn rho_exponent(schema: Schema, r: usize, i: i64) -> i64 {
    rho_constant(schema, r) * i.signum() - i
}

/// `(1/e) sum_sigma k[sigma][i]`, signed index.
pub fn weight_average<S: Scalar>(local: &LocalDatum, weights: &WeightTable, i: i64) -> S {
    S::from_frac(weights.column_sum(i as isize), local.e() as i64)
}

fn check_shapes<S: Scalar>(
    local: &LocalDatum,
    weights: &WeightTable,
    phi: &RefinedSlopes<S>,
) -> Result<(), SatakeError> {
    if weights.embeddings() != local.embeddings() {
        return Err(SatakeError::EmbeddingMismatch { got: weights.embeddings(), expected: local.embeddings() });
    }
    if weights.rank() != phi.rank() {
        return Err(SatakeError::RankMismatch { weights: weights.rank(), slopes: phi.rank() });
    }
    Ok(())
}

/// `v_p(y_i)` for `i` in `-r..=r`, `i != 0`.
pub fn y_valuation<S: Scalar>(
    local: &LocalDatum,
    weights: &WeightTable,
    phi: &RefinedSlopes<S>,
    schema: Schema,
    i: i64,
) -> S {
    let r = phi.rank();
    S::from_int(rho_exponent(schema, r, i) * local.f() as i64)
        + phi.get(phi_index(r, i))
        + weight_average(local, weights, i)
}

pub fn frobenius_slopes<S: Scalar>(
    local: &LocalDatum,
    weights: &WeightTable,
    phi: &RefinedSlopes<S>,
    schema: Schema,
) -> Result<SatakeSlopeMultiset<S>, SatakeError> {
    check_shapes(local, weights, phi)?;
    let r = phi.rank() as i64;
    let mut values: Vec<S> = (1..=r)
        .flat_map(|i| {
            let v = y_valuation(local, weights, phi, schema, i);
            [-v.clone(), v]
        })
        .collect();
    if schema == WeylType::C {
        values.push(S::zero());
    }
    values.sort();
    Ok(SatakeSlopeMultiset { values })
}

/// Hodge-Tate weights per embedding, ascending.
pub fn hodge_tate_weights(weights: &WeightTable, schema: Schema) -> Vec<Vec<i64>> {
    let r = weights.rank();
    let shift = |i: usize| match schema {
        WeylType::C => (r + 1 - i) as i64,
        WeylType::D => (r - i) as i64,
    };
    (0..weights.embeddings())
        .map(|s| {
            let mut row: Vec<i64> = (1..=r)
                .flat_map(|i| {
                    let h = weights.k(s, i as isize) + shift(i);
                    [h, -h]
                })
                .collect();
            if schema == WeylType::C {
                row.push(0);
            }
            row.sort();
            row
        })
        .collect()
}

/// Refinement slopes of the point obtained by moving the refinement by `w`,
/// keeping weights and the underlying representation.
pub fn change_refinement<S: Scalar>(
    w: &SignedPerm,
    local: &LocalDatum,
    weights: &WeightTable,
    phi: &RefinedSlopes<S>,
    convention: RefinementConvention,
) -> Result<RefinedSlopes<S>, SatakeError> {
    check_shapes(local, weights, phi)?;
    let r = phi.rank();
    if w.rank() != r {
        return Err(SatakeError::WeylRankMismatch { got: w.rank(), expected: r });
    }
    let schema = w.kind();
    let f = local.f() as i64;
    let c = rho_constant(schema, r);
    let mut values = vec![S::zero(); r];
    for i in 1..=r as i64 {
        let wi = w.apply(i);
        let v = match convention {
            RefinementConvention::Invariant => {
                y_valuation(local, weights, phi, schema, wi)
                    - S::from_int(rho_exponent(schema, r, i) * f)
                    - weight_average(local, weights, i)
            }
            RefinementConvention::PaperSign => {
                let exp = i - wi + c * (i.signum() - wi.signum());
                phi.get(phi_index(r, wi)) + S::from_int(exp * f) + weight_average(local, weights, wi)
                    - weight_average(local, weights, i)
            }
        };
        values[phi_index(r, i) as usize - 1] = v;
    }
    Ok(RefinedSlopes { values })
}

/// `mu_i < inf_{alpha in groups[i]} -(1 + n_alpha)·v(alpha(eta_i))` for every `i`;
/// an empty group imposes nothing.
pub fn classicality_general<S: Scalar>(groups: &[Vec<(u64, S)>], mu: &[S]) -> Result<bool, SatakeError> {
    if groups.len() != mu.len() {
        return Err(SatakeError::GroupCountMismatch { groups: groups.len(), slopes: mu.len() });
    }
    Ok(groups.iter().zip(mu).all(|(group, m)| {
        group
            .iter()
            .all(|(n_alpha, v)| *m < -(S::from_int(1 + *n_alpha as i64) * v.clone()))
    }))
}

/// Small-slope classicality for `Sp_2n` at one place:
/// `mu_i < (1/e) min_sigma (1 + k_i - k_{i+1})` for `i < n` and
/// `mu_n < (1/e) min_sigma (2 + 2 k_n)`.
pub fn classicality_sp<S: Scalar>(
    local: &LocalDatum,
    weights: &WeightTable,
    mu: &[S],
) -> Result<bool, SatakeError> {
    let n = weights.rank();
    if mu.len() != n {
        return Err(SatakeError::RankMismatch { weights: n, slopes: mu.len() });
    }
    if weights.embeddings() != local.embeddings() {
        return Err(SatakeError::EmbeddingMismatch { got: weights.embeddings(), expected: local.embeddings() });
    }
    let e = local.e() as i64;
    Ok((1..=n).all(|i| {
        let bound = (0..weights.embeddings())
            .map(|s| {
                if i < n {
                    1 + weights.k(s, i as isize) - weights.k(s, i as isize + 1)
                } else {
                    2 + 2 * weights.k(s, n as isize)
                }
            })
            .min()
            .expect("at least one embedding");
        mu[i - 1] < S::from_frac(bound, e)
    }))
}
