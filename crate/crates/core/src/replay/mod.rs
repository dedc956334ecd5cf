//! Replay of the three-step weight deformation at concrete parameters,
//! ending in a certificate that only trivial (or Artin) splittings remain.
//!
//! Per place: pick `k1` (step 1), move the refinement by `-1`, reuse the
//! slopes at a nearby point with weights `k2` (step 2), move by the shift
//! cycle, reuse again with weights `k3` (step 3), check the alignment
//! hypothesis, then enumerate splittings of the normalized slopes.

mod splittings;
mod verify;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::admissibility::{alignment_check, AlignmentOutcome, PhiModuleDatum};
use crate::lattice_core::{
    cone_search, minus_identity, shift_cycle, ConeConstraint, ConeQuery, LocalDatum, SignedPerm, WeightTable, WeylType,
    DEFAULT_RADIUS,
};
use crate::satake::{change_refinement, hodge_tate_weights, rho_constant, y_valuation, RefinedSlopes, RefinementConvention};
use crate::scalar::{scalar_str, Rat, Scalar};

pub use splittings::{certify_splittings, NormalizedSlopes, Verdict};
pub use verify::{verify_certificate, VerifyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayOptions {
    /// Largest `sum_sigma k[sigma][1]` explored by each cone search.
    pub radius: u64,
    pub convention: RefinementConvention,
    /// Take the smallest regular `k1` without the step-1 inequality.
    pub skip_step1: bool,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions { radius: DEFAULT_RADIUS, convention: RefinementConvention::Invariant, skip_step1: false }
    }
}

/// `lhs > rhs`, `margin = lhs - rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    #[serde(with = "scalar_str")]
    pub lhs: Rat,
    #[serde(with = "scalar_str")]
    pub rhs: Rat,
    #[serde(with = "scalar_str")]
    pub margin: Rat,
}

impl Inequality {
    fn new(label: String, lhs: Rat, rhs: Rat) -> Self {
        let margin = lhs.clone() - rhs.clone();
        Inequality { label, lhs, rhs, margin }
    }

    pub fn holds(&self) -> bool {
        self.margin.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub tau: usize,
    #[serde(with = "scalar_str")]
    pub bound: Rat,
    #[serde(with = "scalar_str")]
    pub max_deviation: Rat,
    #[serde(with = "scalar_str")]
    pub margin: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceRecord {
    pub local: LocalDatum,
    pub seed: RefinedSlopes<Rat>,
    pub k1: WeightTable,
    pub x1_prime: RefinedSlopes<Rat>,
    pub k2: WeightTable,
    pub x2_prime: RefinedSlopes<Rat>,
    pub k3: WeightTable,
    pub step1: Option<Inequality>,
    pub step2: Vec<Inequality>,
    pub step3: Vec<Inequality>,
    pub hypothesis: Vec<HypothesisRecord>,
    pub nu: NormalizedSlopes<Rat>,
    pub survivors: Vec<Vec<i64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: WeylType,
    pub rank: usize,
    pub convention: RefinementConvention,
    pub skip_step1: bool,
    pub places: Vec<PlaceRecord>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn has_expected_verdict(&self) -> bool {
        self.verdict == Verdict::expected(self.schema)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("step {step} failed at place {place}: {reason}")]
    StepFailed { step: u8, place: usize, reason: String },
    #[error("alignment hypothesis not certified at place {place}, embedding {tau}")]
    AlignmentFailed { place: usize, tau: usize },
    #[error("verdict {:?} differs from the expected one", certificate.verdict)]
    VerdictFailed { certificate: Box<Certificate>, survivors: Vec<Vec<i64>> },
}

/// Coefficient vector of `sum_sigma (k[sigma][i] - k[sigma][i+1])`
/// (`k[sigma][r+1] = 0`), over all embeddings or only one.
fn gap_form(r: usize, m: usize, i: usize, only: Option<usize>) -> Vec<i64> {
    let mut c = vec![0; r * m];
    for s in 0..m {
        if only.is_some_and(|t| t != s) {
            continue;
        }
        c[s * r + i - 1] += 1;
        if i < r {
            c[s * r + i] -= 1;
        }
    }
    c
}

fn regularity(r: usize, m: usize) -> Vec<ConeConstraint<Rat>> {
    (0..m)
        .flat_map(|s| (1..=r).map(move |i| ConeConstraint::strict(gap_form(r, m, i, Some(s)), Rat::from_int(0))))
        .collect()
}

fn gap_value(k: &WeightTable, s: usize, i: usize) -> i64 {
    k.gaps(s)[i - 1]
}

/// `(2/e) sum k1 > -P + f (r(r+1) + 2 c r)`.
pub(crate) fn step1_inequality(schema: WeylType, local: &LocalDatum, seed: &RefinedSlopes<Rat>, k1: &WeightTable) -> Inequality {
    let r = seed.rank() as i64;
    let e = local.e() as i64;
    let total: i64 = (0..k1.embeddings()).flat_map(|s| (1..=r).map(move |i| (s, i))).map(|(s, i)| k1.k(s, i as isize)).sum();
    let c = rho_constant(schema, r as usize);
    let rhs = -seed.total() + Rat::from_int(local.f() as i64 * (r * (r + 1) + 2 * c * r));
    Inequality::new("step 1".into(), Rat::from_frac(2 * total, e), rhs)
}

/// For `m = 1..r-1`: `(1/e) sum_sigma (k_{r-m} - k_{r-m+1}) > -phi[m+1] - f`.
pub(crate) fn step2_inequalities(local: &LocalDatum, x2: &RefinedSlopes<Rat>, k2: &WeightTable) -> Vec<Inequality> {
    let r = x2.rank();
    let e = local.e() as i64;
    (1..r)
        .map(|m| {
            let i = r - m;
            let lhs: i64 = (0..k2.embeddings()).map(|s| gap_value(k2, s, i)).sum();
            let rhs = -x2.values()[m].clone() - Rat::from_int(local.f() as i64);
            Inequality::new(format!("step 2, m = {m}"), Rat::from_frac(lhs, e), rhs)
        })
        .collect()
}

fn ambient_rank(schema: WeylType, r: usize) -> i64 {
    match schema {
        WeylType::C => 2 * r as i64 + 1,
        WeylType::D => 2 * r as i64,
    }
}

fn step3_bound(x3: &RefinedSlopes<Rat>) -> Rat {
    x3.values().iter().map(|v| v.abs()).max().unwrap_or_else(|| Rat::from_int(0)).max(Rat::from_int(0))
}

/// Per embedding and gap: `gap / (e N) > max(0, |phi_i|)`.
pub(crate) fn step3_inequalities(schema: WeylType, local: &LocalDatum, x3: &RefinedSlopes<Rat>, k3: &WeightTable) -> Vec<Inequality> {
    let r = x3.rank();
    let scale = local.e() as i64 * ambient_rank(schema, r);
    let bound = step3_bound(x3);
    (0..k3.embeddings())
        .flat_map(|s| (1..=r).map(move |i| (s, i)))
        .map(|(s, i)| Inequality::new(format!("step 3, tau = {s}, gap {i}"), Rat::from_frac(gap_value(k3, s, i), scale), bound.clone()))
        .collect()
}

/// `lhs > rhs` with `lhs = coeffs . k / scale`, margin at least 1.
fn constraint(coeffs: Vec<i64>, scale: i64, rhs: &Rat) -> ConeConstraint<Rat> {
    let s = Rat::from_int(scale);
    ConeConstraint { coeffs, bound: rhs.clone() * s.clone(), slack: s }
}

/// Phi-module datum at a point: slopes `v(y_i)` against the Hodge-Tate
/// weights in ascending order.
pub fn point_datum(
    schema: WeylType,
    local: &LocalDatum,
    weights: &WeightTable,
    phi: &RefinedSlopes<Rat>,
) -> PhiModuleDatum<Rat> {
    let r = phi.rank() as i64;
    let mut order: Vec<i64> = (1..=r).map(|i| -i).collect();
    if schema == WeylType::C {
        order.push(0);
    }
    order.extend((1..=r).rev());
    let slopes = order
        .iter()
        .map(|&i| if i == 0 { Rat::from_int(0) } else { y_valuation(local, weights, phi, schema, i) })
        .collect();
    PhiModuleDatum::relaxed(local.e(), local.f(), slopes, hodge_tate_weights(weights, schema)).expect("shapes agree")
}

pub(crate) fn hypothesis_records(datum: &PhiModuleDatum<Rat>) -> Result<Vec<HypothesisRecord>, usize> {
    (0..datum.embeddings())
        .map(|tau| match alignment_check(datum, tau).expect("valid datum") {
            AlignmentOutcome::Certified { bound: Some(bound), max_deviation } => Ok(HypothesisRecord {
                tau,
                margin: bound.clone() - max_deviation.clone(),
                bound,
                max_deviation,
            }),
            _ => Err(tau),
        })
        .collect()
}

struct Pipeline<'a> {
    schema: WeylType,
    opts: &'a ReplayOptions,
}

impl Pipeline<'_> {
    fn search(&self, local: &LocalDatum, r: usize, mut extra: Vec<ConeConstraint<Rat>>, step: u8, place: usize) -> Result<WeightTable, ReplayError> {
        let m = local.embeddings();
        extra.extend(regularity(r, m));
        cone_search(&ConeQuery { rank: r, embeddings: m, constraints: extra, radius: self.opts.radius })
            .map_err(|e| ReplayError::StepFailed { step, place, reason: e.to_string() })
    }

    fn place(&self, place: usize, local: &LocalDatum, seed: &RefinedSlopes<Rat>) -> Result<PlaceRecord, ReplayError> {
        let (schema, r) = (self.schema, seed.rank());
        let m = local.embeddings();
        let e = local.e() as i64;
        let refine = |w: &SignedPerm, k: &WeightTable, phi: &RefinedSlopes<Rat>| {
            change_refinement(w, local, k, phi, self.opts.convention).map_err(|err| ReplayError::Invalid(err.to_string()))
        };

        let step1_forms = if self.opts.skip_step1 {
            vec![]
        } else {
            let probe = step1_inequality(schema, local, seed, &WeightTable::zero(r, m));
            vec![constraint(vec![2; r * m], e, &probe.rhs)]
        };
        let k1 = self.search(local, r, step1_forms, 1, place)?;
        let step1 = (!self.opts.skip_step1).then(|| step1_inequality(schema, local, seed, &k1));
        let x1_prime = refine(&minus_identity(schema, r).expect("even rank for type D"), &k1, seed)?;

        let forms = step2_inequalities(local, &x1_prime, &WeightTable::zero(r, m))
            .into_iter()
            .enumerate()
            .map(|(j, ineq)| constraint(gap_form(r, m, r - (j + 1), None), e, &ineq.rhs))
            .collect();
        let k2 = self.search(local, r, forms, 2, place)?;
        let step2 = step2_inequalities(local, &x1_prime, &k2);
        let x2_prime = refine(&shift_cycle(schema, r), &k2, &x1_prime)?;

        let scale = e * ambient_rank(schema, r);
        let bound = step3_bound(&x2_prime);
        let forms = (0..m).flat_map(|s| (1..=r).map(move |i| (s, i))).map(|(s, i)| constraint(gap_form(r, m, i, Some(s)), scale, &bound)).collect();
        let k3 = self.search(local, r, forms, 3, place)?;
        let step3 = step3_inequalities(schema, local, &x2_prime, &k3);

        let datum = point_datum(schema, local, &k3, &x2_prime);
        let hypothesis = hypothesis_records(&datum).map_err(|tau| ReplayError::AlignmentFailed { place, tau })?;

        let nu = NormalizedSlopes::new(schema, x2_prime.values().to_vec());
        let (survivors, verdict) = certify_splittings(&nu);
        Ok(PlaceRecord {
            local: *local,
            seed: seed.clone(),
            k1,
            x1_prime,
            k2,
            x2_prime,
            k3,
            step1,
            step2,
            step3,
            hypothesis,
            nu,
            survivors,
            verdict,
        })
    }
}

pub(crate) fn overall_verdict(schema: WeylType, places: &[PlaceRecord]) -> Verdict {
    places
        .iter()
        .map(|p| &p.verdict)
        .find(|v| **v != Verdict::expected(schema))
        .cloned()
        .unwrap_or_else(|| Verdict::expected(schema))
}

fn replay(
    schema: WeylType,
    rank: usize,
    locals: &[LocalDatum],
    seeds: &[RefinedSlopes<Rat>],
    opts: &ReplayOptions,
) -> Result<Certificate, ReplayError> {
    if locals.is_empty() {
        return Err(ReplayError::Invalid("at least one place is required".into()));
    }
    if seeds.len() != locals.len() {
        return Err(ReplayError::Invalid(format!("{} seeds for {} places", seeds.len(), locals.len())));
    }
    if let Some(s) = seeds.iter().find(|s| s.rank() != rank) {
        return Err(ReplayError::Invalid(format!("seed has rank {}, expected {rank}", s.rank())));
    }
    let pipeline = Pipeline { schema, opts };
    let places = locals
        .iter()
        .zip(seeds)
        .enumerate()
        .map(|(i, (l, s))| pipeline.place(i, l, s))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict = overall_verdict(schema, &places);
    let certificate = Certificate { schema, rank, convention: opts.convention, skip_step1: opts.skip_step1, places, verdict };
    if certificate.has_expected_verdict() {
        Ok(certificate)
    } else {
        let survivors = certificate
            .places
            .iter()
            .find(|p| p.verdict != Verdict::expected(schema))
            .map(|p| p.survivors.clone())
            .unwrap_or_default();
        Err(ReplayError::VerdictFailed { certificate: Box::new(certificate), survivors })
    }
}

/// Symplectic replay for `Sp_2n`, one seed per place.
pub fn replay_symplectic(
    n: usize,
    locals: &[LocalDatum],
    seeds: &[RefinedSlopes<Rat>],
    opts: &ReplayOptions,
) -> Result<Certificate, ReplayError> {
    if n == 0 {
        return Err(ReplayError::Invalid("n must be at least 1".into()));
    }
    replay(WeylType::C, n, locals, seeds, opts)
}

/// Orthogonal replay for `SO_4n`: seeds of rank `2n`.
pub fn replay_orthogonal(
    n: usize,
    locals: &[LocalDatum],
    seeds: &[RefinedSlopes<Rat>],
    opts: &ReplayOptions,
) -> Result<Certificate, ReplayError> {
    if n == 0 {
        return Err(ReplayError::Invalid("n must be at least 1".into()));
    }
    replay(WeylType::D, 2 * n, locals, seeds, opts)
}
