//! Re-check a certificate from its own fields: every inequality, both
//! refinement changes, the alignment hypothesis and the splitting
//! enumeration. Minimality of the chosen weights is not part of it.

use super::{
    certify_splittings, hypothesis_records, overall_verdict, point_datum, step1_inequality, step2_inequalities,
    step3_inequalities, Certificate, Inequality, NormalizedSlopes, PlaceRecord,
};
use crate::lattice_core::{minus_identity, shift_cycle, SignedPerm, WeightTable, WeylType};
use crate::satake::{change_refinement, RefinedSlopes, RefinementConvention};
use crate::scalar::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("certificate has no places")]
    Empty,
    #[error("place {place}: {what}")]
    Place { place: usize, what: String },
    #[error("overall verdict does not match the places")]
    Verdict,
}

fn fail(place: usize, what: impl Into<String>) -> VerifyError {
    VerifyError::Place { place, what: what.into() }
}

fn same(place: usize, what: &str, recorded: &[Inequality], expected: &[Inequality]) -> Result<(), VerifyError> {
    if recorded != expected {
        return Err(fail(place, format!("{what} record does not match recomputation")));
    }
    if let Some(bad) = expected.iter().find(|i| !i.holds()) {
        return Err(fail(place, format!("{} does not hold", bad.label)));
    }
    Ok(())
}

fn check_shape(place: usize, name: &str, k: &WeightTable, rank: usize, embeddings: usize) -> Result<(), VerifyError> {
    if k.rank() != rank || k.embeddings() != embeddings {
        return Err(fail(place, format!("{name} has the wrong shape")));
    }
    if !k.is_strictly_regular() {
        return Err(fail(place, format!("{name} is not strictly regular")));
    }
    Ok(())
}

fn verify_place(
    schema: WeylType,
    rank: usize,
    convention: RefinementConvention,
    skip_step1: bool,
    place: usize,
    p: &PlaceRecord,
) -> Result<(), VerifyError> {
    let local = &p.local;
    let m = local.embeddings();
    for (name, s) in [("seed", &p.seed), ("x1'", &p.x1_prime), ("x2'", &p.x2_prime)] {
        if s.rank() != rank {
            return Err(fail(place, format!("{name} has rank {}", s.rank())));
        }
    }
    for (name, k) in [("k1", &p.k1), ("k2", &p.k2), ("k3", &p.k3)] {
        check_shape(place, name, k, rank, m)?;
    }
    let refine = |w: &SignedPerm, k: &WeightTable, phi: &RefinedSlopes<Rat>| {
        change_refinement(w, local, k, phi, convention).map_err(|e| fail(place, e.to_string()))
    };

    match (&p.step1, skip_step1) {
        (None, true) => {}
        (Some(rec), false) => same(place, "step 1", std::slice::from_ref(rec), &[step1_inequality(schema, local, &p.seed, &p.k1)])?,
        _ => return Err(fail(place, "step 1 record inconsistent with the skip flag")),
    }
    let w = minus_identity(schema, rank).ok_or_else(|| fail(place, "no -1 in the Weyl group"))?;
    if refine(&w, &p.k1, &p.seed)? != p.x1_prime {
        return Err(fail(place, "x1' does not match the refinement change"));
    }
    same(place, "step 2", &p.step2, &step2_inequalities(local, &p.x1_prime, &p.k2))?;
    if refine(&shift_cycle(schema, rank), &p.k2, &p.x1_prime)? != p.x2_prime {
        return Err(fail(place, "x2' does not match the refinement change"));
    }
    same(place, "step 3", &p.step3, &step3_inequalities(schema, local, &p.x2_prime, &p.k3))?;

    let datum = point_datum(schema, local, &p.k3, &p.x2_prime);
    match hypothesis_records(&datum) {
        Ok(h) if h == p.hypothesis => {}
        Ok(_) => return Err(fail(place, "hypothesis record does not match recomputation")),
        Err(tau) => return Err(fail(place, format!("alignment not certified at embedding {tau}"))),
    }

    let nu = NormalizedSlopes::new(schema, p.x2_prime.values().to_vec());
    if nu != p.nu {
        return Err(fail(place, "normalized slopes do not match x2'"));
    }
    let (survivors, verdict) = certify_splittings(&nu);
    if survivors != p.survivors || verdict != p.verdict {
        return Err(fail(place, "splitting enumeration does not match"));
    }
    Ok(())
}

pub fn verify_certificate(cert: &Certificate) -> Result<(), VerifyError> {
    if cert.places.is_empty() {
        return Err(VerifyError::Empty);
    }
    for (i, p) in cert.places.iter().enumerate() {
        verify_place(cert.schema, cert.rank, cert.convention, cert.skip_step1, i, p)?;
    }
    if overall_verdict(cert.schema, &cert.places) != cert.verdict {
        return Err(VerifyError::Verdict);
    }
    Ok(())
}
