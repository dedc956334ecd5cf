//! Irreducibility of unramified principal series of split `Sp_2n` and
//! `SO_4n`, and their refinement orbits.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lattice_core::{weyl_elements, WeylType};
use crate::scalar::{scalar_str, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrincipalSeriesError {
    #[error("characters have different residue cardinalities")]
    MixedResidue,
    #[error("character value must be nonzero")]
    ZeroValue,
    #[error("residue cardinality must be at least 2")]
    BadResidue,
}

/// Unramified character, recorded by its value at a uniformizer.
/// The norm character has value `1/q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct UnramChar<S> {
    #[serde(with = "scalar_str")]
    value: S,
    q: u64,
}

impl<S: Scalar> UnramChar<S> {
    pub fn new(value: S, q: u64) -> Result<Self, PrincipalSeriesError> {
        if value.is_zero() {
            return Err(PrincipalSeriesError::ZeroValue);
        }
        if q < 2 {
            return Err(PrincipalSeriesError::BadResidue);
        }
        Ok(UnramChar { value, q })
    }

    pub fn value(&self) -> &S {
        &self.value
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn norm_value(&self) -> S {
        S::from_frac(1, self.q as i64)
    }
}

fn common_q<S: Scalar>(chars: &[UnramChar<S>]) -> Result<Option<u64>, PrincipalSeriesError> {
    let q = chars.first().map(|c| c.q);
    if chars.iter().any(|c| Some(c.q) != q) {
        return Err(PrincipalSeriesError::MixedResidue);
    }
    Ok(q)
}

fn is_nu_power<S: Scalar>(v: &S, q: u64) -> bool {
    let qs = S::from_int(q as i64);
    *v == qs || *v == qs.recip()
}

/// `chi_i` not of order 2, `chi_i != nu^{±1}`, and
/// `chi_i chi_j^{±1} != nu^{±1}` for `i < j`.
pub fn sp_irreducible<S: Scalar>(chars: &[UnramChar<S>]) -> Result<bool, PrincipalSeriesError> {
    let Some(q) = common_q(chars)? else { return Ok(true) };
    let minus_one = -S::one();
    for (i, a) in chars.iter().enumerate() {
        if a.value == minus_one || is_nu_power(&a.value, q) {
            return Ok(false);
        }
        for b in &chars[i + 1..] {
            let ratio = a.value.clone() / b.value.clone();
            let product = a.value.clone() * b.value.clone();
            if is_nu_power(&ratio, q) || is_nu_power(&product, q) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sufficient condition for `SO_4n`: `chi_i^2 != 1` and
/// `chi_i chi_j^{±1} not in {1, q, 1/q}` for `i < j`. A `false` answer
/// means "not guaranteed", never "reducible".
pub fn so_irreducible_sufficient<S: Scalar>(chars: &[UnramChar<S>]) -> Result<bool, PrincipalSeriesError> {
    let Some(q) = common_q(chars)? else { return Ok(true) };
    let one = S::one();
    for (i, a) in chars.iter().enumerate() {
        if a.value.clone() * a.value.clone() == one {
            return Ok(false);
        }
        for b in &chars[i + 1..] {
            for v in [a.value.clone() / b.value.clone(), a.value.clone() * b.value.clone()] {
                if v == one || is_nu_power(&v, q) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Orbit of the value tuple under `value_i -> value_{w^-1(i)}`, a negative
/// index acting by inversion.
pub fn refinement_orbit<S: Scalar>(
    chars: &[UnramChar<S>],
    group: WeylType,
) -> Result<BTreeSet<Vec<S>>, PrincipalSeriesError> {
    common_q(chars)?;
    let n = chars.len();
    if n == 0 {
        return Ok(BTreeSet::from([Vec::new()]));
    }
    let get = |j: i64| {
        let v = chars[j.unsigned_abs() as usize - 1].value.clone();
        if j < 0 {
            v.recip()
        } else {
            v
        }
    };
    Ok(weyl_elements(group, n)
        .map(|w| {
            let inv = w.inverse();
            (1..=n as i64).map(|i| get(inv.apply(i))).collect()
        })
        .collect())
}

/// Type C delegates to [`sp_irreducible`], type D to the sufficient
/// criterion [`so_irreducible_sufficient`].
pub fn completely_refinable<S: Scalar>(chars: &[UnramChar<S>], group: WeylType) -> Result<bool, PrincipalSeriesError> {
    match group {
        WeylType::C => sp_irreducible(chars),
        WeylType::D => so_irreducible_sufficient(chars),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use itertools::Itertools;

    fn chars(q: u64, v: &[(i64, i64)]) -> Vec<UnramChar<Rat>> {
        v.iter().map(|&(a, b)| UnramChar::new(Rat::from_frac(a, b), q).unwrap()).collect()
    }

    #[test]
    fn sp_examples() {
        assert!(sp_irreducible(&chars(3, &[(2, 1)])).unwrap());
        assert!(!sp_irreducible(&chars(3, &[(-1, 1)])).unwrap());
        assert!(!sp_irreducible(&chars(3, &[(2, 1), (6, 1)])).unwrap());
        assert!(sp_irreducible(&chars(3, &[(1, 1)])).unwrap());
        let mut mixed = chars(3, &[(2, 1)]);
        mixed.extend(chars(5, &[(2, 1)]));
        assert_eq!(sp_irreducible(&mixed), Err(PrincipalSeriesError::MixedResidue));
        assert_eq!(UnramChar::new(Rat::from_int(0), 3), Err(PrincipalSeriesError::ZeroValue));
    }

    #[test]
    fn so_examples() {
        assert!(so_irreducible_sufficient(&chars(3, &[(2, 1), (5, 1)])).unwrap());
        assert!(!so_irreducible_sufficient(&chars(3, &[(1, 1), (2, 1)])).unwrap());
        assert!(!so_irreducible_sufficient(&chars(3, &[(2, 1), (6, 1)])).unwrap());
    }

    #[test]
    fn orbit_examples() {
        let o = refinement_orbit(&chars(3, &[(2, 1)]), WeylType::C).unwrap();
        assert_eq!(o, BTreeSet::from([vec![Rat::from_int(2)], vec![Rat::from_frac(1, 2)]]));
        assert_eq!(refinement_orbit(&chars(3, &[(1, 1)]), WeylType::C).unwrap().len(), 1);
        assert_eq!(refinement_orbit(&chars(3, &[(2, 1), (3, 1)]), WeylType::D).unwrap().len(), 4);
    }

    #[test]
    fn completely_refinable_examples() {
        assert!(completely_refinable(&chars(3, &[(2, 1)]), WeylType::C).unwrap());
        assert!(!completely_refinable(&chars(3, &[(1, 3)]), WeylType::C).unwrap());
        assert!(completely_refinable(&chars(3, &[(2, 1), (5, 1)]), WeylType::D).unwrap());
    }

    const GRID: [(i64, i64); 8] = [(2, 1), (-1, 1), (1, 1), (3, 1), (1, 3), (6, 1), (-2, 1), (9, 1)];

    fn order(kind: WeylType, n: usize) -> usize {
        let fact: usize = (1..=n).product();
        match kind {
            WeylType::C => fact << n,
            WeylType::D => fact << (n - 1),
        }
    }

    #[test]
    fn sp_is_weyl_stable() {
        for n in 1..=3 {
            for vals in (0..n).map(|_| GRID.iter()).multi_cartesian_product() {
                let cs: Vec<_> = vals.iter().map(|&&(a, b)| UnramChar::new(Rat::from_frac(a, b), 3).unwrap()).collect();
                let base = sp_irreducible(&cs).unwrap();
                let orbit = refinement_orbit(&cs, WeylType::C).unwrap();
                assert_eq!(order(WeylType::C, n) % orbit.len(), 0);
                for member in &orbit {
                    let moved: Vec<_> = member.iter().map(|v| UnramChar::new(v.clone(), 3).unwrap()).collect();
                    assert_eq!(sp_irreducible(&moved).unwrap(), base);
                }
                // full orbit exactly when values and inverses are 2n distinct numbers
                let mut spread: Vec<Rat> = cs.iter().flat_map(|c| [c.value().clone(), c.value().recip()]).collect();
                spread.sort();
                spread.dedup();
                assert_eq!(orbit.len() == order(WeylType::C, n), spread.len() == 2 * n);
                if so_irreducible_sufficient(&cs).unwrap() && n % 2 == 0 {
                    let d = refinement_orbit(&cs, WeylType::D).unwrap();
                    assert_eq!(d.len(), order(WeylType::D, n));
                }
            }
        }
    }
}
