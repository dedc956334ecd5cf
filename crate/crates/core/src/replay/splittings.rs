use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice_core::WeylType;
use crate::scalar::{scalar_str, Scalar};

/// `nu(i)` for `i = 1..=r`, extended by `nu(-i) = -nu(i)` and, for type C,
/// `nu(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct NormalizedSlopes<S> {
    pub schema: WeylType,
    #[serde(with = "scalar_str::vec")]
    pub values: Vec<S>,
}

impl<S: Scalar> NormalizedSlopes<S> {
    pub fn new(schema: WeylType, values: Vec<S>) -> Self {
        NormalizedSlopes { schema, values }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn indices(&self) -> Vec<i64> {
        let r = self.rank() as i64;
        let mut out: Vec<i64> = (-r..=-1).collect();
        if self.schema == WeylType::C {
            out.push(0);
        }
        out.extend(1..=r);
        out
    }

    pub fn get(&self, i: i64) -> S {
        match i {
            0 => S::zero(),
            i if i > 0 => self.values[i as usize - 1].clone(),
            i => -self.values[(-i) as usize - 1].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Irreducible,
    ArtinPlusIrreducible,
    Failed(String),
}

impl Verdict {
    pub fn expected(schema: WeylType) -> Verdict {
        match schema {
            WeylType::C => Verdict::ArtinPlusIrreducible,
            WeylType::D => Verdict::Irreducible,
        }
    }
}

fn walks_to_zero<S: Scalar>(nu: &NormalizedSlopes<S>, subset: &[i64]) -> bool {
    let mut acc = S::zero();
    for &i in subset {
        acc = acc + nu.get(i);
        if acc.is_negative() {
            return false;
        }
    }
    acc.is_zero()
}

/// Smaller size first, then lexicographic.
fn canonical_le(a: &[i64], b: &[i64]) -> bool {
    (a.len(), a) <= (b.len(), b)
}

/// Proper subsets `I` (one per complementary pair) such that both `I` and
/// its complement, listed ascending, have nonnegative prefix sums of `nu`
/// ending at 0. Sorted by size, then lexicographically.
pub fn certify_splittings<S: Scalar>(nu: &NormalizedSlopes<S>) -> (Vec<Vec<i64>>, Verdict) {
    let idx = nu.indices();
    let len = idx.len();
    assert!(len < 63, "index set too large to enumerate");
    let full: u64 = (1u64 << len) - 1;
    let pick = |mask: u64| -> Vec<i64> { (0..len).filter(|b| mask >> b & 1 == 1).map(|b| idx[b]).collect() };
    let mut survivors: Vec<Vec<i64>> = (1..full)
        .into_par_iter()
        .filter_map(|mask| {
            let (a, b) = (pick(mask), pick(full ^ mask));
            if !canonical_le(&a, &b) {
                return None;
            }
            (walks_to_zero(nu, &a) && walks_to_zero(nu, &b)).then_some(a)
        })
        .collect();
    survivors.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let verdict = if survivors.is_empty() {
        Verdict::Irreducible
    } else if nu.schema == WeylType::C && survivors == [vec![0]] {
        Verdict::ArtinPlusIrreducible
    } else {
        Verdict::Failed(format!("{} unexpected splitting(s)", survivors.len()))
    };
    (survivors, verdict)
}
