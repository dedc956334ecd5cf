use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalError {
    #[error("p = {0} is not prime")]
    NotPrime(u64),
    #[error("ramification index must be >= 1")]
    ZeroRamification,
    #[error("residue degree must be >= 1")]
    ZeroResidueDegree,
}

/// Shape of a p-adic place: the prime, ramification index and residue degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLocal")]
pub struct LocalDatum {
    p: u64,
    e: u32,
    f: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocal {
    p: u64,
    e: u32,
    f: u32,
}

impl TryFrom<RawLocal> for LocalDatum {
    type Error = LocalError;
    fn try_from(r: RawLocal) -> Result<Self, LocalError> {
        LocalDatum::new(r.p, r.e, r.f)
    }
}

impl LocalDatum {
    pub fn new(p: u64, e: u32, f: u32) -> Result<Self, LocalError> {
        if !is_prime(p) {
            return Err(LocalError::NotPrime(p));
        }
        if e == 0 {
            return Err(LocalError::ZeroRamification);
        }
        if f == 0 {
            return Err(LocalError::ZeroResidueDegree);
        }
        Ok(LocalDatum { p, e, f })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// Number of embeddings `e * f`.
    pub fn embeddings(&self) -> usize {
        (self.e * self.f) as usize
    }

    /// `v_p(q) = f`.
    pub fn q_valuation<S: Scalar>(&self) -> S {
        S::from_int(self.f as i64)
    }

    /// `v_p(uniformizer) = 1/e`.
    pub fn uniformizer_valuation<S: Scalar>(&self) -> S {
        S::from_frac(1, self.e as i64)
    }

    /// Residue cardinality `p^f`, if it fits.
    pub fn q(&self) -> Option<u64> {
        self.p.checked_pow(self.f)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
