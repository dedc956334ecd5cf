use std::fmt;

use serde::{Deserialize, Serialize};

/// Root system type of the Weyl group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeylType {
    C,
    D,
}

impl fmt::Display for WeylType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeylType::C => f.write_str("C"),
            WeylType::D => f.write_str("D"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("images do not form a signed permutation of 1..={0}")]
    NotBijective(usize),
    #[error("odd number of sign changes is not allowed in type D")]
    OddParity,
    #[error("cannot compose elements of different types or ranks")]
    Incompatible,
}

/// Signed permutation of `{-n..-1, 1..n}` with `w(-i) = -w(i)`.
///
/// Stored as the images of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPerm {
    kind: WeylType,
    images: Vec<i64>,
}

impl SignedPerm {
    pub fn new(kind: WeylType, images: Vec<i64>) -> Result<Self, PermError> {
        let n = images.len();
        if n == 0 {
            return Err(PermError::ZeroRank);
        }
        let mut seen = vec![false; n];
        for &v in &images {
            let a = v.unsigned_abs() as usize;
            if a == 0 || a > n || seen[a - 1] {
                return Err(PermError::NotBijective(n));
            }
            seen[a - 1] = true;
        }
        let w = SignedPerm { kind, images };
        if kind == WeylType::D && w.sign_changes() % 2 == 1 {
            return Err(PermError::OddParity);
        }
        Ok(w)
    }

    pub fn identity(kind: WeylType, n: usize) -> Result<Self, PermError> {
        Self::new(kind, (1..=n as i64).collect())
    }

    pub fn kind(&self) -> WeylType {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[i64] {
        &self.images
    }

    /// `w(i)` for `i` in `-n..=n`, with `w(0) = 0`.
    pub fn apply(&self, i: i64) -> i64 {
        match i.signum() {
            0 => 0,
            1 => self.images[i as usize - 1],
            _ => -self.images[(-i) as usize - 1],
        }
    }

    pub fn sign_changes(&self) -> usize {
        self.images.iter().filter(|&&v| v < 0).count()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SignedPerm) -> Result<SignedPerm, PermError> {
        if self.kind != other.kind || self.rank() != other.rank() {
            return Err(PermError::Incompatible);
        }
        let images = other.images.iter().map(|&j| self.apply(j)).collect();
        Ok(SignedPerm { kind: self.kind, images })
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut images = vec![0; self.rank()];
        for (i, &v) in self.images.iter().enumerate() {
            let src = i as i64 + 1;
            images[v.unsigned_abs() as usize - 1] = src * v.signum();
        }
        SignedPerm { kind: self.kind, images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i as i64 + 1)
    }

    /// Reinterpret in another type; `None` if the parity forbids it.
    pub fn as_kind(&self, kind: WeylType) -> Option<SignedPerm> {
        SignedPerm::new(kind, self.images.clone()).ok()
    }
}

impl fmt::Display for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{{", self.kind, self.rank())?;
        for (i, v) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}", i + 1, v)?;
        }
        f.write_str("}")
    }
}

/// Iterator over a whole Weyl group: permutations in lexicographic order,
/// each followed by its admissible sign patterns.
pub struct WeylElements {
    kind: WeylType,
    perm: Vec<i64>,
    mask: u64,
    done: bool,
}

impl Iterator for WeylElements {
    type Item = SignedPerm;

    fn next(&mut self) -> Option<SignedPerm> {
        let n = self.perm.len();
        loop {
            if self.done {
                return None;
            }
            if self.mask == 1u64 << n {
                self.mask = 0;
                if !next_permutation(&mut self.perm) {
                    self.done = true;
                    return None;
                }
            }
            let mask = self.mask;
            self.mask += 1;
            if self.kind == WeylType::D && mask.count_ones() % 2 == 1 {
                continue;
            }
            let images = self
                .perm
                .iter()
                .enumerate()
                .map(|(i, &v)| if mask >> i & 1 == 1 { -v } else { v })
                .collect();
            return Some(SignedPerm { kind: self.kind, images });
        }
    }
}

fn next_permutation(v: &mut [i64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every element of the Weyl group of the given type and rank exactly once.
pub fn weyl_elements(kind: WeylType, n: usize) -> WeylElements {
    assert!((1..=20).contains(&n), "rank out of supported range");
    WeylElements { kind, perm: (1..=n as i64).collect(), mask: 0, done: false }
}

/// `i -> -i`, when it belongs to the group.
pub fn minus_identity(kind: WeylType, n: usize) -> Option<SignedPerm> {
    SignedPerm::new(kind, (1..=n as i64).map(|i| -i).collect()).ok()
}

/// The cycle `1 -> n`, `j -> j - 1`; sign free, so it lies in both types.
pub fn shift_cycle(kind: WeylType, n: usize) -> SignedPerm {
    assert!(n >= 1, "rank must be at least 1");
    let images = (1..=n as i64).map(|j| if j == 1 { n as i64 } else { j - 1 }).collect();
    SignedPerm { kind, images }
}
