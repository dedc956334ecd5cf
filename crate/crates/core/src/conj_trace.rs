//! Archimedean parameters, the complex-conjugation trace recipe, congruence
//! pinning and the trace bookkeeping between a representation and an
//! auxiliary odd-dimensional one.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConjTraceError {
    #[error("parameter has dimension {dim}, which is neither 2n nor 2n+1 for n = {n}")]
    DimensionMismatch { dim: usize, n: usize },
    #[error("entries must be strictly increasing and nonnegative")]
    NotIncreasing,
    #[error("e must be 0 or 1")]
    BadParity,
    #[error("highest weight has a negative coordinate")]
    BadGap,
    #[error("need {k} entries (or {k} - 1 before padding with 0), got {got}")]
    BadLength { k: usize, got: usize },
    #[error("trace constraints have no solution")]
    Inconsistent,
}

/// `eps^e (+) sum_i Ind(z -> (z/zbar)^{r_i})`; the central summand is
/// present when `central` is true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchParam {
    central: bool,
    e: u8,
    r: Vec<u64>,
}

impl ArchParam {
    pub fn new(central: bool, e: u8, r: Vec<u64>) -> Result<Self, ConjTraceError> {
        if e > 1 {
            return Err(ConjTraceError::BadParity);
        }
        if r.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConjTraceError::NotIncreasing);
        }
        Ok(ArchParam { central, e, r })
    }

    /// Odd-dimensional parameter with central summand `eps^e`.
    pub fn odd(e: u8, r: Vec<u64>) -> Result<Self, ConjTraceError> {
        Self::new(true, e, r)
    }

    pub fn even(r: Vec<u64>) -> Result<Self, ConjTraceError> {
        Self::new(false, 0, r)
    }

    pub fn dim(&self) -> usize {
        2 * self.r.len() + self.central as usize
    }

    pub fn e(&self) -> u8 {
        self.e
    }

    pub fn r(&self) -> &[u64] {
        &self.r
    }
}

/// `r_1 >= 2` and `r_{i+1} >= r_i + 2`.
pub fn in_a_sp(param: &ArchParam) -> bool {
    param.r.first().is_none_or(|&r1| r1 >= 2) && param.r.windows(2).all(|w| w[1] >= w[0] + 2)
}

/// Strictly increasing with `r_1 >= 0`; `r_1 = 0` is the non-regular case.
pub fn nonregular_orthogonal_ok(param: &ArchParam) -> bool {
    param.r.windows(2).all(|w| w[0] < w[1])
}

fn sign(exp: u64) -> i64 {
    if exp % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(trace, det)` of complex conjugation: `((-1)^e, (-1)^{e+n})` in
/// dimension `2n+1`, `(0, (-1)^n)` in dimension `2n`.
pub fn conj_trace_det(param: &ArchParam, n: usize) -> Result<(i64, i64), ConjTraceError> {
    let dim = param.dim();
    if param.central && dim == 2 * n + 1 {
        Ok((sign(param.e as u64), sign(param.e as u64 + n as u64)))
    } else if !param.central && dim == 2 * n {
        Ok((0, sign(n as u64)))
    } else {
        Err(ConjTraceError::DimensionMismatch { dim, n })
    }
}

/// Highest weight `(r_i - (k - i))_i` of the `SO_2k(R)` type, entries taken in
/// decreasing order and padded with a trailing 0 when one short.
pub fn so2k_highest_weight(param: &ArchParam, k: usize) -> Result<Vec<i64>, ConjTraceError> {
    let mut r: Vec<i64> = param.r.iter().rev().map(|&x| x as i64).collect();
    if r.len() + 1 == k {
        r.push(0);
    }
    if r.len() != k {
        return Err(ConjTraceError::BadLength { k, got: param.r.len() });
    }
    let w: Vec<i64> = r.iter().enumerate().map(|(i, &ri)| ri - (k - 1 - i) as i64).collect();
    if w.iter().any(|&x| x < 0) {
        return Err(ConjTraceError::BadGap);
    }
    Ok(w)
}

/// `Some(target)` iff `p^N > 2 t_bound`: then two integers of absolute
/// value at most `t_bound` that are congruent mod `p^N` are equal, so a
/// bounded trace congruent to `target` is `target`.
pub fn congruence_pin(t_bound: u64, p: u64, big_n: u32, target: i64) -> Option<i64> {
    match p.checked_pow(big_n) {
        Some(m) if m <= 2 * t_bound => None,
        _ => Some(target),
    }
}

/// Split `total = t_pi + t_pi0` with `t_pi0 = ±1` (an involution in odd
/// dimension `dim0`, determinant `(-1)^n`) and `t_pi` the trace of an
/// involution of dimension `2n` and determinant `(-1)^n`.
pub fn resolve_component_traces(n: usize, total: i64, dim0: usize) -> Result<(i64, i64), ConjTraceError> {
    let det_target = sign(n as u64);
    let mut found = None;
    for t0 in [-1i64, 1] {
        // an involution with trace t has (dim - t)/2 eigenvalues -1
        let minus0 = (dim0 as i64 - t0) / 2;
        if dim0 % 2 == 0 || sign(minus0 as u64) != det_target {
            continue;
        }
        let t_pi = total - t0;
        let dim = 2 * n as i64;
        if t_pi.rem_euclid(2) != 0 || t_pi.abs() > dim {
            continue;
        }
        if sign(((dim - t_pi) / 2) as u64) != det_target {
            continue;
        }
        if found.is_some() {
            return Err(ConjTraceError::Inconsistent);
        }
        found = Some((t_pi, t0));
    }
    found.ok_or(ConjTraceError::Inconsistent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftCase {
    OddN,
    EvenNCovered,
    EvenNTrivial,
    EvenNOpen,
}

/// `q_L = q + n - 1` and which case of the trace statement applies.
pub fn normalization_shift(n: u64, q: i64, eta_inf_sign: i8) -> (i64, ShiftCase) {
    let q_l = q + n as i64 - 1;
    let case = if n % 2 == 1 {
        ShiftCase::OddN
    } else if q_l.rem_euclid(2) == 0 && eta_inf_sign == 1 {
        ShiftCase::EvenNCovered
    } else if (eta_inf_sign as i64) == sign((q_l + 1).rem_euclid(2) as u64) {
        ShiftCase::EvenNTrivial
    } else {
        ShiftCase::EvenNOpen
    };
    (q_l, case)
}
