//! Independent Hilbert symbol: decide solvability of `z^2 = a x^2 + b y^2`
//! by search modulo a prime power followed by a Hensel lifting criterion.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::ToPrimitive;

use super::{square_class_rep, Place, SymbolError};
use crate::scalar::Rat;

/// Squarefree part of a nonzero integer, keeping the sign.
fn squarefree_part(mut n: i128) -> i128 {
    let sign = n.signum();
    n = n.abs();
    let mut out = 1;
    let mut d = 2;
    while d * d <= n {
        let mut k = 0;
        while n % d == 0 {
            n /= d;
            k += 1;
        }
        if k % 2 == 1 {
            out *= d;
        }
        d += 1;
    }
    sign * out * n
}

fn valuation(mut n: i128, p: i128, cap: u32) -> u32 {
    if n == 0 {
        return cap;
    }
    let mut v = 0;
    while n % p == 0 && v < cap {
        n /= p;
        v += 1;
    }
    v
}

fn solvable(a: i128, b: i128, p: i128) -> bool {
    // squarefree a, b: a primitive solution has gradient valuation at most
    // 1 (odd p) or 2 (p = 2), so precision 2 * 2 + 1 suffices in both cases
    let k: u32 = if p == 2 { 7 } else { 3 };
    let m = p.pow(k);
    let md = |x: i128| x.rem_euclid(m);
    let mut roots: HashMap<i128, Vec<i128>> = HashMap::new();
    for z in 0..m {
        roots.entry(z * z % m).or_default().push(z);
    }
    let lifts = |x: i128, y: i128, z: i128| {
        let delta = [2 * a * x, 2 * b * y, 2 * z].into_iter().map(|g| valuation(md(g), p, k)).min().unwrap();
        2 * delta < k
    };
    let check = |x: i128, y: i128| {
        let rhs = md(a * x * x + b * y * y);
        roots.get(&rhs).is_some_and(|zs| zs.iter().any(|&z| lifts(x, y, z)))
    };
    let check_z1 = |x: i128, y: i128| md(a * x * x + b * y * y) == 1 && lifts(x, y, 1);
    // a primitive vector has a unit coordinate; scale it to 1
    (0..m).any(|y| check(1, y))
        || (0..m).filter(|x| x % p == 0).any(|x| check(x, 1))
        || (0..m).filter(|x| x % p == 0).any(|x| (0..m).filter(|y| y % p == 0).any(|y| check_z1(x, y)))
}

static MEMO: Mutex<Option<HashMap<(i128, i128, u64), bool>>> = Mutex::new(None);

/// `(a, b)_v` from the definition. Meant for small arguments.
pub fn hilbert_by_solvability(a: &Rat, b: &Rat, place: Place) -> Result<i8, SymbolError> {
    use num_traits::Zero;
    if a.is_zero() || b.is_zero() {
        return Err(SymbolError::ZeroArgument);
    }
    let to_small = |r: &Rat| {
        square_class_rep(r).to_i128().filter(|v| v.unsigned_abs() < 1 << 40).map(squarefree_part)
    };
    let (Some(a), Some(b)) = (to_small(a), to_small(b)) else {
        return Err(SymbolError::Degenerate("arguments too large for the search oracle".into()));
    };
    let ok = match place {
        Place::Infinity => a > 0 || b > 0,
        Place::Prime(p) => {
            let key = (a.min(b), a.max(b), p);
            let cached = MEMO.lock().unwrap().get_or_insert_with(HashMap::new).get(&key).copied();
            cached.unwrap_or_else(|| {
                let v = solvable(a, b, p as i128);
                MEMO.lock().unwrap().get_or_insert_with(HashMap::new).insert(key, v);
                v
            })
        }
    };
    Ok(if ok { 1 } else { -1 })
}
