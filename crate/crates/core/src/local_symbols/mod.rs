//! Hilbert symbols over the completions of Q, quadratic-extension norm
//! arithmetic and the transfer-factor sign product over `Q_p`.

pub mod oracle;
mod quad;
mod wald;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice_core::is_prime;
use crate::scalar::Rat;

pub use quad::QuadExtElem;
pub use wald::{waldspurger_sign_product, WaldFactor, WaldInstance, WaldReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("Hilbert symbol arguments must be nonzero")]
    ZeroArgument,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a squarefree integer other than 0 and 1")]
    NotSquarefree(i64),
    #[error("Q_{p}(sqrt {d}) is not a field")]
    SplitExtension { d: i64, p: u64 },
    #[error("elements live in different quadratic fields")]
    FieldMismatch,
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("invalid place {0:?}")]
    BadPlace(String),
}

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl Place {
    pub fn prime(p: u64) -> Result<Self, SymbolError> {
        if is_prime(p) {
            Ok(Place::Prime(p))
        } else {
            Err(SymbolError::NotPrime(p))
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Place {
    type Err = SymbolError;
    fn from_str(s: &str) -> Result<Self, SymbolError> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Place::Infinity),
            t => {
                let p: u64 = t.parse().map_err(|_| SymbolError::BadPlace(s.to_string()))?;
                Place::prime(p)
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(u64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(p) => Place::prime(p).map_err(serde::de::Error::custom),
        }
    }
}

/// An integer in the same square class as `r`.
pub(crate) fn square_class_rep(r: &Rat) -> BigInt {
    r.numer() * r.denom()
}

/// `(v_p(a), a / p^v)` for nonzero `a`.
pub(crate) fn split_valuation(a: &BigInt, p: u64) -> (u64, BigInt) {
    let p = BigInt::from(p);
    let mut v = 0;
    let mut u = a.clone();
    loop {
        let (q, r) = u.div_rem(&p);
        if !r.is_zero() {
            return (v, u);
        }
        u = q;
        v += 1;
    }
}

fn residue(u: &BigInt, m: u64) -> u64 {
    u.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Legendre symbol of a unit at an odd prime.
fn legendre(u: &BigInt, p: u64) -> i8 {
    let r = pow_mod(residue(u, p) as u128, (p as u128 - 1) / 2, p as u128);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn sign_pow(exp: u64) -> i8 {
    if exp % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(a, b)_v`: `+1` iff `z^2 = a x^2 + b y^2` has a nonzero solution over
/// the completion at `v`.
pub fn hilbert(a: &Rat, b: &Rat, place: Place) -> Result<i8, SymbolError> {
    if a.is_zero() || b.is_zero() {
        return Err(SymbolError::ZeroArgument);
    }
    let (a, b) = (square_class_rep(a), square_class_rep(b));
    Ok(match place {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let (alpha, u) = split_valuation(&a, 2);
            let (beta, v) = split_valuation(&b, 2);
            let eps = |x: &BigInt| (residue(x, 4) == 3) as u64;
            let omega = |x: &BigInt| matches!(residue(x, 8), 3 | 5) as u64;
            sign_pow(eps(&u) * eps(&v) + alpha * omega(&v) + beta * omega(&u))
        }
        Place::Prime(p) => {
            let (alpha, u) = split_valuation(&a, p);
            let (beta, v) = split_valuation(&b, p);
            let eps = (p - 1) / 2;
            let mut s = sign_pow(alpha * beta * eps);
            if beta % 2 == 1 {
                s *= legendre(&u, p);
            }
            if alpha % 2 == 1 {
                s *= legendre(&v, p);
            }
            s
        }
    })
}

/// Whether `a` is a nonzero square in the completion at `place`.
pub fn is_local_square(a: &Rat, place: Place) -> bool {
    if a.is_zero() {
        return false;
    }
    let a = square_class_rep(a);
    match place {
        Place::Infinity => a.is_positive(),
        Place::Prime(p) => {
            let (v, u) = split_valuation(&a, p);
            v % 2 == 0 && if p == 2 { residue(&u, 8) == 1 } else { legendre(&u, p) == 1 }
        }
    }
}

fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d = 2u64;
    while BigInt::from(d) * BigInt::from(d) <= n {
        let bd = BigInt::from(d);
        if (&n % &bd).is_zero() {
            out.push(d);
            while (&n % &bd).is_zero() {
                n /= &bd;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(n.to_u64().expect("prime factor fits in u64"));
    }
    out
}

/// Places where `(a, b)_v` can be nontrivial: infinity and the primes
/// dividing `2 · num · den` of both arguments.
pub fn relevant_places(a: &Rat, b: &Rat) -> Vec<Place> {
    let n = BigInt::from(2) * square_class_rep(a) * square_class_rep(b);
    let mut places: Vec<Place> = prime_factors(&n).into_iter().map(Place::Prime).collect();
    places.push(Place::Infinity);
    places
}

/// Product of `(a, b)_v` over [`relevant_places`] equals `+1`.
pub fn product_formula(a: &Rat, b: &Rat) -> Result<bool, SymbolError> {
    let mut prod = 1;
    for v in relevant_places(a, b) {
        prod *= hilbert(a, b, v)?;
    }
    Ok(prod == 1)
}

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let n = d.unsigned_abs();
    let mut k = 2u64;
    while k * k <= n {
        if n % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Norm character of `Q_p(sqrt d)/Q_p` evaluated at `u`.
pub fn sign_char(d: i64, u: &Rat, p: u64) -> Result<i8, SymbolError> {
    let place = Place::prime(p)?;
    if !is_squarefree(d) || d == 1 {
        return Err(SymbolError::NotSquarefree(d));
    }
    if is_local_square(&Rat::from_integer(d.into()), place) {
        return Err(SymbolError::SplitExtension { d, p });
    }
    hilbert(&Rat::from_integer(d.into()), u, place)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use proptest::prelude::*;

    fn q(n: i64) -> Rat {
        Rat::from_int(n)
    }

    const PLACES: [Place; 5] = [Place::Prime(2), Place::Prime(3), Place::Prime(5), Place::Prime(7), Place::Infinity];

    #[test]
    fn examples() {
        assert_eq!(hilbert(&q(-1), &q(-1), Place::Prime(2)), Ok(-1));
        assert_eq!(hilbert(&q(-1), &q(-1), Place::Infinity), Ok(-1));
        assert_eq!(hilbert(&q(-1), &q(-1), Place::Prime(3)), Ok(1));
        for v in PLACES {
            assert_eq!(hilbert(&q(1), &q(-7), v), Ok(1));
        }
        assert_eq!(hilbert(&q(2), &q(3), Place::Prime(3)), Ok(-1));
        assert_eq!(hilbert(&q(0), &q(3), Place::Prime(3)), Err(SymbolError::ZeroArgument));
        assert!(product_formula(&q(-1), &q(-1)).unwrap());
        assert!(product_formula(&q(2), &q(3)).unwrap());
        assert!(product_formula(&q(1), &q(17)).unwrap());
    }

    #[test]
    fn sign_char_examples() {
        assert_eq!(sign_char(-1, &q(-1), 3), Ok(1));
        assert_eq!(sign_char(3, &q(3), 3), Ok(-1));
        assert_eq!(sign_char(5, &q(4), 3), Ok(1));
        assert_eq!(sign_char(-1, &q(2), 5), Err(SymbolError::SplitExtension { d: -1, p: 5 }));
        assert_eq!(sign_char(4, &q(2), 5), Err(SymbolError::NotSquarefree(4)));
        assert_eq!(sign_char(2, &q(2), 4), Err(SymbolError::NotPrime(4)));
    }

    #[test]
    fn place_parsing() {
        assert_eq!("inf".parse::<Place>(), Ok(Place::Infinity));
        assert_eq!("7".parse::<Place>(), Ok(Place::Prime(7)));
        assert!("9".parse::<Place>().is_err());
        let p: Place = serde_json::from_str("5").unwrap();
        assert_eq!(p, Place::Prime(5));
        assert_eq!(serde_json::to_string(&Place::Infinity).unwrap(), "\"inf\"");
    }

    #[test]
    fn squares() {
        assert!(is_local_square(&q(17), Place::Prime(2)));
        assert!(!is_local_square(&q(5), Place::Prime(2)));
        assert!(is_local_square(&q(-1), Place::Prime(5)));
        assert!(!is_local_square(&q(-1), Place::Prime(3)));
        assert!(is_local_square(&Rat::from_frac(9, 4), Place::Prime(3)));
        assert!(!is_local_square(&q(3), Place::Prime(3)));
    }

    fn nonzero() -> impl Strategy<Value = Rat> {
        (-60i64..60, 1i64..30)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| Rat::from_frac(n, d))
    }

    proptest! {
        #[test]
        fn symbol_laws(a in nonzero(), b in nonzero(), c in nonzero()) {
            for v in PLACES {
                let ab = hilbert(&a, &b, v).unwrap();
                prop_assert_eq!(ab, hilbert(&b, &a, v).unwrap());
                prop_assert_eq!(hilbert(&a, &(b.clone() * c.clone()), v).unwrap(), ab * hilbert(&a, &c, v).unwrap());
                prop_assert_eq!(hilbert(&a, &-a.clone(), v).unwrap(), 1);
                prop_assert_eq!(hilbert(&a, &(b.clone() * b.clone()), v).unwrap(), 1);
            }
            prop_assert!(product_formula(&a, &b).unwrap());
        }
    }
}
