//! Exact scalar layer.
//!
//! Everything in this crate is generic over [`Scalar`], an exact ordered
//! field. The trait is implemented for every `num_rational::Ratio<T>` whose
//! integer type is signed; floating point types deliberately do not qualify
//! (they are not `Ord`).

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational; the default scalar of the crate.
pub type Rat = BigRational;

/// Machine-word rational for bounded scans where every value is tiny.
pub type SmallRat = Ratio<i64>;

/// An exact ordered field.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Signed
    + Send
    + Sync
    + 'static
{
    fn from_int(v: i64) -> Self;

    /// `num / den`; panics on a zero denominator.
    fn from_frac(num: i64, den: i64) -> Self;

    fn is_integral(&self) -> bool;

    /// Multiplicative inverse; panics on zero.
    fn recip(&self) -> Self;

    /// Largest integer `<= self`, if it fits an `i64`.
    fn floor_i64(&self) -> Option<i64>;

    /// Smallest integer `>= self`, if it fits an `i64`.
    fn ceil_i64(&self) -> Option<i64>;

    fn to_rat(&self) -> Rat;

    /// `None` when the value does not fit the underlying integer type.
    fn from_rat(r: &Rat) -> Option<Self>;
}

impl<T> Scalar for Ratio<T>
where
    T: Clone
        + Integer
        + Signed
        + Hash
        + fmt::Debug
        + fmt::Display
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
        + TryFrom<BigInt>,
    BigInt: From<T>,
{
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(T::from_i64(v).expect("integer out of range for scalar"))
    }

    fn from_frac(num: i64, den: i64) -> Self {
        Ratio::new(
            T::from_i64(num).expect("numerator out of range for scalar"),
            T::from_i64(den).expect("denominator out of range for scalar"),
        )
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn recip(&self) -> Self {
        Ratio::recip(self)
    }

    fn floor_i64(&self) -> Option<i64> {
        self.floor().to_integer().to_i64()
    }

    fn ceil_i64(&self) -> Option<i64> {
        self.ceil().to_integer().to_i64()
    }

    fn to_rat(&self) -> Rat {
        Ratio::new(
            BigInt::from(self.numer().clone()),
            BigInt::from(self.denom().clone()),
        )
    }

    fn from_rat(r: &Rat) -> Option<Self> {
        let n = T::try_from(r.numer().clone()).ok()?;
        let d = T::try_from(r.denom().clone()).ok()?;
        Some(Ratio::new(n, d))
    }
}

/// Convert between two scalar types, failing on overflow.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> Option<B> {
    B::from_rat(&a.to_rat())
}

/// Canonical `"num/den"` rendering; integers keep their `/1`.
pub fn rat_to_string<S: Scalar>(v: &S) -> String {
    let r = v.to_rat();
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(pub String);

/// Parse `"a/b"` or `"a"` into a reduced rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Ratio::new(n, d))
}

/// Serde adapters writing scalars as `"num/den"` strings.
///
/// Input also accepts `"a"` and bare JSON integers.
pub mod scalar_str {
    use super::{parse_rat, rat_to_string, Rat, Scalar};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Literal {
        Str(String),
        Int(i64),
    }

    impl Literal {
        fn into_scalar<V: Scalar, E: serde::de::Error>(self) -> Result<V, E> {
            let r = match self {
                Literal::Str(s) => parse_rat(&s).map_err(E::custom)?,
                Literal::Int(i) => Rat::from_integer(i.into()),
            };
            V::from_rat(&r).ok_or_else(|| E::custom("rational out of range"))
        }
    }

    pub fn serialize<V: Scalar, Ser: Serializer>(v: &V, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&rat_to_string(v))
    }

    pub fn deserialize<'de, V: Scalar, D: Deserializer<'de>>(d: D) -> Result<V, D::Error> {
        Literal::deserialize(d)?.into_scalar()
    }

    pub mod vec {
        use super::*;

        pub fn serialize<V: Scalar, Ser: Serializer>(v: &[V], s: Ser) -> Result<Ser::Ok, Ser::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&rat_to_string(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, V: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<V>, D::Error> {
            Vec::<Literal>::deserialize(d)?
                .into_iter()
                .map(Literal::into_scalar)
                .collect()
        }
    }

    pub mod vec2 {
        use super::*;

        pub fn serialize<V: Scalar, Ser: Serializer>(v: &[Vec<V>], s: Ser) -> Result<Ser::Ok, Ser::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for row in v {
                let row: Vec<String> = row.iter().map(rat_to_string).collect();
                seq.serialize_element(&row)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, V: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<V>>, D::Error> {
            Vec::<Vec<Literal>>::deserialize(d)?
                .into_iter()
                .map(|row| row.into_iter().map(Literal::into_scalar).collect())
                .collect()
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<V: Scalar, Ser: Serializer>(v: &Option<V>, s: Ser) -> Result<Ser::Ok, Ser::Error> {
            match v {
                Some(x) => s.serialize_some(&rat_to_string(x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, V: Scalar, D: Deserializer<'de>>(d: D) -> Result<Option<V>, D::Error> {
            Option::<Literal>::deserialize(d)?.map(Literal::into_scalar).transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-50i64..50, 1i64..12).prop_map(|(n, d)| Rat::from_frac(n, d))
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(parse_rat("6/4").unwrap(), Rat::from_frac(3, 2));
        assert_eq!(parse_rat("-3").unwrap(), Rat::from_int(-3));
        assert_eq!(rat_to_string(&Rat::from_int(5)), "5/1");
        assert_eq!(rat_to_string(&Rat::from_frac(-2, 4)), "-1/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn small_and_big_agree() {
        let a = SmallRat::from_frac(7, -21);
        let b: Rat = convert(&a).unwrap();
        assert_eq!(b, Rat::from_frac(-1, 3));
        assert_eq!(a.floor_i64(), Some(-1));
        assert_eq!(a.ceil_i64(), Some(0));
    }

    proptest! {
        #[test]
        fn field_axioms(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
            prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
            prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
            prop_assert_eq!(a.clone() - a.clone(), Rat::zero());
            if !a.is_zero() {
                prop_assert_eq!(a.clone() * a.recip(), Rat::one());
            }
            // always reduced with a positive denominator
            let s = a + b;
            prop_assert!(s.denom().is_positive());
            prop_assert!(num_integer::Integer::gcd(s.numer(), s.denom()).is_one());
        }
    }
}
