use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{is_squarefree, SymbolError};
use crate::scalar::{scalar_str, Scalar};

/// `a + b sqrt(d)` with `d` a squarefree integer other than 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct QuadExtElem<S> {
    d: i64,
    #[serde(with = "scalar_str")]
    a: S,
    #[serde(with = "scalar_str")]
    b: S,
}

impl<S: Scalar> QuadExtElem<S> {
    pub fn new(d: i64, a: S, b: S) -> Result<Self, SymbolError> {
        if !is_squarefree(d) || d == 1 {
            return Err(SymbolError::NotSquarefree(d));
        }
        Ok(QuadExtElem { d, a, b })
    }

    pub fn rational(d: i64, a: S) -> Result<Self, SymbolError> {
        Self::new(d, a, S::zero())
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExtElem { d: self.d, a: self.a.clone(), b: -self.b.clone() }
    }

    pub fn norm(&self) -> S {
        self.a.clone() * self.a.clone() - S::from_int(self.d) * self.b.clone() * self.b.clone()
    }

    pub fn trace(&self) -> S {
        self.a.clone() + self.a.clone()
    }

    /// `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(QuadExtElem { d: self.d, a: c.a / n.clone(), b: c.b / n })
    }

    pub fn scale(&self, s: &S) -> Self {
        QuadExtElem { d: self.d, a: self.a.clone() * s.clone(), b: self.b.clone() * s.clone() }
    }

    pub fn add_scalar(&self, s: &S) -> Self {
        QuadExtElem { d: self.d, a: self.a.clone() + s.clone(), b: self.b.clone() }
    }

    /// Integer power; negative exponents need a nonzero element.
    pub fn pow(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut out = QuadExtElem { d: self.d, a: S::one(), b: S::zero() };
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        Some(out)
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, SymbolError> {
        if self.d != o.d {
            return Err(SymbolError::FieldMismatch);
        }
        Ok(self * o)
    }
}

fn same_field<S>(x: &QuadExtElem<S>, y: &QuadExtElem<S>) {
    assert_eq!(x.d, y.d, "elements of different quadratic fields");
}

impl<S: Scalar> Add for &QuadExtElem<S> {
    type Output = QuadExtElem<S>;
    fn add(self, o: Self) -> QuadExtElem<S> {
        same_field(self, o);
        QuadExtElem { d: self.d, a: self.a.clone() + o.a.clone(), b: self.b.clone() + o.b.clone() }
    }
}

impl<S: Scalar> Sub for &QuadExtElem<S> {
    type Output = QuadExtElem<S>;
    fn sub(self, o: Self) -> QuadExtElem<S> {
        same_field(self, o);
        QuadExtElem { d: self.d, a: self.a.clone() - o.a.clone(), b: self.b.clone() - o.b.clone() }
    }
}

impl<S: Scalar> Mul for &QuadExtElem<S> {
    type Output = QuadExtElem<S>;
    fn mul(self, o: Self) -> QuadExtElem<S> {
        same_field(self, o);
        let d = S::from_int(self.d);
        QuadExtElem {
            d: self.d,
            a: self.a.clone() * o.a.clone() + d * self.b.clone() * o.b.clone(),
            b: self.a.clone() * o.b.clone() + self.b.clone() * o.a.clone(),
        }
    }
}

impl<S: Scalar> Neg for &QuadExtElem<S> {
    type Output = QuadExtElem<S>;
    fn neg(self) -> QuadExtElem<S> {
        QuadExtElem { d: self.d, a: -self.a.clone(), b: -self.b.clone() }
    }
}
