//! Transfer-factor sign product over `Q_p`.
//!
//! Split indices carry `x_j in Q_p^x`, contributing the roots `-x_j` and
//! `-1/x_j`; field indices carry `x_i in Q_p(sqrt d_i)` and the conjugate
//! pair `y_i = -x_i / conj(x_i)`, `conj(y_i)`. `P_I` is the monic
//! polynomial on all roots, `P_{I_0}` the one on the field roots only.

use serde::{Deserialize, Serialize};

use super::{hilbert, is_local_square, Place, QuadExtElem, SymbolError};
use crate::scalar::{scalar_str, Rat, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaldInstance {
    p: u64,
    #[serde(with = "scalar_str::vec")]
    split: Vec<Rat>,
    field: Vec<QuadExtElem<Rat>>,
}

/// Per field index: the constants, their ratio and its norm structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaldFactor {
    pub d: i64,
    #[serde(with = "scalar_str")]
    pub c: Rat,
    #[serde(with = "scalar_str")]
    pub c0: Rat,
    #[serde(with = "scalar_str")]
    pub ratio: Rat,
    pub sign: i8,
    /// `z` with `ratio = (-1)^(m - m0) N(z)`.
    pub norm_witness: QuadExtElem<Rat>,
    pub norm_identity_holds: bool,
    /// `(-1)^(m - m0) ratio` is a local norm.
    pub is_signed_norm: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaldReport {
    pub sign: i8,
    pub m: usize,
    pub m0: usize,
    pub factors: Vec<WaldFactor>,
    /// `prod d_i` is a square in `Q_p`.
    pub discriminant_is_square: bool,
    /// `(prod d_i, -1)_p^(m - m0)`, the value forced by the norm structure.
    pub predicted: i8,
}

type Poly = Vec<Rat>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Rat::from_int(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x.clone() * y.clone();
        }
    }
    out
}

fn derivative(a: &Poly) -> Poly {
    if a.len() <= 1 {
        return vec![Rat::from_int(0)];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| c.clone() * Rat::from_int(i as i64)).collect()
}

fn eval_rat(a: &Poly, t: &Rat) -> Rat {
    a.iter().rev().fold(Rat::from_int(0), |acc, c| acc * t.clone() + c.clone())
}

fn eval_quad(a: &Poly, t: &QuadExtElem<Rat>) -> QuadExtElem<Rat> {
    let zero = QuadExtElem::rational(t.d(), Rat::from_int(0)).expect("d already validated");
    a.iter().rev().fold(zero, |acc, c| (&acc * t).add_scalar(c))
}

/// `T^2 - tr(y) T + N(y)`.
fn quadratic(y: &QuadExtElem<Rat>) -> Poly {
    vec![y.norm(), -y.trace(), Rat::from_int(1)]
}

/// `(d, a, b)` with `d = 0` for rational values, for equality across fields.
fn root_key(y: &QuadExtElem<Rat>) -> (i64, Rat, Rat) {
    if y.is_rational() {
        (0, y.a().clone(), Rat::from_int(0))
    } else {
        (y.d(), y.a().clone(), y.b().clone())
    }
}

impl WaldInstance {
    pub fn new(p: u64, split: Vec<Rat>, field: Vec<QuadExtElem<Rat>>) -> Result<Self, SymbolError> {
        let place = Place::prime(p)?;
        if p == 2 {
            return Err(SymbolError::Degenerate("p must be odd".into()));
        }
        if split.is_empty() && field.is_empty() {
            return Err(SymbolError::Degenerate("m must be at least 1".into()));
        }
        if split.iter().any(|x| x == &Rat::from_int(0)) || field.iter().any(|x| x.is_zero()) {
            return Err(SymbolError::Degenerate("x values must be nonzero".into()));
        }
        for x in &field {
            if is_local_square(&Rat::from_int(x.d()), place) {
                return Err(SymbolError::SplitExtension { d: x.d(), p });
            }
        }
        let inst = WaldInstance { p, split, field };
        let mut keys: Vec<(i64, Rat, Rat)> = inst.roots().iter().map(root_key).collect();
        let n = keys.len();
        if keys.contains(&(0, Rat::from_int(-1), Rat::from_int(0))) {
            return Err(SymbolError::Degenerate("a root equals -1".into()));
        }
        keys.sort();
        keys.dedup();
        if keys.len() != n {
            return Err(SymbolError::Degenerate("roots are not pairwise distinct".into()));
        }
        Ok(inst)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn split(&self) -> &[Rat] {
        &self.split
    }

    pub fn field(&self) -> &[QuadExtElem<Rat>] {
        &self.field
    }

    pub fn m(&self) -> usize {
        self.split.len() + self.field.len()
    }

    pub fn m0(&self) -> usize {
        self.field.len()
    }

    pub fn y(&self, i: usize) -> QuadExtElem<Rat> {
        let x = &self.field[i];
        -&(x * &x.conj().inv().expect("x is nonzero"))
    }

    /// All `2m` roots; split roots are stored over `Q(sqrt -1)` with zero
    /// irrational part, only for comparison.
    fn roots(&self) -> Vec<QuadExtElem<Rat>> {
        let mut out = Vec::new();
        for x in &self.split {
            for r in [-x.clone(), -x.recip()] {
                out.push(QuadExtElem::rational(-1, r).expect("-1 is squarefree"));
            }
        }
        for i in 0..self.field.len() {
            let y = self.y(i);
            out.push(y.conj());
            out.push(y);
        }
        out
    }

    fn split_poly(&self) -> Poly {
        self.split.iter().fold(vec![Rat::from_int(1)], |acc, x| {
            poly_mul(&acc, &vec![Rat::from_int(1), x.clone() + x.recip(), Rat::from_int(1)])
        })
    }

    fn field_poly(&self) -> Poly {
        (0..self.field.len()).fold(vec![Rat::from_int(1)], |acc, i| poly_mul(&acc, &quadratic(&self.y(i))))
    }

    /// `x^-1 P'(y) P(-1) y^(1-m) (1+y)`, required to be rational.
    fn constant(&self, i: usize, poly: &Poly, m: usize) -> Result<Rat, SymbolError> {
        let x = &self.field[i];
        let y = self.y(i);
        let dp = eval_quad(&derivative(poly), &y);
        let at_minus_one = eval_rat(poly, &Rat::from_int(-1));
        let c = &(&(&x.inv().expect("nonzero") * &dp) * &y.pow(1 - m as i64).expect("y is nonzero")) * &y.add_scalar(&Rat::from_int(1));
        let c = c.scale(&at_minus_one);
        if c.is_zero() {
            return Err(SymbolError::Degenerate(format!("constant for field index {i} vanishes")));
        }
        if !c.is_rational() {
            return Err(SymbolError::Degenerate(format!("constant for field index {i} is not in Q_p")));
        }
        Ok(c.a().clone())
    }

    /// `prod_j (y + x_j)(1/x_j - 1)` in `Q(sqrt d_i)`.
    fn norm_witness(&self, i: usize) -> QuadExtElem<Rat> {
        let y = self.y(i);
        let one = QuadExtElem::rational(y.d(), Rat::from_int(1)).expect("validated");
        self.split.iter().fold(one, |acc, x| &acc * &y.add_scalar(x).scale(&(x.recip() - Rat::from_int(1))))
    }
}

/// `prod_{i in I*} sign(C_i / C_{i,0})` together with the per-index data.
pub fn waldspurger_sign_product(inst: &WaldInstance) -> Result<WaldReport, SymbolError> {
    let place = Place::Prime(inst.p);
    let (m, m0) = (inst.m(), inst.m0());
    let p_full = poly_mul(&inst.field_poly(), &inst.split_poly());
    let p_zero = inst.field_poly();
    let parity = if (m - m0) % 2 == 0 { Rat::from_int(1) } else { Rat::from_int(-1) };
    let mut factors = Vec::new();
    let mut sign = 1;
    let mut disc = Rat::from_int(1);
    for i in 0..m0 {
        let d = inst.field[i].d();
        let dq = Rat::from_int(d);
        disc *= dq.clone();
        let c = inst.constant(i, &p_full, m)?;
        let c0 = inst.constant(i, &p_zero, m0)?;
        let ratio = c.clone() / c0.clone();
        let s = hilbert(&dq, &ratio, place)?;
        sign *= s;
        let z = inst.norm_witness(i);
        let norm_identity_holds = ratio == parity.clone() * z.norm();
        let is_signed_norm = hilbert(&dq, &(ratio.clone() * parity.clone()), place)? == 1;
        factors.push(WaldFactor { d, c, c0, ratio, sign: s, norm_witness: z, norm_identity_holds, is_signed_norm });
    }
    let predicted = if (m - m0) % 2 == 0 { 1 } else { hilbert(&disc, &Rat::from_int(-1), place)? };
    Ok(WaldReport { sign, m, m0, factors, discriminant_is_square: is_local_square(&disc, place), predicted })
}
