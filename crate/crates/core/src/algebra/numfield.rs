//! Arithmetic in simple number fields `K = Q[z]/(m)`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::algebraic::AlgebraicNumber;
use super::complex::ComplexInterval;
use super::intpoly;
use super::poly::Poly;
use crate::{IntPoly, RatPoly, Rational};

/// `Q[z]/(m)` for an irreducible `m` of degree >= 2.
#[derive(Debug)]
pub struct NumberField {
    /// Primitive integer form of the modulus.
    pub minpoly: IntPoly,
    /// Monic rational form.
    monic: RatPoly,
    /// Power sums `s_k = sum of roots^k` for `k < 2 deg`.
    power_sums: Vec<Rational>,
}

impl NumberField {
    pub fn new(minpoly: &IntPoly) -> Arc<NumberField> {
        let m = intpoly::primitive(minpoly);
        let monic = intpoly::to_rational(&m).monic();
        let n = monic.degree().unwrap();
        // Newton identities for s_k with monic m = z^n + c_{n-1} z^{n-1} + ... + c_0.
        let c = |i: usize| monic.coeff(i);
        let len = 2 * n + 1;
        let mut s = vec![Rational::zero(); len];
        s[0] = Rational::from_integer(n.into());
        for k in 1..len {
            let mut acc = Rational::zero();
            for i in 1..k.min(n + 1) {
                acc += c(n - i) * &s[k - i];
            }
            if k <= n {
                acc += c(n - k) * Rational::from_integer(k.into());
            }
            s[k] = -acc;
        }
        Arc::new(NumberField { minpoly: m, monic, power_sums: s })
    }

    pub fn degree(&self) -> usize {
        self.monic.degree().unwrap()
    }

    pub fn modulus(&self) -> &RatPoly {
        &self.monic
    }

    /// The generator `z`.
    pub fn generator(self: &Arc<Self>) -> FieldElem {
        FieldElem::from_poly(Poly::x(), self)
    }

    fn trace_of(&self, p: &RatPoly) -> Rational {
        let mut acc = Rational::zero();
        for (k, c) in p.coeffs().iter().enumerate() {
            acc += c * &self.power_sums[k];
        }
        acc
    }
}

/// Element of a number field, or a plain rational (shared by every field).
#[derive(Clone)]
pub enum FieldElem {
    Scalar(Rational),
    Poly(RatPoly, Arc<NumberField>),
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Scalar(q) => write!(f, "{}", q),
            FieldElem::Poly(p, _) => write!(f, "K{:?}", p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>()),
        }
    }
}

impl FieldElem {
    pub fn scalar(q: Rational) -> FieldElem {
        FieldElem::Scalar(q)
    }

    pub fn from_poly(p: RatPoly, k: &Arc<NumberField>) -> FieldElem {
        let r = p.rem(k.modulus());
        match r.degree() {
            None => FieldElem::Scalar(Rational::zero()),
            Some(0) => FieldElem::Scalar(r.coeff(0)),
            _ => FieldElem::Poly(r, k.clone()),
        }
    }

    /// Representative polynomial in the field generator.
    pub fn as_poly(&self) -> RatPoly {
        match self {
            FieldElem::Scalar(q) => Poly::constant(q.clone()),
            FieldElem::Poly(p, _) => p.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            FieldElem::Scalar(q) => Some(q),
            _ => None,
        }
    }

    fn field(&self) -> Option<&Arc<NumberField>> {
        match self {
            FieldElem::Scalar(_) => None,
            FieldElem::Poly(_, k) => Some(k),
        }
    }

    fn combine(a: &FieldElem, b: &FieldElem, op: impl Fn(&RatPoly, &RatPoly) -> RatPoly) -> FieldElem {
        let k = a.field().or(b.field()).cloned();
        let r = op(&a.as_poly(), &b.as_poly());
        match k {
            None => FieldElem::Scalar(r.coeff(0)),
            Some(k) => FieldElem::from_poly(r, &k),
        }
    }

    pub fn inverse(&self) -> FieldElem {
        match self {
            FieldElem::Scalar(q) => {
                assert!(!q.is_zero(), "field inverse of zero");
                FieldElem::Scalar(q.recip())
            }
            FieldElem::Poly(p, k) => {
                let (g, s, _) = Poly::xgcd(p, k.modulus());
                assert_eq!(g.degree(), Some(0), "element not invertible");
                FieldElem::from_poly(s, k)
            }
        }
    }

    /// `Tr_{K/Q}` of the element; a scalar in a field of degree `n` has trace `n q`.
    pub fn trace(&self, k: &NumberField) -> Rational {
        k.trace_of(&self.as_poly())
    }

    /// Image under the embedding `z -> root`.
    pub fn embed(&self, root: &AlgebraicNumber) -> AlgebraicNumber {
        match self {
            FieldElem::Scalar(q) => AlgebraicNumber::from_rational(q.clone()),
            FieldElem::Poly(p, _) => root.map_poly(p),
        }
    }

    /// Enclosure of the embedded value given an enclosure of the root.
    pub fn embed_enclosure(&self, root: &ComplexInterval) -> ComplexInterval {
        let prec = root.prec();
        let p = self.as_poly();
        p.coeffs().iter().rev().fold(ComplexInterval::zero(prec), |acc, c| {
            &(&acc * root) + &ComplexInterval::from_rational(c, prec + 32)
        })
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, o: &FieldElem) -> bool {
        self.as_poly() == o.as_poly()
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, o: FieldElem) -> FieldElem {
        FieldElem::combine(&self, &o, |a, b| a + b)
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, o: FieldElem) -> FieldElem {
        FieldElem::combine(&self, &o, |a, b| a - b)
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, o: FieldElem) -> FieldElem {
        if let (FieldElem::Scalar(a), FieldElem::Scalar(b)) = (&self, &o) {
            return FieldElem::Scalar(a * b);
        }
        FieldElem::combine(&self, &o, |a, b| a * b)
    }
}

impl Div for FieldElem {
    type Output = FieldElem;
    fn div(self, o: FieldElem) -> FieldElem {
        self * o.inverse()
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        match self {
            FieldElem::Scalar(q) => FieldElem::Scalar(-q),
            FieldElem::Poly(p, k) => FieldElem::Poly(-p, k),
        }
    }
}

impl Zero for FieldElem {
    fn zero() -> FieldElem {
        FieldElem::Scalar(Rational::zero())
    }
    fn is_zero(&self) -> bool {
        matches!(self, FieldElem::Scalar(q) if q.is_zero())
    }
}

impl One for FieldElem {
    fn one() -> FieldElem {
        FieldElem::Scalar(Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::from_i64;

    #[test]
    fn gaussian_field() {
        let k = NumberField::new(&from_i64(&[1, 0, 1]));
        let i = k.generator();
        let m1 = i.clone() * i.clone();
        assert_eq!(m1, FieldElem::scalar(Rational::from_integer((-1).into())));
        let a = i.clone() + FieldElem::scalar(Rational::one());
        let inv = a.inverse();
        assert_eq!(a * inv, FieldElem::one());
        assert_eq!(i.trace(&k), Rational::zero());
        assert_eq!(FieldElem::one().trace(&k), Rational::from_integer(2.into()));
    }

    #[test]
    fn power_sums_cubic() {
        // z^3 - 2: s1 = 0, s2 = 0, s3 = 6
        let k = NumberField::new(&from_i64(&[-2, 0, 0, 1]));
        let z = k.generator();
        let z3 = z.clone() * z.clone() * z.clone();
        assert_eq!(z3.trace(&k), Rational::from_integer(6.into()));
        assert_eq!((z.clone() * z).trace(&k), Rational::zero());
    }
}
