use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Field, Ring};

/// Dense univariate polynomial, coefficients in ascending degree.
///
/// Trailing coefficients for which `is_zero` holds are trimmed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Ring + fmt::Debug> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl<T: Ring> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Poly<T> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: T) -> Poly<T> {
        Poly::new(vec![c])
    }

    /// The monomial `c * z^k`.
    pub fn monomial(c: T, k: usize) -> Poly<T> {
        let mut v = vec![T::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    pub fn x() -> Poly<T> {
        Poly::monomial(T::one(), 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero_poly(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn lead(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// Evaluate with coefficients mapped into another ring.
    pub fn eval_with<U: Ring>(&self, x: &U, f: impl Fn(&T) -> U) -> U {
        let mut acc = U::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + f(c);
        }
        acc
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn scale(&self, c: &T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Poly<T> {
        let mut out = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let mut m = T::zero();
            for _ in 0..k {
                m = m + c.clone();
            }
            out.push(m);
        }
        Poly::new(out)
    }

    pub fn pow(&self, mut e: u32) -> Poly<T> {
        let mut result = Poly::constant(T::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Composition `self(g(z))`.
    pub fn compose(&self, g: &Poly<T>) -> Poly<T> {
        let mut acc = Poly::new(vec![]);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * g) + &Poly::constant(c.clone());
        }
        acc
    }

    /// `z^n * p(1/z)` with `n = deg p`.
    pub fn reversed(&self) -> Poly<T> {
        let mut v = self.coeffs.clone();
        v.reverse();
        Poly::new(v)
    }

    /// Shift: `p(z + a)`.
    pub fn shift(&self, a: &T) -> Poly<T> {
        self.compose(&Poly::new(vec![a.clone(), T::one()]))
    }
}

impl<T: Field> Poly<T> {
    /// Euclidean division: returns `(q, r)` with `self = q*d + r`.
    pub fn div_rem(&self, d: &Poly<T>) -> (Poly<T>, Poly<T>) {
        let dd = d.degree().expect("polynomial division by zero");
        let lead = d.lead();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::new(vec![]), self.clone());
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / lead.clone();
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - c.clone() * dc.clone();
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, d: &Poly<T>) -> Poly<T> {
        self.div_rem(d).1
    }

    pub fn monic(&self) -> Poly<T> {
        let l = self.lead();
        Poly::new(self.coeffs.iter().map(|c| c.clone() / l.clone()).collect())
    }

    pub fn gcd(a: &Poly<T>, b: &Poly<T>) -> Poly<T> {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero_poly() {
            let r = x.rem(&y);
            x = y;
            y = r;
        }
        if x.is_zero_poly() {
            x
        } else {
            x.monic()
        }
    }

    /// Extended gcd: `(g, s, t)` with `s*a + t*b = g` and `g` monic.
    pub fn xgcd(a: &Poly<T>, b: &Poly<T>) -> (Poly<T>, Poly<T>, Poly<T>) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Poly::constant(T::one()), Poly::new(vec![]));
        let (mut t0, mut t1) = (Poly::new(vec![]), Poly::constant(T::one()));
        while !r1.is_zero_poly() {
            let (q, r) = r0.div_rem(&r1);
            r0 = r1;
            r1 = r;
            let s2 = &s0 - &(&q * &s1);
            s0 = s1;
            s1 = s2;
            let t2 = &t0 - &(&q * &t1);
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero_poly() {
            return (r0, s0, t0);
        }
        let l = r0.lead();
        let inv = T::one() / l;
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }
}

impl<T: Ring> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|k| self.coeff(k) + o.coeff(k)).collect();
        Poly::new(v)
    }
}

impl<T: Ring> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, o: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|k| self.coeff(k) - o.coeff(k)).collect();
        Poly::new(v)
    }
}

impl<T: Ring> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, o: &Poly<T>) -> Poly<T> {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Poly::new(vec![]);
        }
        let mut v = vec![T::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(v)
    }
}

impl<T: Ring> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_poly {
    ($tr:ident, $m:ident) => {
        impl<T: Ring> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, o: Poly<T>) -> Poly<T> {
                (&self).$m(&o)
            }
        }
    };
}
forward_poly!(Add, add);
forward_poly!(Sub, sub);
forward_poly!(Mul, mul);

impl<T: Ring> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        -(&self)
    }
}

impl<T: Ring> Zero for Poly<T> {
    fn zero() -> Poly<T> {
        Poly::new(vec![])
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<T: Ring> One for Poly<T> {
    fn one() -> Poly<T> {
        Poly::constant(T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn p(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let a = p(&[-1, 0, 1]); // z^2 - 1
        let b = p(&[1, 1]);
        let (qq, r) = a.div_rem(&b);
        assert_eq!(qq, p(&[-1, 1]));
        assert!(r.is_zero_poly());
        let g = Poly::gcd(&a, &p(&[-1, 1]).pow(2));
        assert_eq!(g, p(&[-1, 1]));
        let (g, s, t) = Poly::xgcd(&p(&[1, 0, 1]), &p(&[0, 1]));
        assert_eq!(g, p(&[1]));
        assert_eq!(&(&s * &p(&[1, 0, 1])) + &(&t * &p(&[0, 1])), p(&[1]));
    }

    #[test]
    fn compose_and_derivative() {
        let a = p(&[1, 2, 3]);
        assert_eq!(a.derivative(), p(&[2, 6]));
        assert_eq!(a.compose(&p(&[0, 1])), a);
        assert_eq!(p(&[0, 0, 1]).shift(&q(1)), p(&[1, 2, 1]));
        assert_eq!(a.eval(&q(2)), q(17));
        assert_eq!(a.reversed(), p(&[3, 2, 1]));
    }
}
