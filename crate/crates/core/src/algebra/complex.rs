use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::dyadic::{Dyadic, Round};
use super::interval::{atan2, Interval, DEFAULT_PREC};
use crate::Rational;

/// Rectangular complex interval.
#[derive(Clone, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl fmt::Debug for ComplexInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)", self.re, self.im)
    }
}

impl ComplexInterval {
    pub fn new(re: Interval, im: Interval) -> ComplexInterval {
        ComplexInterval { re, im }
    }

    pub fn real(re: Interval) -> ComplexInterval {
        let p = re.prec;
        ComplexInterval { re, im: Interval::zero(p) }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> ComplexInterval {
        ComplexInterval::real(Interval::from_rational(q, prec))
    }

    pub fn zero(prec: u32) -> ComplexInterval {
        ComplexInterval::real(Interval::zero(prec))
    }

    pub fn one(prec: u32) -> ComplexInterval {
        ComplexInterval::real(Interval::one(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec.max(self.im.prec)
    }

    pub fn conj(&self) -> ComplexInterval {
        ComplexInterval { re: self.re.clone(), im: -&self.im }
    }

    /// Enclosure of `|z|^2`.
    pub fn norm_sqr(&self) -> Interval {
        &self.re.sqr() + &self.im.sqr()
    }

    /// Enclosure of `|z|`.
    pub fn abs(&self) -> Interval {
        self.norm_sqr().sqrt()
    }

    /// Upper bound on `|z|`.
    pub fn mag(&self) -> Dyadic {
        let r = self.re.mag();
        let i = self.im.mag();
        r.mul(&r).add(&i.mul(&i)).sqrt_round(64, Round::Up)
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn overlaps(&self, o: &ComplexInterval) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    pub fn hull(&self, o: &ComplexInterval) -> ComplexInterval {
        ComplexInterval { re: self.re.hull(&o.re), im: self.im.hull(&o.im) }
    }

    pub fn scale(&self, s: &Interval) -> ComplexInterval {
        ComplexInterval { re: &self.re * s, im: &self.im * s }
    }

    pub fn recip(&self) -> ComplexInterval {
        let n = self.norm_sqr();
        assert!(!n.contains_zero(), "complex reciprocal of an enclosure containing zero");
        let inv = n.recip();
        ComplexInterval { re: &self.re * &inv, im: -(&(&self.im * &inv)) }
    }

    pub fn div(&self, o: &ComplexInterval) -> ComplexInterval {
        self * &o.recip()
    }

    pub fn powi(&self, mut e: u64) -> ComplexInterval {
        let mut result = ComplexInterval::one(self.prec());
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

    /// `exp(i * theta)` for a real interval `theta`.
    pub fn cis(theta: &Interval) -> ComplexInterval {
        let (s, c) = theta.sin_cos();
        ComplexInterval { re: c, im: s }
    }

    /// Argument enclosure; the enclosure must exclude zero.
    pub fn arg(&self) -> Interval {
        atan2(&self.im, &self.re)
    }

    pub fn with_prec(&self, prec: u32) -> ComplexInterval {
        ComplexInterval { re: self.re.clone().with_prec(prec), im: self.im.clone().with_prec(prec) }
    }
}

impl Add for &ComplexInterval {
    type Output = ComplexInterval;
    fn add(self, o: &ComplexInterval) -> ComplexInterval {
        ComplexInterval { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &ComplexInterval {
    type Output = ComplexInterval;
    fn sub(self, o: &ComplexInterval) -> ComplexInterval {
        ComplexInterval { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &ComplexInterval {
    type Output = ComplexInterval;
    fn mul(self, o: &ComplexInterval) -> ComplexInterval {
        ComplexInterval {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}

impl Neg for &ComplexInterval {
    type Output = ComplexInterval;
    fn neg(self) -> ComplexInterval {
        ComplexInterval { re: -&self.re, im: -&self.im }
    }
}

impl Neg for ComplexInterval {
    type Output = ComplexInterval;
    fn neg(self) -> ComplexInterval {
        -(&self)
    }
}

macro_rules! forward_c {
    ($tr:ident, $m:ident) => {
        impl $tr for ComplexInterval {
            type Output = ComplexInterval;
            fn $m(self, o: ComplexInterval) -> ComplexInterval {
                (&self).$m(&o)
            }
        }
    };
}
forward_c!(Add, add);
forward_c!(Sub, sub);
forward_c!(Mul, mul);

impl Zero for ComplexInterval {
    fn zero() -> ComplexInterval {
        ComplexInterval::zero(DEFAULT_PREC)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ComplexInterval {
    fn one() -> ComplexInterval {
        ComplexInterval::one(DEFAULT_PREC)
    }
}

/// Approximate complex number with dyadic parts, rounded to nearest-ish at a
/// working precision. Used for root-finding iterations, never for proofs.
#[derive(Clone, Debug, PartialEq)]
pub struct CFloat {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl CFloat {
    pub fn new(re: Dyadic, im: Dyadic) -> CFloat {
        CFloat { re, im }
    }

    pub fn zero() -> CFloat {
        CFloat { re: Dyadic::zero(), im: Dyadic::zero() }
    }

    pub fn from_f64(re: f64, im: f64) -> CFloat {
        CFloat { re: Dyadic::from_f64(re), im: Dyadic::from_f64(im) }
    }

    /// Round both parts to a common grid `prec` bits below the larger part,
    /// so a negligible component cannot keep growing its exponent.
    pub fn round(&self, prec: u32) -> CFloat {
        let m = match (self.re.floor_log2(), self.im.floor_log2()) {
            (None, None) => return CFloat::zero(),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.max(b),
        };
        let e = m - prec as i64;
        CFloat { re: self.re.round_to_exp(e, Round::Down), im: self.im.round_to_exp(e, Round::Down) }
    }

    pub fn add(&self, o: &CFloat) -> CFloat {
        CFloat { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CFloat) -> CFloat {
        CFloat { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &CFloat, prec: u32) -> CFloat {
        CFloat { re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)), im: self.re.mul(&o.im).add(&self.im.mul(&o.re)) }
            .round(prec)
    }

    pub fn norm_sqr(&self) -> Dyadic {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn div(&self, o: &CFloat, prec: u32) -> CFloat {
        let n = o.norm_sqr();
        let num_re = self.re.mul(&o.re).add(&self.im.mul(&o.im));
        let num_im = self.im.mul(&o.re).sub(&self.re.mul(&o.im));
        CFloat { re: num_re.div_round(&n, prec + 8, Round::Down), im: num_im.div_round(&n, prec + 8, Round::Down) }
            .round(prec)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_ops() {
        let i = ComplexInterval::new(Interval::zero(64), Interval::one(64));
        let m1 = &i * &i;
        assert!(m1.re.contains(&Dyadic::from_int(-1)));
        assert!(m1.im.contains(&Dyadic::zero()));
        let r = i.recip();
        assert!(r.im.contains(&Dyadic::from_int(-1)));
        let a = i.arg();
        assert!(a.contains_rational(&Rational::new(157079632679u64.into(), 100000000000u64.into())) == false);
        assert!((a.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }
}
