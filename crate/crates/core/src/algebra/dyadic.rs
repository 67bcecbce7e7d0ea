use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Rounding direction for inexact dyadic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// A dyadic rational `mant * 2^exp`, kept normalized (odd mantissa or zero).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Dyadic {
    /// `m/2^e` with `e >= 0`; integers print as `n/2^0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp >= 0 {
            write!(f, "{}/2^0", &self.mant << (self.exp as usize))
        } else {
            write!(f, "{}/2^{}", self.mant, -self.exp)
        }
    }
}

fn div_floor_pow2(m: &BigInt, shift: u64) -> BigInt {
    let d = BigInt::one() << (shift as usize);
    m.div_floor(&d)
}

fn div_ceil_pow2(m: &BigInt, shift: u64) -> BigInt {
    let d = BigInt::one() << (shift as usize);
    -((-m).div_floor(&d))
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Dyadic {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz as usize;
            self.exp += tz as i64;
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Dyadic {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Dyadic {
        Dyadic::new(v.into(), 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Dyadic {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            BigSign::Minus => -1,
            BigSign::NoSign => 0,
            BigSign::Plus => 1,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Floor of log2 |x|; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn add(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << ((self.exp - e) as usize);
        let b = &o.mant << ((o.exp - e) as usize);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, o: &Dyadic) -> Dyadic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() || o.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: &self.mant * &o.mant, exp: self.exp + o.exp }
    }

    /// Round to at most `prec` significant bits.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let m = match dir {
            Round::Down => div_floor_pow2(&self.mant, shift),
            Round::Up => div_ceil_pow2(&self.mant, shift),
        };
        Dyadic::new(m, self.exp + shift as i64)
    }

    /// Round to a multiple of `2^e` (absolute grid).
    pub fn round_to_exp(&self, e: i64, dir: Round) -> Dyadic {
        if self.exp >= e || self.is_zero() {
            return self.clone();
        }
        let shift = (e - self.exp) as u64;
        let m = match dir {
            Round::Down => div_floor_pow2(&self.mant, shift),
            Round::Up => div_ceil_pow2(&self.mant, shift),
        };
        Dyadic::new(m, e)
    }

    pub fn from_rational(q: &Rational, prec: u32, dir: Round) -> Dyadic {
        let n = q.numer();
        let d = q.denom();
        if n.is_zero() {
            return Dyadic::zero();
        }
        if d.is_one() {
            return Dyadic::new(n.clone(), 0).round(prec, dir);
        }
        // Scale so the integer quotient has about prec+2 bits.
        let shift = prec as i64 + 2 + d.bits() as i64 - n.bits() as i64;
        let (num, den) = if shift >= 0 {
            (n << (shift as usize), d.clone())
        } else {
            (n.clone(), d << ((-shift) as usize))
        };
        let qf = match dir {
            Round::Down => num.div_floor(&den),
            Round::Up => -((-num).div_floor(&den)),
        };
        Dyadic::new(qf, -shift).round(prec, dir)
    }

    pub fn div_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!o.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let shift = (prec as i64 + 2 + o.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let num = &self.mant << (shift as usize);
        let (num, den) = if o.mant.is_negative() { (-num, -o.mant.clone()) } else { (num, o.mant.clone()) };
        let q = match dir {
            Round::Down => num.div_floor(&den),
            Round::Up => -((-num).div_floor(&den)),
        };
        Dyadic::new(q, self.exp - o.exp - shift).round(prec, dir)
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << (self.exp as usize))
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let (m, e) = if bits > 60 {
            (&self.mant >> ((bits - 60) as usize), self.exp + bits - 60)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(0.0);
        if e > 2000 {
            return mf.signum() * f64::INFINITY;
        }
        if e < -2100 {
            return 0.0;
        }
        mf * 2f64.powi(e as i32)
    }

    pub fn from_f64(v: f64) -> Dyadic {
        assert!(v.is_finite());
        if v == 0.0 {
            return Dyadic::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_bits == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, exp_bits - 1075)
        };
        Dyadic::new(BigInt::from(sign * m), e)
    }

    /// Square root rounded in direction `dir` to `prec` bits; input must be >= 0.
    pub fn sqrt_round(&self, prec: u32, dir: Round) -> Dyadic {
        assert!(!self.is_negative(), "sqrt of negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        // value = mant*2^exp; make exponent even and mantissa large.
        let target_bits = 2 * prec as i64 + 4;
        let mut shift = target_bits - self.mant.bits() as i64;
        if shift < 0 {
            shift = 0;
        }
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << (shift as usize);
        let e = self.exp - shift;
        let r = m.sqrt();
        let exact = &r * &r == m;
        let r = if dir == Round::Up && !exact { r + 1 } else { r };
        Dyadic::new(r, e / 2).round(prec, dir)
    }

    /// Nearest integer (ties away from zero is not guaranteed; used for estimates).
    pub fn round_to_int(&self) -> BigInt {
        let half = Dyadic::pow2(-1);
        self.add(&half).floor_int()
    }

    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            div_floor_pow2(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn ceil_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            div_ceil_pow2(&self.mant, (-self.exp) as u64)
        }
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Parse `m/2^e` (also accepts a plain integer).
    pub fn parse(s: &str) -> Option<Dyadic> {
        let s = s.trim();
        if let Some((m, e)) = s.split_once("/2^") {
            let m: BigInt = m.trim().parse().ok()?;
            let e: i64 = e.trim().parse().ok()?;
            Some(Dyadic::new(m, -e))
        } else {
            let m: BigInt = s.parse().ok()?;
            Some(Dyadic::new(m, 0))
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sub(other).mant.sign() {
            BigSign::Minus => Ordering::Less,
            BigSign::NoSign => Ordering::Equal,
            BigSign::Plus => Ordering::Greater,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_brackets_value() {
        let third = Rational::new(1.into(), 3.into());
        let lo = Dyadic::from_rational(&third, 20, Round::Down);
        let hi = Dyadic::from_rational(&third, 20, Round::Up);
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(hi.sub(&lo) <= Dyadic::pow2(-20));
        let neg = -third.clone();
        let lo = Dyadic::from_rational(&neg, 20, Round::Down);
        let hi = Dyadic::from_rational(&neg, 20, Round::Up);
        assert!(lo.to_rational() < neg && neg < hi.to_rational());
    }

    #[test]
    fn sqrt_brackets() {
        let two = Dyadic::from_int(2);
        let lo = two.sqrt_round(64, Round::Down);
        let hi = two.sqrt_round(64, Round::Up);
        assert!(lo.mul(&lo) < two && hi.mul(&hi) > two);
        let four = Dyadic::from_int(4);
        assert_eq!(four.sqrt_round(10, Round::Up), Dyadic::from_int(2));
    }

    #[test]
    fn display_roundtrip() {
        let d = Dyadic::new(BigInt::from(-3), -5);
        assert_eq!(d.to_string(), "-3/2^5");
        assert_eq!(Dyadic::parse(&d.to_string()).unwrap(), d);
        let e = Dyadic::new(BigInt::from(3), 2);
        assert_eq!(Dyadic::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn ordering_and_floor() {
        let a = Dyadic::new(BigInt::from(-7), -1);
        assert_eq!(a.floor_int(), BigInt::from(-4));
        assert_eq!(a.ceil_int(), BigInt::from(-3));
        assert!(a < Dyadic::zero());
        assert_eq!(Dyadic::from_f64(0.375).to_rational(), Rational::new(3.into(), 8.into()));
    }
}
