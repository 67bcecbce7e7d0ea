use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::dyadic::{Dyadic, Round};
use crate::Rational;

/// Closed real interval with dyadic endpoints and outward rounding.
///
/// `prec` is the working precision (significant bits) used when results
/// must be rounded.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
    pub prec: u32,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Interval {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi, prec }
    }

    pub fn point(d: Dyadic, prec: u32) -> Interval {
        Interval { lo: d.clone(), hi: d, prec }
    }

    pub fn from_int(v: i64, prec: u32) -> Interval {
        Interval::point(Dyadic::from_int(v), prec)
    }

    pub fn zero(prec: u32) -> Interval {
        Interval::point(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Interval {
        Interval::point(Dyadic::one(), prec)
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Interval {
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
            prec,
        }
    }

    pub fn from_f64(v: f64, prec: u32) -> Interval {
        Interval::point(Dyadic::from_f64(v), prec)
    }

    /// Symmetric interval `[-r, r]`.
    pub fn ball(r: Dyadic, prec: u32) -> Interval {
        Interval { lo: r.abs().neg(), hi: r.abs(), prec }
    }

    pub fn with_prec(mut self, prec: u32) -> Interval {
        self.prec = prec;
        self
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    /// Sign if the interval excludes zero: `Some(1)`, `Some(-1)`; a point zero gives `Some(0)`.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.signum() > 0 {
            Some(1)
        } else if self.hi.signum() < 0 {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi.signum() < 0
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    /// Upper bound on `|x|` over the interval.
    pub fn mag(&self) -> Dyadic {
        Dyadic::max(&self.lo.abs(), &self.hi.abs())
    }

    /// Lower bound on `|x|` over the interval.
    pub fn mig(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            Dyadic::min(&self.lo.abs(), &self.hi.abs())
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval {
            lo: Dyadic::min(&self.lo, &o.lo),
            hi: Dyadic::max(&self.hi, &o.hi),
            prec: self.prec.max(o.prec),
        }
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = Dyadic::max(&self.lo, &o.lo);
        let hi = Dyadic::min(&self.hi, &o.hi);
        if lo <= hi {
            Some(Interval { lo, hi, prec: self.prec.max(o.prec) })
        } else {
            None
        }
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn rounded(&self) -> Interval {
        Interval {
            lo: self.lo.round(self.prec, Round::Down),
            hi: self.hi.round(self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Interval {
        Interval { lo: self.mig(), hi: self.mag(), prec: self.prec }
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: a.lo.mul(&a.lo).round(self.prec, Round::Down),
            hi: a.hi.mul(&a.hi).round(self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn powi(&self, n: u32) -> Interval {
        let mut result = Interval::one(self.prec);
        let mut base = self.clone();
        let mut e = n;
        if n % 2 == 0 && n > 0 {
            // Even powers are non-negative; square the magnitude interval.
            base = self.abs();
        }
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        result
    }

    pub fn mul_pow2(&self, k: i64) -> Interval {
        Interval { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k), prec: self.prec }
    }

    pub fn recip(&self) -> Interval {
        assert!(!self.contains_zero(), "interval reciprocal of an interval containing zero");
        let one = Dyadic::one();
        Interval {
            lo: one.div_round(&self.hi, self.prec, Round::Down),
            hi: one.div_round(&self.lo, self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Interval {
        let lo = if self.lo.signum() <= 0 {
            Dyadic::zero()
        } else {
            self.lo.sqrt_round(self.prec, Round::Down)
        };
        assert!(self.hi.signum() >= 0, "sqrt of negative interval");
        Interval { lo, hi: self.hi.sqrt_round(self.prec, Round::Up), prec: self.prec }
    }

    pub fn max_i(&self, o: &Interval) -> Interval {
        Interval {
            lo: Dyadic::max(&self.lo, &o.lo),
            hi: Dyadic::max(&self.hi, &o.hi),
            prec: self.prec.max(o.prec),
        }
    }

    pub fn exp(&self) -> Interval {
        let lo = exp_point(&self.lo, self.prec).lo;
        let hi = exp_point(&self.hi, self.prec).hi;
        Interval { lo, hi, prec: self.prec }
    }

    /// Natural log; the interval must be strictly positive.
    pub fn ln(&self) -> Interval {
        assert!(self.lo.signum() > 0, "ln of non-positive interval");
        let lo = ln_point(&self.lo, self.prec).lo;
        let hi = ln_point(&self.hi, self.prec).hi;
        Interval { lo, hi, prec: self.prec }
    }

    pub fn sin(&self) -> Interval {
        let (s, _) = sin_cos_with_radius(self);
        s
    }

    pub fn cos(&self) -> Interval {
        let (_, c) = sin_cos_with_radius(self);
        c
    }

    pub fn sin_cos(&self) -> (Interval, Interval) {
        sin_cos_with_radius(self)
    }

    pub fn atan(&self) -> Interval {
        // atan is monotone increasing.
        let lo = atan_point(&self.lo, self.prec).lo;
        let hi = atan_point(&self.hi, self.prec).hi;
        Interval { lo, hi, prec: self.prec }
    }

    pub fn pi(prec: u32) -> Interval {
        pi_interval(prec)
    }

    pub fn ln2(prec: u32) -> Interval {
        let w = prec + 16;
        let third = Interval::from_rational(&Rational::new(1.into(), 3.into()), w);
        atanh_series(&third, w).mul_pow2(1).with_prec(prec).rounded()
    }
}

/// Angle of the point `(x, y)` in `(-pi, pi]`, as an enclosure.
///
/// The point enclosure must exclude the origin.
pub fn atan2(y: &Interval, x: &Interval) -> Interval {
    let prec = x.prec.max(y.prec);
    let pi = Interval::pi(prec);
    if x.is_positive() {
        return (y / x).atan();
    }
    if y.is_positive() {
        return (&pi.mul_pow2(-1)) - &(x / y).atan();
    }
    if y.is_negative() {
        return (&pi.mul_pow2(-1)).neg() - &(x / y).atan();
    }
    if x.is_negative() {
        // Near the negative real axis: the angle is near +-pi.
        let a = (y / x).atan();
        if y.lo.signum() >= 0 {
            return &a + &pi;
        }
        // Straddles the cut; report the hull around pi.
        let up = &a + &pi;
        let down = &a - &pi;
        return up.hull(&down);
    }
    panic!("atan2 of an enclosure containing the origin");
}

fn guard(prec: u32) -> u32 {
    prec + 24
}

/// Enclosure of exp(x) for a dyadic point.
pub fn exp_point(x: &Dyadic, prec: u32) -> Interval {
    if x.is_zero() {
        return Interval::one(prec);
    }
    let msb = x.floor_log2().unwrap();
    let k = (msb + 9).max(0);
    let w = guard(prec) + k as u32;
    let r = Interval::point(x.mul_pow2(-k), w);
    // |r| < 2^-8.
    let mut sum = Interval::one(w);
    let mut term = Interval::one(w);
    let mut j: u32 = 1;
    loop {
        term = &(&term * &r) / &Interval::from_int(j as i64, w);
        sum = &sum + &term;
        // Remainder after term j is at most 2 |r|^{j+1}/(j+1)!  <= 2|term|*|r|.
        let bound = term.mag().mul(&r.mag()).mul_pow2(1);
        if bound.is_zero() || bound.floor_log2().unwrap() < -(w as i64) - 4 {
            sum = &sum + &Interval::ball(bound.round(32, Round::Up), w);
            break;
        }
        j += 1;
    }
    for _ in 0..k {
        sum = sum.sqr();
    }
    sum.with_prec(prec).rounded()
}

fn atanh_series(s: &Interval, w: u32) -> Interval {
    // sum_{j>=0} s^{2j+1}/(2j+1), |s| <= 1/3.
    let s2 = s.sqr();
    let mut pow = s.clone();
    let mut sum = s.clone();
    let mut j: i64 = 1;
    loop {
        pow = &pow * &s2;
        let t = &pow / &Interval::from_int(2 * j + 1, w);
        sum = &sum + &t;
        // Tail bounded by |pow*s2| / (1 - s2) <= 2 |pow*s2|.
        let tail = pow.mag().mul(&s2.mag()).mul_pow2(1);
        if tail.is_zero() || tail.floor_log2().unwrap() < -(w as i64) - 4 {
            sum = &sum + &Interval::ball(tail.round(32, Round::Up), w);
            break;
        }
        j += 1;
    }
    sum
}

/// Enclosure of ln(x) for a positive dyadic point.
pub fn ln_point(x: &Dyadic, prec: u32) -> Interval {
    assert!(x.signum() > 0);
    if *x == Dyadic::one() {
        return Interval::zero(prec);
    }
    let w = guard(prec) + 8;
    // x = m * 2^e with m in [1/sqrt2, sqrt2).
    let bits = x.mantissa().bits() as i64;
    let mut e = x.exponent() + bits - 1;
    let mut m = x.mul_pow2(-e);
    // m in [1, 2)
    let sqrt2_lo = Dyadic::new(BigInt::from(181u32), -7); // 1.4140625 < sqrt 2
    if m > sqrt2_lo {
        m = m.mul_pow2(-1);
        e += 1;
    }
    let mi = Interval::point(m, w);
    let one = Interval::one(w);
    let s = &(&mi - &one) / &(&mi + &one);
    let mut res = atanh_series(&s, w).mul_pow2(1);
    if e != 0 {
        let ln2 = Interval::ln2(w);
        res = &res + &(&ln2 * &Interval::from_int(e, w));
    }
    res.with_prec(prec).rounded()
}

fn atan_inv_series(q: i64, w: u32) -> Interval {
    // atan(1/q) = sum (-1)^j / ((2j+1) q^{2j+1}), alternating and decreasing.
    let x = Interval::one(w) / Interval::from_int(q, w);
    let x2 = x.sqr();
    let mut pow = x.clone();
    let mut sum = x.clone();
    let mut j: i64 = 1;
    loop {
        pow = &pow * &x2;
        let t = &pow / &Interval::from_int(2 * j + 1, w);
        if j % 2 == 1 {
            sum = &sum - &t;
        } else {
            sum = &sum + &t;
        }
        let next = pow.mag().mul(&x2.mag());
        if next.is_zero() || next.floor_log2().unwrap() < -(w as i64) - 4 {
            sum = &sum + &Interval::ball(next.round(32, Round::Up), w);
            break;
        }
        j += 1;
    }
    sum
}

fn pi_interval(prec: u32) -> Interval {
    let w = guard(prec);
    let a = atan_inv_series(5, w).mul_pow2(4);
    let b = atan_inv_series(239, w).mul_pow2(2);
    (&a - &b).with_prec(prec).rounded()
}

/// Taylor series of sin and cos on a tiny argument.
fn sin_cos_small(y: &Interval, w: u32) -> (Interval, Interval) {
    let y2 = y.sqr();
    let mut s = y.clone();
    let mut c = Interval::one(w);
    let mut ts = y.clone();
    let mut tc = Interval::one(w);
    let mut k: i64 = 1;
    loop {
        // ts_k = (-1)^k y^{2k+1}/(2k+1)!, tc_k = (-1)^k y^{2k}/(2k)!.
        tc = -(&(&tc * &y2) / &Interval::from_int((2 * k - 1) * (2 * k), w));
        ts = -(&(&ts * &y2) / &Interval::from_int((2 * k) * (2 * k + 1), w));
        c = &c + &tc;
        s = &s + &ts;
        let bound = Dyadic::max(&tc.mag(), &ts.mag()).mul(&y2.mag());
        if bound.is_zero() || bound.floor_log2().unwrap() < -(w as i64) - 4 {
            let e = Interval::ball(bound.round(32, Round::Up), w);
            s = &s + &e;
            c = &c + &e;
            break;
        }
        k += 1;
    }
    (s, c)
}

/// Enclosures of sin(x) and cos(x) for a dyadic point.
pub fn sin_cos_point(x: &Dyadic, prec: u32) -> (Interval, Interval) {
    if x.is_zero() {
        return (Interval::zero(prec), Interval::one(prec));
    }
    let msb = x.floor_log2().unwrap().max(0) as u32;
    let halvings: i64 = 12;
    let w = guard(prec) + msb + 2 * halvings as u32;
    let pi = pi_interval(w + msb);
    let two_pi = pi.mul_pow2(1);
    // n = round(x / 2pi)
    let est = Interval::point(x.clone(), w) / two_pi.clone();
    let n = est.mid().round_to_int();
    let xr = &Interval::point(x.clone(), w) - &(&two_pi * &Interval::point(Dyadic::new(n, 0), w));
    let y = xr.mul_pow2(-halvings);
    let (mut s, mut c) = sin_cos_small(&y, w);
    let one = Interval::one(w);
    for _ in 0..halvings {
        let s2 = (&s * &c).mul_pow2(1);
        let c2 = &c.sqr().mul_pow2(1) - &one;
        s = s2;
        c = c2;
    }
    (clip_unit(&s.with_prec(prec).rounded()), clip_unit(&c.with_prec(prec).rounded()))
}

fn clip_unit(v: &Interval) -> Interval {
    let one = Dyadic::one();
    let m1 = one.neg();
    let lo = Dyadic::max(&v.lo, &m1);
    let hi = Dyadic::min(&v.hi, &one);
    if lo > hi {
        // Numerically impossible for a correct enclosure; keep the hull.
        return v.clone();
    }
    Interval { lo, hi, prec: v.prec }
}

fn sin_cos_with_radius(x: &Interval) -> (Interval, Interval) {
    let m = x.mid();
    let r = x.hi.sub(&m);
    let (s, c) = sin_cos_point(&m, x.prec);
    let e = Interval::ball(r.round(32, Round::Up), x.prec);
    (clip_unit(&(&s + &e)), clip_unit(&(&c + &e)))
}

/// Enclosure of atan(x) for a dyadic point.
pub fn atan_point(x: &Dyadic, prec: u32) -> Interval {
    if x.is_zero() {
        return Interval::zero(prec);
    }
    let w = guard(prec) + 8;
    let one = Interval::one(w);
    let mut v = Interval::point(x.clone(), w);
    let mut flip = false;
    if v.mag() > Dyadic::one() {
        v = &one / &v;
        flip = true;
    }
    // Halve the angle: atan v = 2 atan(v / (1 + sqrt(1 + v^2))).
    let halvings = 4;
    for _ in 0..halvings {
        let d = &one + &(&one + &v.sqr()).sqrt();
        v = &v / &d;
    }
    // Series sum (-1)^j v^{2j+1}/(2j+1), alternating for |v| < 1.
    let v2 = v.sqr();
    let mut pow = v.clone();
    let mut sum = v.clone();
    let mut j: i64 = 1;
    loop {
        pow = &pow * &v2;
        let t = &pow / &Interval::from_int(2 * j + 1, w);
        if j % 2 == 1 {
            sum = &sum - &t;
        } else {
            sum = &sum + &t;
        }
        let next = pow.mag().mul(&v2.mag());
        if next.is_zero() || next.floor_log2().unwrap() < -(w as i64) - 4 {
            sum = &sum + &Interval::ball(next.round(32, Round::Up), w);
            break;
        }
        j += 1;
    }
    let mut res = sum.mul_pow2(halvings);
    if flip {
        let half_pi = pi_interval(w).mul_pow2(-1);
        res = if x.signum() > 0 { &half_pi - &res } else { &(-half_pi) - &res };
    }
    res.with_prec(prec).rounded()
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        let prec = self.prec.max(o.prec);
        Interval {
            lo: self.lo.add(&o.lo).round(prec, Round::Down),
            hi: self.hi.add(&o.hi).round(prec, Round::Up),
            prec,
        }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, o: &Interval) -> Interval {
        let prec = self.prec.max(o.prec);
        Interval {
            lo: self.lo.sub(&o.hi).round(prec, Round::Down),
            hi: self.hi.sub(&o.lo).round(prec, Round::Up),
            prec,
        }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        let prec = self.prec.max(o.prec);
        let c = [self.lo.mul(&o.lo), self.lo.mul(&o.hi), self.hi.mul(&o.lo), self.hi.mul(&o.hi)];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo: lo.round(prec, Round::Down), hi: hi.round(prec, Round::Up), prec }
    }
}

impl Div for &Interval {
    type Output = Interval;
    fn div(self, o: &Interval) -> Interval {
        assert!(!o.contains_zero(), "interval division by an interval containing zero");
        let prec = self.prec.max(o.prec);
        let c = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for (a, b) in c {
            let l = a.div_round(b, prec, Round::Down);
            let h = a.div_round(b, prec, Round::Up);
            lo = Some(match lo {
                None => l,
                Some(x) => Dyadic::min(&x, &l),
            });
            hi = Some(match hi {
                None => h,
                Some(x) => Dyadic::max(&x, &h),
            });
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap(), prec }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, o: Interval) -> Interval {
                (&self).$m(&o)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, o: &Interval) -> Interval {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Default precision used by `Zero`/`One` constructors.
pub const DEFAULT_PREC: u32 = 128;

impl Zero for Interval {
    fn zero() -> Interval {
        Interval::zero(DEFAULT_PREC)
    }
    fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
}

impl One for Interval {
    fn one() -> Interval {
        Interval::one(DEFAULT_PREC)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(i: &Interval, v: f64, tol: f64) -> bool {
        i.lo.to_f64() - tol <= v && v <= i.hi.to_f64() + tol
    }

    #[test]
    fn constants() {
        let pi = Interval::pi(200);
        assert!(close(&pi, std::f64::consts::PI, 1e-15));
        assert!(pi.width().floor_log2().unwrap() < -190);
        let ln2 = Interval::ln2(200);
        assert!(close(&ln2, std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn exp_ln_inverse() {
        for v in [-30.5, -1.0, 0.001, 0.5, 1.0, 2.0, 7.25, 40.0] {
            let e = exp_point(&Dyadic::from_f64(v), 100);
            assert!(close(&e, v.exp(), v.exp().abs() * 1e-14), "exp {}", v);
            let l = e.ln();
            assert!(l.contains(&Dyadic::from_f64(v)), "ln exp {}", v);
        }
    }

    #[test]
    fn trig_values() {
        for v in [-100.0, -3.0, -0.1, 0.0, 0.7, 1.5707963, 3.14159, 10.0, 1000.0] {
            let (s, c) = sin_cos_point(&Dyadic::from_f64(v), 120);
            assert!(close(&s, f64::sin(v), 1e-12), "sin {}", v);
            assert!(close(&c, f64::cos(v), 1e-12), "cos {}", v);
            assert!(s.width().to_f64() < 1e-30);
        }
    }

    #[test]
    fn atan_values() {
        for v in [-50.0, -1.0, -0.3, 0.2, 1.0, 3.0, 1e6] {
            let a = atan_point(&Dyadic::from_f64(v), 120);
            assert!(close(&a, f64::atan(v), 1e-14), "atan {}", v);
        }
        let q = atan2(&Interval::from_int(1, 100), &Interval::from_int(-1, 100));
        assert!(close(&q, 3.0 * std::f64::consts::FRAC_PI_4, 1e-14));
        let q = atan2(&Interval::from_int(-1, 100), &Interval::from_int(0, 100));
        assert!(close(&q, -std::f64::consts::FRAC_PI_2, 1e-14));
    }

    #[test]
    fn arithmetic_is_outward() {
        let third = Interval::from_rational(&Rational::new(1.into(), 3.into()), 60);
        let one = &third * &Interval::from_int(3, 60);
        assert!(one.contains(&Dyadic::one()));
        let r = Interval::from_int(3, 60).recip();
        assert!(r.contains_rational(&Rational::new(1.into(), 3.into())));
        assert!(Interval::from_int(2, 80).sqrt().contains_rational(&Rational::new(
            141421356237u64.into(),
            100000000000u64.into()
        )) == false);
    }
}
