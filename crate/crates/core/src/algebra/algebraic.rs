//! Exact complex algebraic numbers: an irreducible integer polynomial plus a
//! dyadic box isolating one of its roots.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::complex::ComplexInterval;
use super::dyadic::{Dyadic, Round};
use super::factor;
use super::interval::Interval;
use super::intpoly;
use super::matrix::Matrix;
use super::poly::Poly;
use super::roots::{isolate, RootDisk};
use super::Sign;
use crate::{IntPoly, RatMatrix, RatPoly, Rational};

/// Working precision of stored boxes (bits), irrelevant for exactness.
const BOX_PREC: u32 = 64;
const MAX_BITS: u32 = 1 << 16;

#[derive(Clone)]
enum Repr {
    Rational(Rational),
    Irrational {
        /// Primitive, irreducible, positive leading coefficient, degree >= 2.
        minpoly: IntPoly,
        re: Interval,
        im: Interval,
        real: bool,
    },
}

/// An exact algebraic number.
#[derive(Clone)]
pub struct AlgebraicNumber {
    repr: Repr,
}

/// Serialized form: minimal polynomial coefficients (ascending, decimal
/// strings) and an isolating box `[re_lo, re_hi, im_lo, im_hi]` of dyadic
/// strings `m/2^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraicRecord {
    pub minpoly: Vec<String>,
    #[serde(rename = "box")]
    pub bbox: [String; 4],
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("malformed algebraic record: {0}")]
    Malformed(String),
    #[error("polynomial is not irreducible")]
    Reducible,
    #[error("box does not isolate exactly one root")]
    NotIsolating,
}

impl fmt::Debug for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rational(q) => write!(f, "{}", q),
            Repr::Irrational { minpoly, re, im, .. } => {
                let (a, b) = (re.to_f64(), im.to_f64());
                write!(f, "Alg({:.6}{:+.6}i, root of {:?})", a, b, minpoly.coeffs())
            }
        }
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Bounding box of a disk as `(re, im)` intervals.
fn disk_box(d: &RootDisk) -> (Interval, Interval) {
    let r = &d.radius;
    let re = Interval::new(d.re.sub(r), d.re.add(r), BOX_PREC);
    let im = if d.real {
        Interval::zero(BOX_PREC)
    } else {
        Interval::new(d.im.sub(r), d.im.add(r), BOX_PREC)
    };
    (re, im)
}

fn box_meets_disk(re: &Interval, im: &Interval, d: &RootDisk) -> bool {
    d.meets_box(&ComplexInterval::new(re.clone(), im.clone()))
}

fn box_contains_disk(re: &Interval, im: &Interval, d: &RootDisk) -> bool {
    let (dr, di) = disk_box(d);
    re.lo <= dr.lo && dr.hi <= re.hi && im.lo <= di.lo && di.hi <= im.hi
}

/// Boxes for all roots of an irreducible polynomial, in isolation order.
fn all_root_boxes(f: &IntPoly, start_bits: u32) -> Vec<(Interval, Interval, bool)> {
    let mut bits = start_bits;
    loop {
        let disks = isolate(f, bits);
        let boxes: Vec<_> = disks.iter().map(disk_box).collect();
        let ok = (0..disks.len()).all(|k| {
            (0..disks.len()).all(|j| j == k || !box_meets_disk(&boxes[k].0, &boxes[k].1, &disks[j]))
        });
        if ok {
            return boxes.into_iter().zip(disks.iter()).map(|((a, b), d)| (a, b, d.real)).collect();
        }
        bits *= 2;
        assert!(bits < MAX_BITS, "could not separate root boxes");
    }
}

fn companion(f: &IntPoly) -> RatMatrix {
    // Monic companion matrix of f / lc.
    let n = f.degree().unwrap();
    let lc = Rational::from_integer(f.lead());
    let mut m = Matrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Rational::one();
    }
    for i in 0..n {
        m[(i, n - 1)] = -Rational::from_integer(f.coeff(i)) / &lc;
    }
    m
}

fn rat_charpoly_int(m: &RatMatrix) -> IntPoly {
    intpoly::from_rational(&m.charpoly())
}

impl AlgebraicNumber {
    pub fn from_rational(q: Rational) -> AlgebraicNumber {
        AlgebraicNumber { repr: Repr::Rational(q) }
    }

    pub fn from_int(v: i64) -> AlgebraicNumber {
        AlgebraicNumber::from_rational(Rational::from_integer(v.into()))
    }

    /// `i`, the imaginary unit.
    pub fn imag_unit() -> AlgebraicNumber {
        AlgebraicNumber::roots_of_irreducible(&intpoly::from_i64(&[1, 0, 1]))
            .into_iter()
            .find(|a| a.approx().1 > 0.0)
            .unwrap()
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.repr, Repr::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.repr {
            Repr::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        match &self.repr {
            Repr::Rational(_) => true,
            Repr::Irrational { real, .. } => *real,
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        matches!(&self.repr, Repr::Rational(q) if q.is_zero())
    }

    pub fn degree(&self) -> usize {
        match &self.repr {
            Repr::Rational(_) => 1,
            Repr::Irrational { minpoly, .. } => minpoly.degree().unwrap(),
        }
    }

    /// Primitive minimal polynomial over Z with positive leading coefficient.
    pub fn minpoly(&self) -> IntPoly {
        match &self.repr {
            Repr::Rational(q) => Poly::new(vec![-q.numer().clone(), q.denom().clone()]),
            Repr::Irrational { minpoly, .. } => minpoly.clone(),
        }
    }

    /// Current isolating box (no refinement).
    pub fn current_box(&self) -> ComplexInterval {
        match &self.repr {
            Repr::Rational(q) => ComplexInterval::from_rational(q, BOX_PREC),
            Repr::Irrational { re, im, .. } => ComplexInterval::new(re.clone(), im.clone()),
        }
    }

    /// All roots of an irreducible primitive polynomial.
    pub fn roots_of_irreducible(f: &IntPoly) -> Vec<AlgebraicNumber> {
        let f = intpoly::primitive(f);
        if f.degree() == Some(1) {
            return vec![AlgebraicNumber::from_rational(Rational::new(-f.coeff(0), f.coeff(1)))];
        }
        all_root_boxes(&f, 16)
            .into_iter()
            .map(|(re, im, real)| AlgebraicNumber { repr: Repr::Irrational { minpoly: f.clone(), re, im, real } })
            .collect()
    }

    /// Approximate value, for display and heuristics only.
    pub fn approx(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Rational(q) => (Interval::from_rational(q, 64).to_f64(), 0.0),
            Repr::Irrational { re, im, .. } => (re.to_f64(), im.to_f64()),
        }
    }

    /// A box of width at most `2^-bits` around the value.
    pub fn enclosure(&self, bits: u32) -> ComplexInterval {
        match &self.repr {
            Repr::Rational(q) => {
                let mag = (q.numer().bits() as i64 - q.denom().bits() as i64).max(0) as u32;
                ComplexInterval::from_rational(q, bits + mag + 2)
            }
            Repr::Irrational { .. } => {
                let r = self.refine(bits);
                let b = r.current_box();
                let prec = bits + 8 + b.re.mag().floor_log2().unwrap_or(0).max(0) as u32;
                b.with_prec(prec.max(BOX_PREC))
            }
        }
    }

    /// Real enclosure of a real number.
    pub fn real_enclosure(&self, bits: u32) -> Interval {
        debug_assert!(self.is_real());
        self.enclosure(bits).re
    }

    /// Return an equal number whose box is nested in the current one and has
    /// width at most `2^-bits`.
    pub fn refine(&self, bits: u32) -> AlgebraicNumber {
        let Repr::Irrational { minpoly, re, im, real } = &self.repr else {
            return self.clone();
        };
        let target = Dyadic::pow2(-(bits as i64));
        if re.width() <= target && im.width() <= target {
            return self.clone();
        }
        let mut b = bits.max(8);
        loop {
            let disks = isolate(minpoly, b);
            let meeting: Vec<&RootDisk> = disks.iter().filter(|d| box_meets_disk(re, im, d)).collect();
            if meeting.len() == 1 {
                let (dr, di) = disk_box(meeting[0]);
                let nre = re.intersect(&dr).expect("nested box");
                let nim = if *real { Interval::zero(BOX_PREC) } else { im.intersect(&di).expect("nested box") };
                return AlgebraicNumber {
                    repr: Repr::Irrational { minpoly: minpoly.clone(), re: nre, im: nim, real: *real },
                };
            }
            b *= 2;
            assert!(b < MAX_BITS, "refinement did not converge");
        }
    }

    /// Index of this root among the disks of its minimal polynomial at `bits`.
    fn root_index(&self, disks: &[RootDisk]) -> Option<usize> {
        let Repr::Irrational { re, im, .. } = &self.repr else { return None };
        let m: Vec<usize> = (0..disks.len()).filter(|&k| box_meets_disk(re, im, &disks[k])).collect();
        if m.len() == 1 {
            Some(m[0])
        } else {
            None
        }
    }

    /// Exact equality.
    pub fn equals(&self, o: &AlgebraicNumber) -> bool {
        match (&self.repr, &o.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => a == b,
            (Repr::Irrational { minpoly: m1, re: r1, im: i1, .. }, Repr::Irrational { minpoly: m2, re: r2, im: i2, .. }) => {
                if m1 != m2 {
                    return false;
                }
                if !r1.overlaps(r2) || !i1.overlaps(i2) {
                    return false;
                }
                let mut b = 32;
                loop {
                    let disks = isolate(m1, b);
                    if let (Some(x), Some(y)) = (self.root_index(&disks), o.root_index(&disks)) {
                        return x == y;
                    }
                    b *= 2;
                    assert!(b < MAX_BITS);
                }
            }
            _ => false,
        }
    }

    /// Sign of a real number.
    pub fn alg_sign(&self) -> Sign {
        assert!(self.is_real(), "alg_sign of a non-real number");
        match &self.repr {
            Repr::Rational(q) => Sign::from_i32(if q.is_zero() { 0 } else if q.is_positive() { 1 } else { -1 }),
            Repr::Irrational { .. } => {
                let mut bits = 16;
                loop {
                    let e = self.real_enclosure(bits);
                    if let Some(s) = e.sign() {
                        return Sign::from_i32(s);
                    }
                    bits *= 2;
                    assert!(bits < MAX_BITS);
                }
            }
        }
    }

    /// Total order on real numbers.
    pub fn cmp_real(&self, o: &AlgebraicNumber) -> Ordering {
        assert!(self.is_real() && o.is_real());
        if let (Some(a), Some(b)) = (self.as_rational(), o.as_rational()) {
            return a.cmp(b);
        }
        if self.equals(o) {
            return Ordering::Equal;
        }
        let mut bits = 16;
        loop {
            let a = self.real_enclosure(bits);
            let b = o.real_enclosure(bits);
            if a.hi < b.lo {
                return Ordering::Less;
            }
            if b.hi < a.lo {
                return Ordering::Greater;
            }
            bits *= 2;
            assert!(bits < MAX_BITS);
        }
    }

    pub fn conj(&self) -> AlgebraicNumber {
        match &self.repr {
            Repr::Rational(_) => self.clone(),
            Repr::Irrational { minpoly, re, im, real } => AlgebraicNumber {
                repr: Repr::Irrational { minpoly: minpoly.clone(), re: re.clone(), im: -im, real: *real },
            },
        }
    }

    pub fn negate(&self) -> AlgebraicNumber {
        match &self.repr {
            Repr::Rational(q) => AlgebraicNumber::from_rational(-q),
            Repr::Irrational { minpoly, re, im, real } => AlgebraicNumber {
                repr: Repr::Irrational { minpoly: intpoly::negate_var(minpoly), re: -re, im: -im, real: *real },
            },
        }
    }

    /// Pick the unique root of one of `factors` compatible with `enclosure(bits)`.
    fn select(factors: &[IntPoly], enclosure: impl Fn(u32) -> ComplexInterval) -> AlgebraicNumber {
        let mut bits = 32;
        loop {
            let enc = enclosure(bits);
            let mut hits: Vec<AlgebraicNumber> = Vec::new();
            let mut ambiguous = false;
            for f in factors {
                if f.degree() == Some(1) {
                    let q = Rational::new(-f.coeff(0), f.coeff(1));
                    if enc.re.contains_rational(&q) && enc.im.contains_zero() {
                        hits.push(AlgebraicNumber::from_rational(q));
                    }
                    continue;
                }
                let disks = isolate(f, bits);
                for (k, d) in disks.iter().enumerate() {
                    if !d.meets_box(&enc) {
                        continue;
                    }
                    let (re, im) = disk_box(d);
                    let isolates = disks.iter().enumerate().all(|(j, o)| j == k || !box_meets_disk(&re, &im, o));
                    if !isolates {
                        ambiguous = true;
                    }
                    hits.push(AlgebraicNumber {
                        repr: Repr::Irrational { minpoly: f.clone(), re, im, real: d.real },
                    });
                }
            }
            if hits.len() == 1 && !ambiguous {
                return hits.pop().unwrap();
            }
            assert!(!hits.is_empty(), "root selection lost the value");
            bits *= 2;
            assert!(bits < MAX_BITS, "root selection did not separate candidates");
        }
    }

    /// The root of `p` singled out by a convergent family of enclosures.
    pub fn select_from_poly(p: &IntPoly, enclosure: impl Fn(u32) -> ComplexInterval) -> AlgebraicNumber {
        let factors: Vec<IntPoly> = factor::factor(p).into_iter().map(|(f, _)| f).collect();
        AlgebraicNumber::select(&factors, enclosure)
    }

    /// Slack bits for enclosures of expressions involving this value.
    fn mag_bits(&self) -> u32 {
        let b = self.current_box();
        b.mag().floor_log2().unwrap_or(0).max(0) as u32 + 2
    }

    pub fn add_ref(&self, o: &AlgebraicNumber) -> AlgebraicNumber {
        match (&self.repr, &o.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => AlgebraicNumber::from_rational(a + b),
            (Repr::Rational(q), _) => o.add_rational(q),
            (_, Repr::Rational(q)) => self.add_rational(q),
            _ => {
                let ca = companion(&self.minpoly());
                let cb = companion(&o.minpoly());
                let ia = Matrix::identity(ca.rows());
                let ib = Matrix::identity(cb.rows());
                let m = &ca.kron(&ib) + &ia.kron(&cb);
                let p = rat_charpoly_int(&m);
                let (a, b) = (self.clone(), o.clone());
                AlgebraicNumber::select_from_poly(&p, move |bits| &a.enclosure(bits + 2) + &b.enclosure(bits + 2))
            }
        }
    }

    fn add_rational(&self, q: &Rational) -> AlgebraicNumber {
        if q.is_zero() {
            return self.clone();
        }
        // minpoly(z - q)
        let shifted = intpoly::to_rational(&self.minpoly()).shift(&-q.clone());
        let p = intpoly::from_rational(&shifted);
        let a = self.clone();
        let qq = q.clone();
        AlgebraicNumber::select(&[p], move |bits| &a.enclosure(bits + 2) + &ComplexInterval::from_rational(&qq, bits + 64))
    }

    pub fn mul_ref(&self, o: &AlgebraicNumber) -> AlgebraicNumber {
        match (&self.repr, &o.repr) {
            (Repr::Rational(a), Repr::Rational(b)) => AlgebraicNumber::from_rational(a * b),
            (Repr::Rational(q), _) => o.mul_rational(q),
            (_, Repr::Rational(q)) => self.mul_rational(q),
            _ => {
                if !self.is_real() && self.equals(&o.conj()) {
                    return self.modulus_squared();
                }
                let m = companion(&self.minpoly()).kron(&companion(&o.minpoly()));
                let p = rat_charpoly_int(&m);
                let (a, b) = (self.clone(), o.clone());
                let slack = a.mag_bits() + b.mag_bits();
                AlgebraicNumber::select_from_poly(&p, move |bits| &a.enclosure(bits + slack) * &b.enclosure(bits + slack))
            }
        }
    }

    fn mul_rational(&self, q: &Rational) -> AlgebraicNumber {
        if q.is_zero() {
            return AlgebraicNumber::from_int(0);
        }
        if q.is_one() {
            return self.clone();
        }
        // minpoly(z / q)
        let m = self.minpoly();
        let n = m.degree().unwrap();
        let v: Vec<Rational> =
            (0..=n).map(|k| Rational::from_integer(m.coeff(k)) * num_traits::pow(q.recip(), k)).collect();
        let p = intpoly::from_rational(&Poly::new(v));
        let a = self.clone();
        let qq = q.clone();
        let slack = (qq.numer().bits() as u32) + 2;
        AlgebraicNumber::select(&[p], move |bits| {
            a.enclosure(bits + slack).scale(&Interval::from_rational(&qq, bits + 64 + slack))
        })
    }

    pub fn inv(&self) -> AlgebraicNumber {
        match &self.repr {
            Repr::Rational(q) => {
                assert!(!q.is_zero(), "inverse of zero");
                AlgebraicNumber::from_rational(q.recip())
            }
            Repr::Irrational { minpoly, .. } => {
                let p = intpoly::primitive(&minpoly.reversed());
                let a = self.clone();
                // |a| is bounded below by the root bound of the reversed polynomial.
                let lowb = intpoly::cauchy_bound(&p);
                let slack = 2 * (lowb.numer().bits() as u32) + 4;
                AlgebraicNumber::select(&[p], move |bits| a.enclosure(bits + slack).recip())
            }
        }
    }

    /// `g(self)` for a rational polynomial `g`.
    pub fn map_poly(&self, g: &RatPoly) -> AlgebraicNumber {
        if let Repr::Rational(q) = &self.repr {
            return AlgebraicNumber::from_rational(g.eval(q));
        }
        let m = intpoly::to_rational(&self.minpoly());
        let g = g.rem(&m);
        if g.degree().unwrap_or(0) == 0 {
            return AlgebraicNumber::from_rational(g.coeff(0));
        }
        if g.degree() == Some(1) {
            return self.mul_rational(&g.coeff(1)).add_rational(&g.coeff(0));
        }
        let c = companion(&self.minpoly());
        let n = c.rows();
        let mut acc: RatMatrix = Matrix::zeros(n, n);
        for coef in g.coeffs().iter().rev() {
            acc = &(&acc * &c) + &Matrix::identity(n).scale(coef);
        }
        let p = rat_charpoly_int(&acc);
        let a = self.clone();
        let gg = g.clone();
        let slack = a.mag_bits() * gg.degree().unwrap() as u32
            + gg.coeffs().iter().map(|c| c.numer().bits() as u32).max().unwrap_or(0)
            + 8;
        AlgebraicNumber::select_from_poly(&p, move |bits| {
            let e = a.enclosure(bits + slack);
            gg.coeffs().iter().rev().fold(ComplexInterval::zero(bits + slack), |acc, c| {
                &(&acc * &e) + &ComplexInterval::from_rational(c, bits + slack + 64)
            })
        })
    }

    pub fn pow(&self, n: i64) -> AlgebraicNumber {
        if n < 0 {
            return self.inv().pow(-n);
        }
        if let Repr::Rational(q) = &self.repr {
            return AlgebraicNumber::from_rational(num_traits::pow(q.clone(), n as usize));
        }
        if n == 0 {
            return AlgebraicNumber::from_int(1);
        }
        if n == 1 {
            return self.clone();
        }
        let m = intpoly::to_rational(&self.minpoly());
        let g = pow_mod(&Poly::x(), n as u64, &m);
        let c = companion(&self.minpoly());
        let k = c.rows();
        let mut acc: RatMatrix = Matrix::zeros(k, k);
        for coef in g.coeffs().iter().rev() {
            acc = &(&acc * &c) + &Matrix::identity(k).scale(coef);
        }
        let p = rat_charpoly_int(&acc);
        let a = self.clone();
        let slack = a.mag_bits() * n as u32 + 64 - (n as u64).leading_zeros();
        AlgebraicNumber::select_from_poly(&p, move |bits| a.enclosure(bits + slack).powi(n as u64))
    }

    /// `|self|^2` as a real algebraic number.
    pub fn modulus_squared(&self) -> AlgebraicNumber {
        if self.is_real() {
            return self.map_poly(&Poly::monomial(Rational::one(), 2));
        }
        let m = self.minpoly();
        if m.degree() == Some(2) {
            // Complex conjugate pair: product of the roots.
            return AlgebraicNumber::from_rational(Rational::new(m.coeff(0), m.coeff(2)));
        }
        let c = companion(&m);
        let p = rat_charpoly_int(&c.kron(&c));
        let a = self.clone();
        let slack = 2 * a.mag_bits() + 4;
        AlgebraicNumber::select_from_poly(&p, move |bits| ComplexInterval::real(a.enclosure(bits + slack).norm_sqr()))
    }

    /// Positive square root of a non-negative real number.
    pub fn sqrt_real(&self) -> AlgebraicNumber {
        assert!(self.is_real());
        if let Repr::Rational(q) = &self.repr {
            if let (Some(a), Some(b)) = (exact_isqrt(q.numer()), exact_isqrt(q.denom())) {
                return AlgebraicNumber::from_rational(Rational::new(a, b));
            }
        }
        assert!(self.alg_sign() != Sign::Negative, "sqrt of a negative number");
        let p = intpoly::inflate(&self.minpoly(), 2);
        let a = self.clone();
        AlgebraicNumber::select_from_poly(&p, move |bits| {
            let e = a.real_enclosure(2 * bits + 8);
            let e = Interval::new(Dyadic::max(&e.lo, &Dyadic::zero()), e.hi.clone(), e.prec);
            ComplexInterval::real(e.sqrt())
        })
    }

    /// `|self|`.
    pub fn modulus(&self) -> AlgebraicNumber {
        if self.is_real() {
            return if self.alg_sign() == Sign::Negative { self.negate() } else { self.clone() };
        }
        self.modulus_squared().sqrt_real()
    }

    /// Real part as an algebraic number.
    pub fn real_part(&self) -> AlgebraicNumber {
        if self.is_real() {
            return self.clone();
        }
        self.add_ref(&self.conj()).mul_rational(&Rational::new(1.into(), 2.into()))
    }

    /// If `|self| = 1`: `Some(order)` for a root of unity and `None` otherwise.
    ///
    /// Panics if `|self| != 1`.
    pub fn is_root_of_unity(&self) -> Option<u64> {
        let m = self.minpoly();
        let d = m.degree().unwrap() as u64;
        for n in intpoly::orders_with_phi(d) {
            if intpoly::cyclotomic(n) == m {
                return Some(n);
            }
        }
        let one = AlgebraicNumber::from_int(1);
        assert!(self.modulus_squared().equals(&one), "is_root_of_unity requires modulus one");
        None
    }

    /// `exp(2 pi i k / n)`.
    pub fn root_of_unity(n: u64, k: i64) -> AlgebraicNumber {
        assert!(n > 0);
        let k = k.rem_euclid(n as i64) as u64;
        let g = num_integer::gcd(k, n);
        let (k, n) = (k / g, n / g);
        match n {
            1 => return AlgebraicNumber::from_int(1),
            2 => return AlgebraicNumber::from_int(-1),
            _ => {}
        }
        let phi = intpoly::cyclotomic(n);
        let angle = Rational::new((2 * k).into(), n.into());
        AlgebraicNumber::select(&[phi], move |bits| {
            let th = &Interval::pi(bits + 8) * &Interval::from_rational(&angle, bits + 8);
            ComplexInterval::cis(&th)
        })
    }

    /// Whether the value lies on the unit circle.
    pub fn has_unit_modulus(&self) -> bool {
        self.modulus_squared().equals(&AlgebraicNumber::from_int(1))
    }

    /// Serialized record.
    pub fn to_record(&self) -> AlgebraicRecord {
        let b = match &self.repr {
            Repr::Rational(q) => {
                let lo = Dyadic::from_rational(q, 64, Round::Down);
                let hi = Dyadic::from_rational(q, 64, Round::Up);
                [lo.to_string(), hi.to_string(), "0/2^0".into(), "0/2^0".into()]
            }
            Repr::Irrational { re, im, .. } => {
                [re.lo.to_string(), re.hi.to_string(), im.lo.to_string(), im.hi.to_string()]
            }
        };
        AlgebraicRecord { minpoly: self.minpoly().coeffs().iter().map(|c| c.to_string()).collect(), bbox: b }
    }

    /// Rebuild and validate a serialized number.
    pub fn from_record(r: &AlgebraicRecord) -> Result<AlgebraicNumber, RecordError> {
        let coeffs: Result<Vec<BigInt>, _> = r.minpoly.iter().map(|s| s.trim().parse::<BigInt>()).collect();
        let coeffs = coeffs.map_err(|e| RecordError::Malformed(e.to_string()))?;
        let m = Poly::new(coeffs);
        if m.degree().unwrap_or(0) < 1 {
            return Err(RecordError::Malformed("constant polynomial".into()));
        }
        let parse = |s: &String| Dyadic::parse(s).ok_or_else(|| RecordError::Malformed(format!("bad dyadic {}", s)));
        let (rl, rh, il, ih) = (parse(&r.bbox[0])?, parse(&r.bbox[1])?, parse(&r.bbox[2])?, parse(&r.bbox[3])?);
        if rl > rh || il > ih {
            return Err(RecordError::Malformed("inverted box".into()));
        }
        let re = Interval::new(rl, rh, BOX_PREC);
        let im = Interval::new(il, ih, BOX_PREC);
        if m.degree() == Some(1) {
            let q = Rational::new(-m.coeff(0), m.coeff(1));
            if !re.contains_rational(&q) || !im.contains_zero() {
                return Err(RecordError::NotIsolating);
            }
            return Ok(AlgebraicNumber::from_rational(q));
        }
        if intpoly::primitive(&m) != m || !factor::is_irreducible(&m) {
            return Err(RecordError::Reducible);
        }
        let mut bits = 32;
        loop {
            let disks = isolate(&m, bits);
            let meeting: Vec<&RootDisk> = disks.iter().filter(|d| box_meets_disk(&re, &im, d)).collect();
            if meeting.is_empty() {
                return Err(RecordError::NotIsolating);
            }
            if meeting.len() == 1 && box_contains_disk(&re, &im, meeting[0]) {
                let d = meeting[0];
                let im = if d.real { Interval::zero(BOX_PREC) } else { im };
                return Ok(AlgebraicNumber { repr: Repr::Irrational { minpoly: m, re, im, real: d.real } });
            }
            bits *= 2;
            if bits > 4096 {
                return Err(RecordError::NotIsolating);
            }
        }
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

fn pow_mod(base: &RatPoly, mut e: u64, m: &RatPoly) -> RatPoly {
    let mut r = Poly::constant(Rational::one());
    let mut b = base.rem(m);
    while e > 0 {
        if e & 1 == 1 {
            r = (&r * &b).rem(m);
        }
        e >>= 1;
        if e > 0 {
            b = (&b * &b).rem(m);
        }
    }
    r
}

/// All complex roots of a non-zero rational polynomial with multiplicities.
///
/// Roots are grouped by irreducible factor (deterministic factor order) and,
/// within a factor, sorted by real part and then by decreasing imaginary part.
pub fn isolate_roots(p: &RatPoly) -> Vec<(AlgebraicNumber, u32)> {
    let ip = intpoly::from_rational(p);
    let mut out = Vec::new();
    for (f, mult) in factor::factor(&ip) {
        let mut roots = AlgebraicNumber::roots_of_irreducible(&f);
        roots.sort_by(|a, b| {
            let (ar, ai) = a.approx();
            let (br, bi) = b.approx();
            ar.partial_cmp(&br).unwrap_or(Ordering::Equal).then(bi.partial_cmp(&ai).unwrap_or(Ordering::Equal))
        });
        out.extend(roots.into_iter().map(|r| (r, mult)));
    }
    out
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, o: &AlgebraicNumber) -> bool {
        self.equals(o)
    }
}

impl Add for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn add(self, o: AlgebraicNumber) -> AlgebraicNumber {
        self.add_ref(&o)
    }
}

impl Sub for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn sub(self, o: AlgebraicNumber) -> AlgebraicNumber {
        self.add_ref(&o.negate())
    }
}

impl Mul for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn mul(self, o: AlgebraicNumber) -> AlgebraicNumber {
        self.mul_ref(&o)
    }
}

impl Div for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn div(self, o: AlgebraicNumber) -> AlgebraicNumber {
        self.mul_ref(&o.inv())
    }
}

impl Neg for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        self.negate()
    }
}

impl Zero for AlgebraicNumber {
    fn zero() -> AlgebraicNumber {
        AlgebraicNumber::from_int(0)
    }
    fn is_zero(&self) -> bool {
        self.is_zero_exact()
    }
}

impl One for AlgebraicNumber {
    fn one() -> AlgebraicNumber {
        AlgebraicNumber::from_int(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::from_i64;

    fn rp(v: &[i64]) -> RatPoly {
        Poly::new(v.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    #[test]
    fn isolate_examples() {
        let r = isolate_roots(&rp(&[4, 0, 1]));
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|(a, m)| *m == 1 && !a.is_real()));
        let (a, b) = (r[0].0.approx(), r[1].0.approx());
        assert!((a.1 - 2.0).abs() < 1e-6 && (b.1 + 2.0).abs() < 1e-6);
        let r = isolate_roots(&rp(&[1, -2, 1]));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 2);
        assert_eq!(r[0].0, AlgebraicNumber::from_int(1));
        let r = isolate_roots(&rp(&[-1, -1, 1]));
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|(a, _)| a.is_real()));
    }

    #[test]
    fn modulus_and_unity() {
        let i2 = &isolate_roots(&rp(&[4, 0, 1]))[0].0;
        assert_eq!(i2.modulus(), AlgebraicNumber::from_int(2));
        let i = AlgebraicNumber::imag_unit();
        assert_eq!(i.is_root_of_unity(), Some(4));
        let w = isolate_roots(&rp(&[1, 1, 1]))[0].0.clone();
        assert_eq!(w.is_root_of_unity(), Some(3));
        // (3+4i)/5 has modulus one but is not a root of unity.
        let z = isolate_roots(&rp(&[25, -30, 25]))[0].0.clone();
        assert!(z.has_unit_modulus());
        assert_eq!(z.is_root_of_unity(), None);
    }

    #[test]
    fn refine_nests() {
        let phi = isolate_roots(&rp(&[-1, -1, 1]))[1].0.clone();
        let r = phi.refine(80);
        let (ob, nb) = (phi.current_box(), r.current_box());
        assert!(ob.re.lo <= nb.re.lo && nb.re.hi <= ob.re.hi);
        assert!(nb.re.width() <= Dyadic::pow2(-80));
        assert_eq!(r, phi);
        let one = AlgebraicNumber::from_int(1).refine(40);
        assert_eq!(one, AlgebraicNumber::from_int(1));
    }

    #[test]
    fn arithmetic() {
        let s2 = AlgebraicNumber::from_int(2).sqrt_real();
        let s3 = AlgebraicNumber::from_int(3).sqrt_real();
        let sum = s2.add_ref(&s3);
        assert_eq!(sum.minpoly(), from_i64(&[1, 0, -10, 0, 1]));
        let prod = s2.mul_ref(&s3);
        assert_eq!(prod, AlgebraicNumber::from_int(6).sqrt_real());
        assert_eq!(s2.mul_ref(&s2), AlgebraicNumber::from_int(2));
        assert_eq!(s2.inv().mul_ref(&s2), AlgebraicNumber::from_int(1));
        let i = AlgebraicNumber::imag_unit();
        assert_eq!(i.pow(4), AlgebraicNumber::from_int(1));
        assert_eq!(i.pow(2), AlgebraicNumber::from_int(-1));
        assert_eq!(s2.alg_sign(), Sign::Positive);
        assert_eq!(s2.negate().alg_sign(), Sign::Negative);
        assert_eq!(s2.cmp_real(&s3), Ordering::Less);
        let one_plus_i = i.add_ref(&AlgebraicNumber::from_int(1));
        assert_eq!(one_plus_i.modulus_squared(), AlgebraicNumber::from_int(2));
        assert_eq!(one_plus_i.pow(8), AlgebraicNumber::from_int(16));
    }

    #[test]
    fn record_roundtrip() {
        let phi = isolate_roots(&rp(&[-1, -1, 1]))[1].0.clone();
        let rec = phi.to_record();
        let back = AlgebraicNumber::from_record(&rec).unwrap();
        assert_eq!(back, phi);
        let mut bad = rec.clone();
        bad.bbox = ["-10/2^0".into(), "10/2^0".into(), "0/2^0".into(), "0/2^0".into()];
        assert!(AlgebraicNumber::from_record(&bad).is_err());
        let q = AlgebraicNumber::from_rational(Rational::new(1.into(), 3.into()));
        assert_eq!(AlgebraicNumber::from_record(&q.to_record()).unwrap(), q);
    }
}
