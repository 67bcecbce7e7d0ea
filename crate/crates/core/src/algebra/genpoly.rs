//! Rational polynomial expressions in a fixed list of algebraic generators.
//!
//! Ring operations are purely symbolic. Zero and sign tests evaluate with
//! interval arithmetic until the enclosure either excludes zero or falls
//! below a root-separation bound: a non-zero algebraic value `S` of degree
//! at most `D`, with `delta * S` an algebraic integer whose conjugates are
//! bounded by `delta * B`, satisfies `|S| >= 1 / (delta * (delta B)^(D-1))`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::algebraic::AlgebraicNumber;
use super::complex::ComplexInterval;
use super::dyadic::Dyadic;
use super::intpoly;
use super::poly::Poly;
use super::Sign;
use crate::{RatPoly, Rational};

#[derive(Clone, Debug)]
enum ConjImage {
    Real,
    Gen(usize),
    /// `conj(g) = g^e` (roots of unity).
    Power(usize),
}

#[derive(Clone, Debug)]
struct Generator {
    value: AlgebraicNumber,
    /// Monic minimal polynomial, used to reduce powers.
    reducer: RatPoly,
    lc: BigInt,
    /// Upper bound on the modulus of every conjugate.
    bound: Rational,
    degree: usize,
    /// First generator sharing this minimal polynomial.
    group: usize,
    conj: ConjImage,
}

/// The generator list shared by a family of [`GenPoly`] values.
#[derive(Debug, Default)]
pub struct GenContext {
    gens: Vec<Generator>,
    refined: Mutex<Vec<AlgebraicNumber>>,
}

impl Clone for GenContext {
    fn clone(&self) -> GenContext {
        GenContext { gens: self.gens.clone(), refined: Mutex::new(self.refined.lock().unwrap().clone()) }
    }
}

impl GenContext {
    pub fn new() -> GenContext {
        GenContext::default()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn value(&self, g: usize) -> &AlgebraicNumber {
        &self.gens[g].value
    }

    fn push(&mut self, a: &AlgebraicNumber, conj: ConjImage) -> usize {
        let m = a.minpoly();
        let mrat = intpoly::to_rational(&m).monic();
        let bound = intpoly::cauchy_bound(&m);
        let idx = self.gens.len();
        let group = self.gens.iter().position(|g| g.value.minpoly() == m).unwrap_or(idx);
        self.gens.push(Generator {
            value: a.clone(),
            reducer: mrat,
            lc: m.lead(),
            bound,
            degree: m.degree().unwrap(),
            group,
            conj,
        });
        self.refined.get_mut().unwrap().push(a.clone());
        idx
    }

    /// Register `a` (deduplicated) and return it as an expression.
    pub fn add(&mut self, a: &AlgebraicNumber) -> GenPoly {
        if let Some(q) = a.as_rational() {
            return GenPoly::constant(q.clone());
        }
        GenPoly::gen(self.add_index(a))
    }

    fn add_index(&mut self, a: &AlgebraicNumber) -> usize {
        if let Some(i) = self.gens.iter().position(|g| g.value.equals(a)) {
            return i;
        }
        if a.is_real() {
            return self.push(a, ConjImage::Real);
        }
        let c = a.conj();
        let i = self.push(a, ConjImage::Real);
        let j = match self.gens.iter().position(|g| g.value.equals(&c)) {
            Some(j) => j,
            None => self.push(&c, ConjImage::Real),
        };
        self.gens[i].conj = ConjImage::Gen(j);
        self.gens[j].conj = ConjImage::Gen(i);
        i
    }

    /// `exp(2 pi i a / n)` as an expression; uses a single generator per order.
    pub fn root_of_unity(&mut self, n: u64, a: i64) -> GenPoly {
        let a = a.rem_euclid(n as i64) as u64;
        let g = a.gcd(&n);
        let (a, n) = (a / g, n / g);
        if n <= 2 {
            return GenPoly::constant(Rational::from_integer(if n == 1 { 1 } else { -1 }.into()));
        }
        let z = AlgebraicNumber::root_of_unity(n, 1);
        let i = match self.gens.iter().position(|g| g.value.equals(&z)) {
            Some(i) => i,
            None => self.push(&z, ConjImage::Power(n as usize - 1)),
        };
        GenPoly::gen(i).pow(a as u32)
    }

    fn enclosure(&self, g: usize, bits: u32) -> ComplexInterval {
        let mut r = self.refined.lock().unwrap();
        let a = r[g].refine(bits);
        let e = a.enclosure(bits);
        r[g] = a;
        e
    }
}

/// A polynomial with rational coefficients in the generators of a
/// [`GenContext`]. Exponent vectors are stored without trailing zeros, so a
/// value stays meaningful in any context extending the one it was built in.
#[derive(Clone, PartialEq, Eq)]
pub struct GenPoly {
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl fmt::Debug for GenPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{}*g{:?}", c, e)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn log2_upper(q: &Rational) -> i64 {
    if q.is_zero() {
        return i64::MIN / 4;
    }
    q.numer().bits() as i64 - q.denom().bits() as i64 + 1
}

/// Outcome of a certified evaluation.
#[derive(Clone, Debug)]
pub enum Certified {
    Zero,
    /// An enclosure excluding zero (in the real or the imaginary part).
    NonZero(ComplexInterval),
}

impl GenPoly {
    pub fn constant(q: Rational) -> GenPoly {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Vec::new(), q);
        }
        GenPoly { terms }
    }

    pub fn from_int(v: i64) -> GenPoly {
        GenPoly::constant(Rational::from_integer(v.into()))
    }

    pub fn gen(g: usize) -> GenPoly {
        let mut e = vec![0; g + 1];
        e[g] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, Rational::one());
        GenPoly { terms }
    }

    /// `p(g)` for a univariate rational polynomial.
    pub fn from_univariate(p: &RatPoly, g: &GenPoly) -> GenPoly {
        p.coeffs().iter().rev().fold(GenPoly::zero(), |acc, c| acc * g.clone() + GenPoly::constant(c.clone()))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, q: &Rational) -> GenPoly {
        if q.is_zero() {
            return GenPoly::zero();
        }
        GenPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), c * q)).collect() }
    }

    pub fn pow(&self, mut e: u32) -> GenPoly {
        let mut r = GenPoly::one();
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r * b.clone();
            }
            e >>= 1;
            if e > 0 {
                b = b.clone() * b;
            }
        }
        r
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = trim(e);
        let entry = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Reduce every generator power below the degree of its minimal polynomial.
    pub fn reduce(&self, ctx: &GenContext) -> GenPoly {
        let mut cur = self.clone();
        for (j, g) in ctx.gens.iter().enumerate() {
            if !cur.terms.keys().any(|e| e.get(j).copied().unwrap_or(0) as usize >= g.degree) {
                continue;
            }
            let mut next = GenPoly::zero();
            for (e, c) in cur.terms {
                let k = e.get(j).copied().unwrap_or(0) as usize;
                if k < g.degree {
                    next.add_term(e, c);
                    continue;
                }
                let r = x_pow_mod(k, &g.reducer);
                for (m, rc) in r.coeffs().iter().enumerate() {
                    let mut e2 = e.clone();
                    e2[j] = m as u32;
                    next.add_term(e2, &c * rc);
                }
            }
            cur = next;
        }
        cur
    }

    /// Complex conjugate.
    pub fn conj(&self, ctx: &GenContext) -> GenPoly {
        let mut out = GenPoly::zero();
        for (e, c) in &self.terms {
            let mut t = GenPoly::constant(c.clone());
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let img = match ctx.gens[j].conj {
                    ConjImage::Real => GenPoly::gen(j),
                    ConjImage::Gen(i) => GenPoly::gen(i),
                    ConjImage::Power(p) => GenPoly::gen(j).pow(p as u32),
                };
                t = t * img.pow(k);
            }
            out = out + t;
        }
        out.reduce(ctx)
    }

    pub fn real_part(&self, ctx: &GenContext) -> GenPoly {
        (self.clone() + self.conj(ctx)).scale(&Rational::new(1.into(), 2.into()))
    }

    /// Interval enclosure with generator boxes of width about `2^-bits`.
    pub fn eval(&self, ctx: &GenContext, bits: u32) -> ComplexInterval {
        let mut cache: Vec<Option<Vec<ComplexInterval>>> = vec![None; ctx.gens.len()];
        let mut acc = ComplexInterval::zero(bits);
        for (e, c) in &self.terms {
            let mut t = ComplexInterval::from_rational(c, bits);
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = cache[j].get_or_insert_with(|| vec![ctx.enclosure(j, bits)]);
                while pw.len() < k as usize {
                    let nxt = &pw[pw.len() - 1] * &pw[0];
                    pw.push(nxt);
                }
                t = &t * &pw[k as usize - 1];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Bits `s` such that a non-zero value has modulus at least `2^-s`, and an
    /// upper bound on `log2 |S|` over all conjugates.
    fn separation(&self, ctx: &GenContext) -> (i64, i64) {
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let nvars = self.terms.keys().map(|e| e.len()).max().unwrap_or(0);
        let mut delta = den;
        let mut used = vec![false; nvars];
        for j in 0..nvars {
            let maxe = self.terms.keys().map(|e| e.get(j).copied().unwrap_or(0)).max().unwrap_or(0);
            if maxe > 0 {
                used[j] = true;
                delta *= num_traits::pow(ctx.gens[j].lc.abs(), maxe as usize);
            }
        }
        let mut b = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.abs();
            for (j, &k) in e.iter().enumerate() {
                t *= num_traits::pow(ctx.gens[j].bound.clone(), k as usize);
            }
            b += t;
        }
        // Degree bound: j distinct roots of one irreducible of degree e
        // generate a field of degree at most e (e-1) ... (e-j+1).
        let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for j in 0..nvars {
            if used[j] {
                let g = &ctx.gens[j];
                let ent = groups.entry(g.group).or_insert((g.degree, 0));
                ent.1 += 1;
            }
        }
        let mut dlog: f64 = 0.0;
        for (e, cnt) in groups.values() {
            for i in 0..*cnt {
                dlog += ((e - i) as f64).log2();
            }
        }
        let d = 2f64.powf(dlog).round().max(1.0) as i64;
        let db = Rational::from_integer(delta.clone()) * &b;
        let ldb = log2_upper(&db).max(0);
        let ld = delta.bits() as i64;
        (ld + (d - 1) * ldb + 2, log2_upper(&b).max(0))
    }

    /// Exact classification: `Zero`, or an enclosure excluding zero.
    pub fn certify(&self, ctx: &GenContext) -> Certified {
        let s = self.reduce(ctx);
        if s.terms.is_empty() {
            return Certified::Zero;
        }
        if let Some(q) = s.as_constant() {
            return Certified::NonZero(ComplexInterval::from_rational(&q, 64));
        }
        let (sep, bbits) = s.separation(ctx);
        let mut prec = 64u32;
        loop {
            let w = prec + bbits as u32 + 32;
            let e = s.eval(ctx, w);
            if !e.re.contains_zero() || !e.im.contains_zero() {
                return Certified::NonZero(e);
            }
            let thr = Dyadic::pow2(-sep - 1);
            if e.re.mag() < thr && e.im.mag() < thr {
                return Certified::Zero;
            }
            assert!(prec < (1 << 22), "zero test exceeded precision budget");
            prec *= 2;
        }
    }

    pub fn is_zero_exact(&self, ctx: &GenContext) -> bool {
        matches!(self.certify(ctx), Certified::Zero)
    }

    /// Sign of a real-valued expression.
    pub fn sign_real(&self, ctx: &GenContext) -> Sign {
        let s = self.reduce(ctx);
        if let Some(q) = s.as_constant() {
            return if q.is_positive() {
                Sign::Positive
            } else if q.is_negative() {
                Sign::Negative
            } else {
                Sign::Zero
            };
        }
        let (sep, bbits) = s.separation(ctx);
        let mut prec = 64u32;
        loop {
            let w = prec + bbits as u32 + 32;
            let e = s.eval(ctx, w);
            if let Some(sg) = e.re.sign() {
                if sg != 0 {
                    return Sign::from_i32(sg);
                }
            }
            let thr = Dyadic::pow2(-sep - 1);
            if e.re.mag() < thr && e.im.mag() < thr {
                return Sign::Zero;
            }
            assert!(prec < (1 << 22), "sign test exceeded precision budget");
            prec *= 2;
        }
    }

    /// Whether the expression equals a given rational.
    pub fn equals_rational(&self, q: &Rational, ctx: &GenContext) -> bool {
        (self.clone() - GenPoly::constant(q.clone())).is_zero_exact(ctx)
    }
}

fn x_pow_mod(k: usize, m: &RatPoly) -> RatPoly {
    let mut r: RatPoly = Poly::one();
    let mut b: RatPoly = Poly::x();
    let mut e = k;
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

impl Add for GenPoly {
    type Output = GenPoly;
    fn add(mut self, o: GenPoly) -> GenPoly {
        for (e, c) in o.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for GenPoly {
    type Output = GenPoly;
    fn sub(self, o: GenPoly) -> GenPoly {
        self + (-o)
    }
}

impl Neg for GenPoly {
    type Output = GenPoly;
    fn neg(self) -> GenPoly {
        GenPoly { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}

impl Mul for GenPoly {
    type Output = GenPoly;
    fn mul(self, o: GenPoly) -> GenPoly {
        let mut out = GenPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let n = e1.len().max(e2.len());
                let e: Vec<u32> = (0..n)
                    .map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0))
                    .collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Zero for GenPoly {
    fn zero() -> GenPoly {
        GenPoly { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for GenPoly {
    fn one() -> GenPoly {
        GenPoly::constant(Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::from_i64;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn conjugate_cancellation() {
        let mut ctx = GenContext::new();
        let roots = AlgebraicNumber::roots_of_irreducible(&from_i64(&[4, 0, 1]));
        let a = ctx.add(&roots[0]);
        let b = ctx.add(&roots[1]);
        assert_eq!(ctx.len(), 2);
        // 2i + (-2i) = 0 and (2i)(-2i) = 4, without knowing which is which.
        assert!((a.clone() + b.clone()).is_zero_exact(&ctx));
        assert!((a.clone() * b.clone()).equals_rational(&q(4), &ctx));
        assert!((a.clone() * a.clone()).equals_rational(&q(-4), &ctx));
        assert!(!(a.clone() - b.clone()).is_zero_exact(&ctx));
        assert_eq!((a.clone() * a.conj(&ctx)).sign_real(&ctx), Sign::Positive);
    }

    #[test]
    fn sqrt_identities() {
        let mut ctx = GenContext::new();
        let r2 = AlgebraicNumber::roots_of_irreducible(&from_i64(&[-2, 0, 1]));
        let r3 = AlgebraicNumber::roots_of_irreducible(&from_i64(&[-3, 0, 1]));
        let s2 = ctx.add(&r2[1]);
        let s3 = ctx.add(&r3[1]);
        // (s2 + s3)^2 - 5 - 2 s2 s3 = 0
        let e = (s2.clone() + s3.clone()).pow(2) - GenPoly::from_int(5) - (s2.clone() * s3.clone()).scale(&q(2));
        assert!(e.is_zero_exact(&ctx));
        // s2 s3 - 2449/1000 > 0 (sqrt 6 = 2.44948...)
        let f = s2 * s3 - GenPoly::constant(Rational::new(2449.into(), 1000.into()));
        assert_eq!(f.sign_real(&ctx), Sign::Positive);
    }

    #[test]
    fn roots_of_unity() {
        let mut ctx = GenContext::new();
        let i = ctx.root_of_unity(4, 1);
        assert!((i.clone() * i.clone()).equals_rational(&q(-1), &ctx));
        let z = ctx.root_of_unity(12, 1);
        assert_eq!(ctx.len(), 2);
        // zeta_12^3 = i and zeta + conj(zeta) = sqrt 3
        assert!((z.pow(3) - i).is_zero_exact(&ctx));
        let c = z.clone() + z.conj(&ctx);
        assert!((c.clone() * c).equals_rational(&q(3), &ctx));
    }
}
