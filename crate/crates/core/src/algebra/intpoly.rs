//! Helpers for polynomials over Z and Q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::dyadic::Dyadic;
use super::poly::Poly;
use crate::{IntPoly, RatPoly, Rational};

pub fn content(p: &IntPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in p.coeffs() {
        g = g.gcd(c);
    }
    g
}

/// Primitive part with positive leading coefficient.
pub fn primitive(p: &IntPoly) -> IntPoly {
    if p.is_zero_poly() {
        return p.clone();
    }
    let mut g = content(p);
    if p.lead().is_negative() {
        g = -g;
    }
    Poly::new(p.coeffs().iter().map(|c| c / &g).collect())
}

/// Clear denominators and return the primitive integer polynomial.
pub fn from_rational(p: &RatPoly) -> IntPoly {
    let mut l = BigInt::one();
    for c in p.coeffs() {
        l = l.lcm(c.denom());
    }
    let v: Vec<BigInt> = p.coeffs().iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
    primitive(&Poly::new(v))
}

pub fn to_rational(p: &IntPoly) -> RatPoly {
    p.map(|c| Rational::from_integer(c.clone()))
}

pub fn from_i64(v: &[i64]) -> IntPoly {
    Poly::new(v.iter().map(|&x| BigInt::from(x)).collect())
}

/// Monic gcd over Q, returned as a primitive integer polynomial.
pub fn gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let g = Poly::gcd(&to_rational(a), &to_rational(b));
    if g.is_zero_poly() {
        return Poly::new(vec![]);
    }
    from_rational(&g)
}

/// Exact quotient `a / b` over Q, if the division is exact and integral.
pub fn exact_div(a: &IntPoly, b: &IntPoly) -> Option<IntPoly> {
    let (q, r) = to_rational(a).div_rem(&to_rational(b));
    if !r.is_zero_poly() {
        return None;
    }
    if q.coeffs().iter().all(|c| c.is_integer()) {
        Some(q.map(|c| c.to_integer()))
    } else {
        None
    }
}

/// Whether `b` divides `a` over Q.
pub fn divides(b: &IntPoly, a: &IntPoly) -> bool {
    to_rational(a).rem(&to_rational(b)).is_zero_poly()
}

/// Square-free decomposition (Yun): pairs `(g_i, i)` with `p = c * prod g_i^i`.
pub fn squarefree_decomposition(p: &IntPoly) -> Vec<(IntPoly, u32)> {
    let f = to_rational(p);
    if f.degree().unwrap_or(0) == 0 {
        return vec![];
    }
    let mut out = Vec::new();
    let fp = f.derivative();
    let a = Poly::gcd(&f, &fp);
    let mut b = f.div_rem(&a).0;
    let mut c = fp.div_rem(&a).0;
    let mut d = &c - &b.derivative();
    let mut i = 1;
    loop {
        let g = Poly::gcd(&b, &d);
        if g.degree().unwrap_or(0) > 0 {
            out.push((from_rational(&g), i));
        }
        b = b.div_rem(&g).0;
        if b.degree().unwrap_or(0) == 0 {
            break;
        }
        c = d.div_rem(&g).0;
        d = &c - &b.derivative();
        i += 1;
    }
    out
}

/// Square-free part (product of distinct irreducible factors), primitive.
pub fn squarefree_part(p: &IntPoly) -> IntPoly {
    let f = to_rational(p);
    let g = Poly::gcd(&f, &f.derivative());
    from_rational(&f.div_rem(&g).0)
}

/// Upper bound on the modulus of every complex root (Cauchy).
pub fn cauchy_bound(p: &IntPoly) -> Rational {
    let lead = Rational::from_integer(p.lead().abs());
    let n = p.degree().unwrap_or(0);
    let mut m = Rational::zero();
    for c in &p.coeffs()[..n] {
        let v = Rational::from_integer(c.abs()) / &lead;
        if v > m {
            m = v;
        }
    }
    m + Rational::one()
}

pub fn eval_rational(p: &IntPoly, x: &Rational) -> Rational {
    p.eval_with(x, |c| Rational::from_integer(c.clone()))
}

pub fn eval_dyadic(p: &IntPoly, x: &Dyadic) -> Dyadic {
    let mut acc = Dyadic::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&Dyadic::from_int(c.clone()));
    }
    acc
}

/// `p(-z)`, normalized to positive leading coefficient.
pub fn negate_var(p: &IntPoly) -> IntPoly {
    let v: Vec<BigInt> = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { -c.clone() } else { c.clone() })
        .collect();
    primitive(&Poly::new(v))
}

/// `p(z^k)`.
pub fn inflate(p: &IntPoly, k: usize) -> IntPoly {
    let mut v = vec![BigInt::zero(); p.degree().map_or(0, |d| d * k + 1)];
    for (i, c) in p.coeffs().iter().enumerate() {
        v[i * k] = c.clone();
    }
    Poly::new(v)
}

fn mobius(n: u64) -> i32 {
    let mut m = n;
    let mut res = 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            res = -res;
        }
        d += 1;
    }
    if m > 1 {
        res = -res;
    }
    res
}

pub fn euler_phi(n: u64) -> u64 {
    let mut m = n;
    let mut res = n;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            while m % d == 0 {
                m /= d;
            }
            res -= res / d;
        }
        d += 1;
    }
    if m > 1 {
        res -= res / m;
    }
    res
}

/// The n-th cyclotomic polynomial.
pub fn cyclotomic(n: u64) -> IntPoly {
    assert!(n >= 1);
    let mut num = Poly::constant(BigInt::one());
    let mut den = Poly::constant(BigInt::one());
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let mu = mobius(n / d);
        if mu == 0 {
            continue;
        }
        let mut v = vec![BigInt::zero(); d as usize + 1];
        v[0] = BigInt::from(-1);
        v[d as usize] = BigInt::one();
        let term = Poly::new(v);
        if mu == 1 {
            num = &num * &term;
        } else {
            den = &den * &term;
        }
    }
    exact_div(&num, &den).expect("cyclotomic division is exact")
}

/// Orders `n` whose cyclotomic polynomial has degree `d`.
pub fn orders_with_phi(d: u64) -> Vec<u64> {
    // phi(n) >= sqrt(n/2), so n <= 2 d^2.
    let limit = 2 * d * d + 2;
    (1..=limit).filter(|&n| euler_phi(n) == d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), from_i64(&[-1, 1]));
        assert_eq!(cyclotomic(2), from_i64(&[1, 1]));
        assert_eq!(cyclotomic(4), from_i64(&[1, 0, 1]));
        assert_eq!(cyclotomic(6), from_i64(&[1, -1, 1]));
        assert_eq!(cyclotomic(12), from_i64(&[1, 0, -1, 0, 1]));
        assert_eq!(euler_phi(12), 4);
        assert!(orders_with_phi(2).contains(&4));
    }

    #[test]
    fn squarefree() {
        // (z-1)^2 (z+2)
        let p = &from_i64(&[-1, 1]).pow(2) * &from_i64(&[2, 1]);
        let d = squarefree_decomposition(&p);
        assert_eq!(d, vec![(from_i64(&[2, 1]), 1), (from_i64(&[-1, 1]), 2)]);
        assert_eq!(squarefree_part(&p), from_i64(&[-2, 1, 1]));
    }

    #[test]
    fn bounds_and_prims() {
        let p = from_i64(&[4, 0, 2]);
        assert_eq!(primitive(&p), from_i64(&[2, 0, 1]));
        assert_eq!(cauchy_bound(&from_i64(&[4, 0, 1])), Rational::from_integer(5.into()));
        assert_eq!(negate_var(&from_i64(&[1, 1])), from_i64(&[-1, 1]));
    }
}
