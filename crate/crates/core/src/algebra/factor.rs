//! Factorization over Z: Cantor-Zassenhaus modulo a prime, Hensel lifting and
//! subset recombination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::intpoly::{self, primitive};
use super::poly::Poly;
use crate::IntPoly;

// ---------- arithmetic in F_p[x], coefficients ascending, trimmed ----------

type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_from(p: &IntPoly, m: u64) -> Fp {
    let mb = BigInt::from(m);
    trim(p.coeffs().iter().map(|c| c.mod_floor(&mb).to_u64().unwrap()).collect())
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn fp_sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    trim((0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect())
}

fn fp_mul(a: &Fp, b: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut v = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            v[i + j] = (v[i + j] + x * y) % p;
        }
    }
    trim(v)
}

fn fp_divrem(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp) {
    assert!(!b.is_empty());
    let db = b.len() - 1;
    if a.len() <= db {
        return (vec![], a.clone());
    }
    let inv = inv_mod(b[db], p);
    let mut r = a.clone();
    let mut q = vec![0u64; a.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db] * inv % p;
        q[k] = c;
        if c != 0 {
            for (j, &y) in b.iter().enumerate() {
                r[k + j] = (r[k + j] + p - c * y % p) % p;
            }
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

fn fp_rem(a: &Fp, b: &Fp, p: u64) -> Fp {
    fp_divrem(a, b, p).1
}

fn fp_monic(a: &Fp, p: u64) -> Fp {
    if a.is_empty() {
        return vec![];
    }
    let inv = inv_mod(*a.last().unwrap(), p);
    a.iter().map(|&x| x * inv % p).collect()
}

fn fp_gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let mut x = a.clone();
    let mut y = b.clone();
    while !y.is_empty() {
        let r = fp_rem(&x, &y, p);
        x = y;
        y = r;
    }
    fp_monic(&x, p)
}

/// `(g, s, t)` with `s a + t b = g`, g monic.
fn fp_xgcd(a: &Fp, b: &Fp, p: u64) -> (Fp, Fp, Fp) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![1u64], vec![]);
    let (mut t0, mut t1) = (vec![], vec![1u64]);
    while !r1.is_empty() {
        let (q, r) = fp_divrem(&r0, &r1, p);
        r0 = r1;
        r1 = r;
        let s2 = fp_sub(&s0, &fp_mul(&q, &s1, p), p);
        s0 = s1;
        s1 = s2;
        let t2 = fp_sub(&t0, &fp_mul(&q, &t1, p), p);
        t0 = t1;
        t1 = t2;
    }
    let inv = inv_mod(*r0.last().unwrap(), p);
    let sc = |v: &Fp| trim(v.iter().map(|&x| x * inv % p).collect());
    (sc(&r0), sc(&s0), sc(&t0))
}

fn fp_powmod(base: &Fp, mut e: BigInt, m: &Fp, p: u64) -> Fp {
    let mut r = vec![1u64];
    let mut b = fp_rem(base, m, p);
    let two = BigInt::from(2);
    while e > BigInt::zero() {
        if e.is_odd() {
            r = fp_rem(&fp_mul(&r, &b, p), m, p);
        }
        e /= &two;
        if e > BigInt::zero() {
            b = fp_rem(&fp_mul(&b, &b, p), m, p);
        }
    }
    r
}

fn fp_derivative(a: &Fp, p: u64) -> Fp {
    trim(a.iter().enumerate().skip(1).map(|(k, &c)| (k as u64 % p) * c % p).collect())
}

/// Distinct-degree factorization of a monic square-free polynomial.
fn ddf(f: &Fp, p: u64) -> Vec<(Fp, usize)> {
    let mut out = Vec::new();
    let mut f = f.clone();
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let mut i = 1;
    while f.len() - 1 >= 2 * i {
        h = fp_powmod(&h, BigInt::from(p), &f, p);
        let g = fp_gcd(&fp_sub(&h, &x, p), &f, p);
        if g.len() > 1 {
            out.push((g.clone(), i));
            f = fp_divrem(&f, &g, p).0;
            h = fp_rem(&h, &f, p);
        }
        i += 1;
    }
    if f.len() > 1 {
        let d = f.len() - 1;
        out.push((f, d));
    }
    out
}

/// Equal-degree splitting (p odd).
fn edf(f: &Fp, d: usize, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let n = f.len() - 1;
    if n == d {
        return vec![f.clone()];
    }
    let e: BigInt = (num_traits::Pow::pow(BigInt::from(p), d as u32) - BigInt::one()) / BigInt::from(2);
    loop {
        let a: Fp = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.len() < 2 {
            continue;
        }
        let b = fp_sub(&fp_powmod(&a, e.clone(), f, p), &vec![1u64], p);
        let g = fp_gcd(&b, f, p);
        if g.len() > 1 && g.len() < f.len() {
            let h = fp_divrem(f, &g, p).0;
            let mut out = edf(&g, d, p, rng);
            out.extend(edf(&fp_monic(&h, p), d, p, rng));
            return out;
        }
    }
}

fn factor_mod_p(f: &Fp, p: u64, rng: &mut ChaCha8Rng) -> Vec<Fp> {
    let f = fp_monic(f, p);
    let mut out = Vec::new();
    for (g, d) in ddf(&f, p) {
        out.extend(edf(&g, d, p, rng));
    }
    out
}

// ---------- Hensel lifting over Z / p^k ----------

fn sym_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn zp_reduce(a: &IntPoly, m: &BigInt) -> IntPoly {
    Poly::new(a.coeffs().iter().map(|c| c.mod_floor(m)).collect())
}

fn to_int(a: &Fp) -> IntPoly {
    Poly::new(a.iter().map(|&x| BigInt::from(x)).collect())
}

/// Lift `f = g*h (mod p)` to `(mod p^k)` with g, h monic; `f` monic modulo `p^k`.
fn hensel_pair(f: &IntPoly, g: &Fp, h: &Fp, p: u64, modulus: &BigInt) -> (IntPoly, IntPoly) {
    let (_, s, t) = fp_xgcd(g, h, p);
    let pb = BigInt::from(p);
    let mut gz = to_int(g);
    let mut hz = to_int(h);
    let mut m = pb.clone();
    while &m < modulus {
        let prod = &gz * &hz;
        let diff = zp_reduce(&(f - &prod), modulus);
        // diff is divisible by m
        let e: IntPoly = Poly::new(diff.coeffs().iter().map(|c| (c / &m).mod_floor(&pb)).collect());
        let ef = fp_from(&e, p);
        let gp = fp_rem(&fp_mul(&t, &ef, p), g, p);
        let hp = fp_rem(&fp_mul(&s, &ef, p), h, p);
        gz = zp_reduce(&(&gz + &(&to_int(&gp) * &Poly::constant(m.clone()))), modulus);
        hz = zp_reduce(&(&hz + &(&to_int(&hp) * &Poly::constant(m.clone()))), modulus);
        m *= &pb;
    }
    (gz, hz)
}

fn hensel_multi(f: &IntPoly, factors: &[Fp], p: u64, modulus: &BigInt) -> Vec<IntPoly> {
    if factors.len() == 1 {
        return vec![zp_reduce(f, modulus)];
    }
    let g = factors[0].clone();
    let mut h: Fp = vec![1];
    for fac in &factors[1..] {
        h = fp_mul(&h, fac, p);
    }
    let (gl, hl) = hensel_pair(f, &g, &h, p, modulus);
    let mut out = vec![gl];
    out.extend(hensel_multi(&hl, &factors[1..], p, modulus));
    out
}

fn is_small_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn norm2_ceil(f: &IntPoly) -> BigInt {
    let s: BigInt = f.coeffs().iter().map(|c| c * c).sum();
    s.sqrt() + 1
}

/// Factor a primitive square-free polynomial of degree >= 1 into irreducibles.
fn factor_squarefree(f: &IntPoly, rng: &mut ChaCha8Rng) -> Vec<IntPoly> {
    let n = f.degree().unwrap();
    if n <= 1 {
        return vec![primitive(f)];
    }
    // Strip a root at zero.
    if f.coeff(0).is_zero() {
        let rest = Poly::new(f.coeffs()[1..].to_vec());
        let mut out = vec![intpoly::from_i64(&[0, 1])];
        if rest.degree().unwrap() >= 1 {
            out.extend(factor_squarefree(&rest, rng));
        }
        return out;
    }
    let lc = f.lead();
    // Pick the prime with the fewest modular factors among a few candidates.
    let mut best: Option<(u64, Vec<Fp>)> = None;
    let mut tried = 0;
    let mut cand = 3u64;
    while tried < 6 {
        cand += 2;
        if !is_small_prime(cand) || (&lc % cand).is_zero() {
            continue;
        }
        let fp = fp_from(f, cand);
        if fp.len() != n + 1 {
            continue;
        }
        let g = fp_gcd(&fp, &fp_derivative(&fp, cand), cand);
        if g.len() > 1 {
            continue;
        }
        tried += 1;
        let facs = factor_mod_p(&fp, cand, rng);
        if facs.len() == 1 {
            return vec![primitive(f)];
        }
        if best.as_ref().is_none_or(|(_, b)| facs.len() < b.len()) {
            best = Some((cand, facs));
        }
    }
    let (p, facs) = best.unwrap();
    // Mignotte-type bound on coefficients of lc * (any factor).
    let bound = BigInt::from(2) * lc.abs() * (BigInt::one() << n) * norm2_ceil(f) * lc.abs();
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    while modulus <= bound {
        modulus *= &pb;
    }
    // Make f monic modulo p^k.
    let lc_inv = lc.modinv(&modulus).expect("leading coefficient invertible");
    let fmonic = zp_reduce(&(f * &Poly::constant(lc_inv)), &modulus);
    let lifted = hensel_multi(&fmonic, &facs, p, &modulus);

    // Recombination.
    let mut remaining: Vec<IntPoly> = lifted;
    let mut fcur = f.clone();
    let mut out = Vec::new();
    let mut size = 1;
    while 2 * size <= remaining.len() {
        let mut found = false;
        let idx: Vec<usize> = (0..remaining.len()).collect();
        for subset in combinations(&idx, size) {
            let lcur = fcur.lead();
            let mut g = Poly::constant(lcur.clone());
            for &i in &subset {
                g = zp_reduce(&(&g * &remaining[i]), &modulus);
            }
            let g = Poly::new(g.coeffs().iter().map(|c| sym_mod(c, &modulus)).collect());
            let g = primitive(&g);
            if g.degree().unwrap_or(0) == 0 {
                continue;
            }
            if let Some(q) = intpoly::exact_div(&fcur, &g) {
                out.push(g);
                fcur = q;
                remaining = remaining
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !subset.contains(i))
                    .map(|(_, v)| v)
                    .collect();
                found = true;
                break;
            }
        }
        if !found {
            size += 1;
        }
    }
    if fcur.degree().unwrap_or(0) >= 1 {
        out.push(primitive(&fcur));
    }
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Irreducible factorization over Z with multiplicities. Factors are primitive
/// with positive leading coefficient; constants are dropped. The output is
/// sorted by degree and then coefficients, so it is deterministic.
pub fn factor(p: &IntPoly) -> Vec<(IntPoly, u32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for (g, mult) in intpoly::squarefree_decomposition(&primitive(p)) {
        for h in factor_squarefree(&g, &mut rng) {
            out.push((h, mult));
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.coeffs().cmp(b.0.coeffs()))
    });
    out
}

/// Whether a primitive polynomial of positive degree is irreducible over Q.
pub fn is_irreducible(p: &IntPoly) -> bool {
    let f = factor(p);
    f.len() == 1 && f[0].1 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::{cyclotomic, from_i64};

    fn product(fs: &[(IntPoly, u32)]) -> IntPoly {
        let mut r = Poly::constant(BigInt::one());
        for (f, m) in fs {
            r = &r * &f.pow(*m);
        }
        r
    }

    #[test]
    fn small_factorizations() {
        let f = from_i64(&[-1, 0, 0, 0, 1]); // z^4 - 1
        let fs = factor(&f);
        assert_eq!(fs.len(), 3);
        assert_eq!(product(&fs), f);
        let g = from_i64(&[-1, -1, 1]);
        assert!(is_irreducible(&g));
        let sw = from_i64(&[1, 0, -10, 0, 1]); // Swinnerton-Dyer, irreducible but splits mod every p
        assert!(is_irreducible(&sw));
    }

    #[test]
    fn non_monic_and_repeated() {
        // (2z+1)^2 (3z^2 - 2)(z^3 + z + 5)
        let a = from_i64(&[1, 2]);
        let b = from_i64(&[-2, 0, 3]);
        let c = from_i64(&[5, 1, 0, 1]);
        let f = &(&a.pow(2) * &b) * &c;
        let fs = factor(&f);
        assert_eq!(fs.len(), 3);
        assert_eq!(product(&fs), f);
        assert!(fs.contains(&(a, 2)));
    }

    #[test]
    fn cyclotomic_products() {
        let z12 = from_i64(&[-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let fs = factor(&z12);
        assert_eq!(fs.len(), 6);
        for (g, _) in &fs {
            assert!([1u64, 2, 3, 4, 6, 12].iter().any(|&n| cyclotomic(n) == *g));
        }
    }
}
