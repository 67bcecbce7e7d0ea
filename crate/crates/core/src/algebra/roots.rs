//! Certified isolation of all complex roots of a square-free integer polynomial.
//!
//! Approximations come from Aberth iteration in dyadic fixed precision. They are
//! certified with the inclusion disks `|z - z_k| <= n |W_k|`, where
//! `W_k = f(z_k) / (lc * prod_{j != k}(z_k - z_j))`: when these disks are
//! pairwise disjoint each contains exactly one root.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::complex::{CFloat, ComplexInterval};
use super::dyadic::{Dyadic, Round};
use super::interval::Interval;
use crate::{IntPoly, Rational};

/// A disk known to contain exactly one root of the polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RootDisk {
    pub re: Dyadic,
    pub im: Dyadic,
    /// Radius upper bound.
    pub radius: Dyadic,
    /// Certified real root (the disk is centred on the real axis).
    pub real: bool,
}

impl RootDisk {
    /// Bounding box of the disk.
    pub fn enclosure(&self, prec: u32) -> ComplexInterval {
        let r = &self.radius;
        let im = if self.real {
            Interval::zero(prec)
        } else {
            Interval::new(self.im.sub(r), self.im.add(r), prec)
        };
        ComplexInterval::new(Interval::new(self.re.sub(r), self.re.add(r), prec), im)
    }

    /// Whether a complex rectangle meets this disk (conservatively via its box).
    pub fn meets_box(&self, b: &ComplexInterval) -> bool {
        let dx = dist_to_interval(&self.re, &b.re);
        let dy = dist_to_interval(&self.im, &b.im);
        dx.mul(&dx).add(&dy.mul(&dy)) <= self.radius.mul(&self.radius)
    }
}

fn dist_to_interval(x: &Dyadic, i: &Interval) -> Dyadic {
    if x < &i.lo {
        i.lo.sub(x)
    } else if x > &i.hi {
        x.sub(&i.hi)
    } else {
        Dyadic::zero()
    }
}

fn eval_cf(coeffs: &[Dyadic], z: &CFloat, prec: u32) -> (CFloat, CFloat) {
    // Horner for f and f'.
    let mut f = CFloat::zero();
    let mut df = CFloat::zero();
    for c in coeffs.iter().rev() {
        df = df.mul(z, prec).add(&f);
        f = f.mul(z, prec).add(&CFloat::new(c.clone(), Dyadic::zero()));
        f = f.round(prec);
        df = df.round(prec);
    }
    (f, df)
}

fn initial_guesses(p: &IntPoly) -> Vec<CFloat> {
    let n = p.degree().unwrap();
    let a0 = p.coeff(0).abs();
    let an = p.lead().abs();
    let r = if a0.is_zero() {
        1.0
    } else {
        let ratio = Rational::new(a0, an);
        let lr = log2_rational(&ratio);
        2f64.powf(lr / n as f64)
    };
    let r = if r.is_finite() && r > 0.0 { r } else { 1.0 };
    (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            CFloat::from_f64(r * ang.cos(), r * ang.sin())
        })
        .collect()
}

fn log2_rational(q: &Rational) -> f64 {
    let n = q.numer().abs();
    let d = q.denom().clone();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = |x: &BigInt, b: i64| -> f64 {
        if b > 60 {
            (x >> ((b - 60) as usize)).to_f64().unwrap().log2() + (b - 60) as f64
        } else {
            x.to_f64().unwrap().log2()
        }
    };
    shift(&n, nb) - shift(&d, db)
}

/// One sweep of Aberth iteration; returns the largest correction size (log2).
fn aberth_sweep(coeffs: &[Dyadic], zs: &mut [CFloat], prec: u32) -> i64 {
    let n = zs.len();
    let one = CFloat::new(Dyadic::one(), Dyadic::zero());
    let mut worst = i64::MIN;
    for k in 0..n {
        let (f, df) = eval_cf(coeffs, &zs[k], prec);
        if f.re.is_zero() && f.im.is_zero() {
            continue;
        }
        if df.re.is_zero() && df.im.is_zero() {
            // Perturb off a critical point.
            zs[k] = zs[k].add(&CFloat::new(Dyadic::pow2(-20), Dyadic::pow2(-21)));
            worst = worst.max(0);
            continue;
        }
        let newton = f.div(&df, prec);
        let mut s = CFloat::zero();
        for j in 0..n {
            if j == k {
                continue;
            }
            let d = zs[k].sub(&zs[j]);
            if d.re.is_zero() && d.im.is_zero() {
                continue;
            }
            s = s.add(&one.div(&d, prec));
        }
        let denom = one.sub(&newton.mul(&s, prec));
        let w = if denom.re.is_zero() && denom.im.is_zero() { newton } else { newton.div(&denom, prec) };
        zs[k] = zs[k].sub(&w).round(prec);
        let m = w.norm_sqr();
        if let Some(l) = m.floor_log2() {
            worst = worst.max(l / 2);
        }
    }
    worst
}

/// Certify the current approximations. Returns disks when all inclusion disks
/// are disjoint and every root's realness is resolved.
fn certify(p: &IntPoly, zs: &[CFloat], prec: u32) -> Option<Vec<RootDisk>> {
    let n = zs.len();
    let w = 2 * prec + 64;
    let lc = Interval::point(Dyadic::from_int(p.lead()), w);
    let coeffs: Vec<Interval> = p.coeffs().iter().map(|c| Interval::point(Dyadic::from_int(c.clone()), w)).collect();
    let zi: Vec<ComplexInterval> = zs
        .iter()
        .map(|z| ComplexInterval::new(Interval::point(z.re.clone(), w), Interval::point(z.im.clone(), w)))
        .collect();
    let mut radii = Vec::with_capacity(n);
    for k in 0..n {
        let mut f = ComplexInterval::zero(w);
        for c in coeffs.iter().rev() {
            f = &(&f * &zi[k]) + &ComplexInterval::real(c.clone());
        }
        let mut prod = ComplexInterval::real(lc.clone());
        for j in 0..n {
            if j != k {
                prod = &prod * &(&zi[k] - &zi[j]);
            }
        }
        let den = prod.norm_sqr();
        if den.contains_zero() {
            return None;
        }
        let num = f.norm_sqr();
        let ratio_hi = num.hi.div_round(&den.lo, 64, Round::Up);
        let r = ratio_hi.sqrt_round(64, Round::Up).mul(&Dyadic::from_int(n as i64));
        // Avoid zero radii so boxes stay honest.
        let r = if r.is_zero() { Dyadic::pow2(-(2 * prec as i64)) } else { r };
        radii.push(r.round(64, Round::Up));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = zs[i].re.sub(&zs[j].re);
            let dy = zs[i].im.sub(&zs[j].im);
            let d2 = dx.mul(&dx).add(&dy.mul(&dy));
            let s = radii[i].add(&radii[j]);
            if d2 <= s.mul(&s) {
                return None;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let meets_axis = zs[k].im.abs() <= radii[k];
        let real = if meets_axis {
            // Mirror disk must meet no other disk.
            let mirrored_im = zs[k].im.neg();
            let clash = (0..n).any(|j| {
                if j == k {
                    return false;
                }
                let dx = zs[k].re.sub(&zs[j].re);
                let dy = mirrored_im.sub(&zs[j].im);
                let s = radii[k].add(&radii[j]);
                dx.mul(&dx).add(&dy.mul(&dy)) <= s.mul(&s)
            });
            if clash {
                return None;
            }
            true
        } else {
            false
        };
        if real && !zs[k].im.is_zero() {
            // The root is real: recentre on the axis to get a symmetric disk.
            let r = radii[k].add(&zs[k].im.abs());
            out.push(RootDisk { re: zs[k].re.clone(), im: Dyadic::zero(), radius: r, real: true });
        } else {
            out.push(RootDisk { re: zs[k].re.clone(), im: zs[k].im.clone(), radius: radii[k].clone(), real });
        }
    }
    // Recentred real disks grew; re-check disjointness.
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = out[i].re.sub(&out[j].re);
            let dy = out[i].im.sub(&out[j].im);
            let s = out[i].radius.add(&out[j].radius);
            if dx.mul(&dx).add(&dy.mul(&dy)) <= s.mul(&s) {
                return None;
            }
        }
    }
    Some(out)
}

/// Make approximations conjugation-symmetric: snap near-real values to the
/// axis and pair the rest with exact conjugates.
fn symmetrize(zs: &mut [CFloat], prec: u32) {
    let n = zs.len();
    let tiny = Dyadic::pow2(-(prec as i64) / 2);
    let mut used = vec![false; n];
    for k in 0..n {
        if used[k] {
            continue;
        }
        let scale = Dyadic::max(&Dyadic::one(), &zs[k].re.abs());
        if zs[k].im.abs() <= tiny.mul(&scale) {
            zs[k].im = Dyadic::zero();
            used[k] = true;
            continue;
        }
        let target = CFloat::new(zs[k].re.clone(), zs[k].im.neg());
        let mut best: Option<(usize, Dyadic)> = None;
        for j in 0..n {
            if j == k || used[j] {
                continue;
            }
            let d = zs[j].sub(&target).norm_sqr();
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((j, d));
            }
        }
        used[k] = true;
        if let Some((j, d)) = best {
            if d <= zs[k].im.mul(&zs[k].im) {
                used[j] = true;
                let (top, bot) = if zs[k].im.signum() > 0 { (k, j) } else { (j, k) };
                let re = zs[top].re.add(&zs[bot].re).mul_pow2(-1).round(prec, Round::Down);
                let im = zs[top].im.sub(&zs[bot].im).mul_pow2(-1).abs().round(prec, Round::Down);
                zs[top] = CFloat::new(re.clone(), im.clone());
                zs[bot] = CFloat::new(re, im.neg());
            }
        }
    }
}

/// Isolate all complex roots of a square-free integer polynomial of degree >= 1.
///
/// Each returned disk holds exactly one root and has radius at most `2^-bits`.
/// The order follows the internal iteration and is not meaningful.
pub fn isolate(p: &IntPoly, bits: u32) -> Vec<RootDisk> {
    let n = p.degree().expect("isolate: zero polynomial");
    assert!(n >= 1, "isolate: constant polynomial");
    let target = Dyadic::pow2(-(bits as i64));
    if n == 1 {
        let q = Rational::new(-p.coeff(0), p.coeff(1));
        let mag = q.numer().bits() as u32 + 2;
        let lo = Dyadic::from_rational(&q, bits + 8 + mag, Round::Down);
        let hi = Dyadic::from_rational(&q, bits + 8 + mag, Round::Up);
        let r = Dyadic::max(&hi.sub(&lo), &Dyadic::pow2(-(bits as i64) - 8));
        return vec![RootDisk { re: lo, im: Dyadic::zero(), radius: r, real: true }];
    }
    let coeffs: Vec<Dyadic> = p.coeffs().iter().map(|c| Dyadic::from_int(c.clone())).collect();
    let mut zs = initial_guesses(p);
    let mut prec: u32 = 64;
    // Coarse convergence.
    for _ in 0..2000 {
        let w = aberth_sweep(&coeffs, &mut zs, prec);
        if w < -40 {
            break;
        }
    }
    loop {
        for _ in 0..200 {
            let w = aberth_sweep(&coeffs, &mut zs, prec);
            let scale = zs.iter().map(|z| z.norm_sqr().floor_log2().unwrap_or(0) / 2).max().unwrap_or(0).max(0);
            if w < scale - prec as i64 + 16 {
                break;
            }
        }
        symmetrize(&mut zs, prec);
        if let Some(disks) = certify(p, &zs, prec) {
            if disks.iter().all(|d| d.radius <= target) {
                return disks;
            }
        }
        assert!(prec < (1 << 20), "root isolation did not converge");
        prec = (prec * 2).max(bits + 32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::from_i64;

    fn contains(d: &RootDisk, re: f64, im: f64) -> bool {
        let dx = d.re.to_f64() - re;
        let dy = d.im.to_f64() - im;
        (dx * dx + dy * dy).sqrt() <= d.radius.to_f64() + 1e-300
    }

    #[test]
    fn isolates_quadratics() {
        let d = isolate(&from_i64(&[4, 0, 1]), 30);
        assert_eq!(d.len(), 2);
        assert!(d.iter().any(|x| contains(x, 0.0, 2.0) && !x.real));
        assert!(d.iter().any(|x| contains(x, 0.0, -2.0) && !x.real));
        let g = isolate(&from_i64(&[-1, -1, 1]), 40);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(g.iter().all(|x| x.real));
        assert!(g.iter().any(|x| contains(x, phi, 0.0)));
        assert!(g.iter().any(|x| contains(x, 1.0 - phi, 0.0)));
    }

    #[test]
    fn isolates_higher_degree() {
        // z^5 - z - 1: one real root
        let d = isolate(&from_i64(&[-1, -1, 0, 0, 0, 1]), 60);
        assert_eq!(d.len(), 5);
        assert_eq!(d.iter().filter(|x| x.real).count(), 1);
        // Wilkinson-like: (z-1)(z-2)...(z-8)
        let mut p = from_i64(&[1]);
        for k in 1..=8 {
            p = &p * &from_i64(&[-k, 1]);
        }
        let d = isolate(&p, 50);
        assert!(d.iter().all(|x| x.real));
        for k in 1..=8 {
            assert!(d.iter().any(|x| contains(x, k as f64, 0.0)));
        }
    }
}
