//! The trajectory cone of an invertible system and its rays.
//!
//! Coordinate `(i, j)` of a ray point is `t^(b_i) p_i Q_ij(u)`, where
//! `u = log_tau t` and `tau` is the dominant modulus (its inverse when the
//! system contracts). In the unit-modulus regime `u = t` and all `b_i = 0`.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::algebraic::AlgebraicNumber;
use crate::algebra::complex::ComplexInterval;
use crate::algebra::dyadic::Dyadic;
use crate::algebra::genpoly::{GenContext, GenPoly};
use crate::algebra::interval::Interval;
use crate::algebra::matrix::Matrix;
use crate::algebra::numfield::FieldElem;
use crate::algebra::poly::Poly;
use crate::spectral::{BlockRowIndex, JordanDecomposition, Regime};
use crate::torus::{hnf, relation_lattice, torus_group, TorusGroup, TorusKind, TorusPoint};
use crate::{RatMatrix, RatPoly, Rational};

fn rat(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

/// `C(u, c) = u (u-1) ... (u-c+1) / c!`.
pub fn binomial_poly(c: usize) -> RatPoly {
    let mut p = Poly::constant(Rational::one());
    for m in 0..c {
        p = &p * &Poly::new(vec![rat(-(m as i64)), Rational::one()]);
    }
    let fact: Rational = (1..=c as i64).map(rat).fold(Rational::one(), |a, b| a * b);
    p.scale(&fact.recip())
}

/// Polynomial in `u` with field coefficients, lowest degree first.
pub type FieldPoly = Vec<FieldElem>;

fn fp_add(a: &mut FieldPoly, b: &FieldPoly) {
    if a.len() < b.len() {
        a.resize(b.len(), FieldElem::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.clone() + y.clone();
    }
}

fn fp_scale(a: &FieldPoly, s: &FieldElem) -> FieldPoly {
    a.iter().map(|c| c.clone() * s.clone()).collect()
}

fn fp_trim(mut a: FieldPoly) -> FieldPoly {
    while a.last().map_or(false, |c| c.is_zero()) {
        a.pop();
    }
    a
}

/// `Q_ij(u) = sum_c C(u, c) theta^-c x'_(i, j+c)` for every block row.
pub fn q_polynomials(dec: &JordanDecomposition, xk: &[FieldElem]) -> Vec<Vec<FieldPoly>> {
    let mut out = Vec::with_capacity(dec.k());
    for (i, b) in dec.blocks.iter().enumerate() {
        let theta = dec.factors[b.factor].theta.clone();
        let inv = theta.inverse();
        let off = dec.block_offset(i);
        let mut rows = Vec::with_capacity(b.size);
        for j in 0..b.size {
            let mut q: FieldPoly = Vec::new();
            let mut pw = FieldElem::one();
            for c in 0..b.size - j {
                let coeff = pw.clone() * xk[off + j + c].clone();
                if !coeff.is_zero() {
                    let bin = binomial_poly(c);
                    let term: FieldPoly = bin.coeffs().iter().map(|r| FieldElem::scalar(r.clone()) * coeff.clone()).collect();
                    fp_add(&mut q, &term);
                }
                pw = pw * inv.clone();
            }
            rows.push(fp_trim(q));
        }
        out.push(rows);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Realness {
    Verified,
    /// Largest certified upper bound of `|Im|` seen over the sample grid.
    Numeric { max_imag: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

/// A ray of the cone: phase `p` (in the cone's generator context, possibly
/// extended) and truncation `base * tau^steps` (`base + steps` in the unit regime).
#[derive(Clone, Debug)]
pub struct Ray {
    pub p: Vec<GenPoly>,
    pub base: Rational,
    pub steps: u64,
}

#[derive(Clone, Debug)]
struct Enclosures {
    /// `[r][i][c]`
    g: Vec<Vec<Vec<ComplexInterval>>>,
    ln_rho: Vec<Interval>,
    ln_tau: Interval,
    /// `P^-1` rows by block row, and `x'` values.
    pinv: Vec<Vec<ComplexInterval>>,
    xk: Vec<ComplexInterval>,
    theta: Vec<ComplexInterval>,
}

#[derive(Debug)]
pub struct TrajectoryCone {
    pub dec: JordanDecomposition,
    pub torus: TorusGroup,
    pub regime: Regime,
    /// Scale base: dominant modulus, or its inverse when contracting; 1 in the unit regime.
    pub tau: AlgebraicNumber,
    pub rho: Vec<AlgebraicNumber>,
    pub t0: Rational,
    /// Output coordinates `y = E y'` (`E` is the identity for an unstripped system).
    pub embedding: RatMatrix,
    pub xk: Vec<FieldElem>,
    pub q: Vec<Vec<FieldPoly>>,
    /// `G_ri = sum_j P_(r,(i,j)) Q_ij`, over block `i`'s field.
    pub g: Vec<Vec<FieldPoly>>,
    ctx: GenContext,
    theta: Vec<GenPoly>,
    rho_gen: Vec<GenPoly>,
    lambda: Vec<GenPoly>,
    g_gen: Vec<Vec<Vec<GenPoly>>>,
    q_gen: Vec<Vec<Vec<GenPoly>>>,
    enc: std::sync::OnceLock<Enclosures>,
}

/// `1/g` for a generator (or rational) `g` with value `v`.
fn gen_inverse(ctx: &GenContext, v: &AlgebraicNumber, g: &GenPoly) -> GenPoly {
    if let Some(q) = v.as_rational() {
        return GenPoly::constant(q.recip());
    }
    let m = v.minpoly();
    let m0 = Rational::from_integer(m.coeff(0));
    let mut acc = GenPoly::zero();
    let mut pw = GenPoly::one();
    for k in 1..=m.degree().unwrap() {
        acc = acc + pw.scale(&Rational::from_integer(m.coeff(k)));
        pw = (pw * g.clone()).reduce(ctx);
    }
    acc.scale(&(-m0.recip())).reduce(ctx)
}

fn poly_eval_gen(coeffs: &[GenPoly], u: &Rational) -> GenPoly {
    coeffs.iter().rev().fold(GenPoly::zero(), |acc, c| acc.scale(u) + c.clone())
}

fn poly_eval_ci(coeffs: &[ComplexInterval], u: &ComplexInterval, prec: u32) -> ComplexInterval {
    coeffs.iter().rev().fold(ComplexInterval::zero(prec), |acc, c| &(&acc * u) + c)
}

impl TrajectoryCone {
    /// Cone of `A' = P J P^-1` through `x'`, observed through `embedding`.
    pub fn new(dec: JordanDecomposition, x: &[Rational], embedding: Option<&RatMatrix>) -> TrajectoryCone {
        let k = dec.k();
        let regime = dec.regime;
        let dominant = dec.dominant_modulus().clone();
        let tau = match regime {
            Regime::Expanding => dominant,
            Regime::Contracting => dominant.inv(),
            Regime::UnitModulus => AlgebraicNumber::from_int(1),
        };
        let rho: Vec<AlgebraicNumber> = dec.blocks.iter().map(|b| b.modulus.clone()).collect();
        let phases: Vec<AlgebraicNumber> = dec.blocks.iter().map(|b| b.phase().clone()).collect();
        let torus = torus_group(&relation_lattice(&phases));
        let e = embedding.cloned().unwrap_or_else(|| Matrix::identity(dec.dim));
        let xk = dec.transform_k(x);
        let q = q_polynomials(&dec, &xk);
        let out_dim = e.rows();
        let mut g = vec![vec![Vec::new(); k]; out_dim];
        for (i, b) in dec.blocks.iter().enumerate() {
            for r in 0..out_dim {
                let mut acc: FieldPoly = Vec::new();
                for j in 0..b.size {
                    let col = dec.column_k(i, j);
                    let mut w = FieldElem::zero();
                    for c in 0..dec.dim {
                        if !e[(r, c)].is_zero() {
                            w = w + col[c].clone() * FieldElem::scalar(e[(r, c)].clone());
                        }
                    }
                    if !w.is_zero() {
                        fp_add(&mut acc, &fp_scale(&q[i][j], &w));
                    }
                }
                g[r][i] = fp_trim(acc);
            }
        }
        let (mut ctx, theta) = dec.gen_context();
        let mut rho_gen = Vec::with_capacity(k);
        let mut lambda = Vec::with_capacity(k);
        for (i, b) in dec.blocks.iter().enumerate() {
            if b.is_real() {
                let s = rat(b.eigenvalue.alg_sign().to_i32() as i64);
                rho_gen.push(theta[i].scale(&s));
                lambda.push(GenPoly::constant(s));
            } else {
                let rg = ctx.add(&b.modulus);
                let inv = gen_inverse(&ctx, &b.modulus, &rg);
                lambda.push((theta[i].clone() * inv).reduce(&ctx));
                rho_gen.push(rg);
            }
        }
        let embed = |ctx: &GenContext, i: usize, p: &FieldPoly| -> Vec<GenPoly> {
            p.iter().map(|c| dec.embed_gen(&theta[i], c).reduce(ctx)).collect()
        };
        let g_gen = (0..out_dim).map(|r| (0..k).map(|i| embed(&ctx, i, &g[r][i])).collect()).collect();
        let q_gen = (0..k).map(|i| q[i].iter().map(|p| embed(&ctx, i, p)).collect()).collect();
        TrajectoryCone {
            dec,
            torus,
            regime,
            tau,
            rho,
            t0: Rational::one(),
            embedding: e,
            xk,
            q,
            g,
            ctx,
            theta,
            rho_gen,
            lambda,
            g_gen,
            q_gen,
            enc: std::sync::OnceLock::new(),
        }
    }

    pub fn with_t0(mut self, t0: Rational) -> TrajectoryCone {
        assert!(t0 >= Rational::one());
        self.t0 = t0;
        self
    }

    pub fn k(&self) -> usize {
        self.dec.k()
    }

    pub fn out_dim(&self) -> usize {
        self.embedding.rows()
    }

    pub fn ctx(&self) -> &GenContext {
        &self.ctx
    }

    /// Block eigenvalues, moduli and phases as expressions.
    pub fn theta_gen(&self) -> &[GenPoly] {
        &self.theta
    }

    pub fn rho_gen(&self) -> &[GenPoly] {
        &self.rho_gen
    }

    pub fn lambda_gen(&self) -> &[GenPoly] {
        &self.lambda
    }

    /// `sigma_i(G_ri)` coefficients.
    pub fn g_gen(&self, r: usize, i: usize) -> &[GenPoly] {
        &self.g_gen[r][i]
    }

    /// Blocks whose contribution to the outputs is not identically zero.
    pub fn active_blocks(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| (0..self.out_dim()).any(|r| !self.g[r][i].is_empty())).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.active_blocks().is_empty()
    }

    fn enclosures(&self) -> &Enclosures {
        self.enc.get_or_init(|| self.compute_enclosures(192))
    }

    fn enclosures_at(&self, prec: u32) -> std::borrow::Cow<'_, Enclosures> {
        if prec <= 192 {
            std::borrow::Cow::Borrowed(self.enclosures())
        } else {
            std::borrow::Cow::Owned(self.compute_enclosures(prec))
        }
    }

    fn compute_enclosures(&self, prec: u32) -> Enclosures {
        let k = self.k();
        let g = (0..self.out_dim())
            .map(|r| (0..k).map(|i| self.g_gen[r][i].iter().map(|c| c.eval(&self.ctx, prec)).collect()).collect())
            .collect();
        let ln = |a: &AlgebraicNumber| {
            if a.as_rational().map_or(false, |q| q.is_one()) {
                Interval::zero(prec)
            } else {
                a.real_enclosure(prec + 16).ln().with_prec(prec)
            }
        };
        let ln_rho = self.rho.iter().map(ln).collect();
        let ln_tau = ln(&self.tau);
        let theta: Vec<ComplexInterval> = self.dec.blocks.iter().map(|b| b.eigenvalue.enclosure(prec + 16)).collect();
        let idx = self.dec.block_rows();
        let pinv = idx
            .iter()
            .map(|&BlockRowIndex { i, j }| self.dec.row_k(i, j).iter().map(|w| w.embed_enclosure(&theta[i]).with_prec(prec)).collect())
            .collect();
        let xk = idx.iter().zip(&self.xk).map(|(ix, w)| w.embed_enclosure(&theta[ix.i]).with_prec(prec)).collect();
        Enclosures { g, ln_rho, ln_tau, pinv, xk, theta }
    }

    // -----------------------------------------------------------------------
    // Parameters.

    /// `u = log_tau t` (`u = t` in the unit regime).
    pub fn u_of_t(&self, t: &Interval, prec: u32) -> Interval {
        match self.regime {
            Regime::UnitModulus => t.clone(),
            _ => {
                let e = self.enclosures_at(prec);
                &t.ln() / &e.ln_tau
            }
        }
    }

    /// `t = tau^u`.
    pub fn t_of_u(&self, u: &Interval, prec: u32) -> Interval {
        match self.regime {
            Regime::UnitModulus => u.clone(),
            _ => {
                let e = self.enclosures_at(prec);
                (u * &e.ln_tau).exp()
            }
        }
    }

    /// `(p_n, t_n)`: phases `lambda^n` and `t = tau^n` (`n` in the unit regime).
    pub fn orbit_alignment(&self, n: u64) -> (Vec<GenPoly>, Rational) {
        let p = self.lambda.iter().map(|l| l.pow(n as u32).reduce(&self.ctx)).collect();
        let t = match (self.regime, self.tau.as_rational()) {
            (Regime::UnitModulus, _) => rat(n as i64),
            (_, Some(q)) => num_traits::pow(q.clone(), n as usize),
            // Irrational tau: the exact value lives in `aligned_t`.
            _ => Rational::zero(),
        };
        (p, t)
    }

    /// `tau^n` exactly.
    pub fn aligned_t(&self, n: u64) -> AlgebraicNumber {
        match self.regime {
            Regime::UnitModulus => AlgebraicNumber::from_int(n as i64),
            _ => self.tau.pow(n as i64),
        }
    }

    // -----------------------------------------------------------------------
    // Exact evaluation at aligned parameters.

    /// Pre-`P` coordinates at `t = tau^n` (`t = n` in the unit regime).
    pub fn ray_point_exact(&self, ctx: &GenContext, p: &[GenPoly], n: u64) -> Vec<GenPoly> {
        let u = rat(n as i64);
        let mut out = Vec::new();
        for i in 0..self.k() {
            let scale = self.block_scale(ctx, i, p, n);
            for q in &self.q_gen[i] {
                out.push((scale.clone() * poly_eval_gen(q, &u)).reduce(ctx));
            }
        }
        out
    }

    fn block_scale(&self, ctx: &GenContext, i: usize, p: &[GenPoly], n: u64) -> GenPoly {
        let r = match self.regime {
            Regime::UnitModulus => GenPoly::one(),
            _ => self.rho_gen[i].pow(n as u32).reduce(ctx),
        };
        (r * p[i].clone()).reduce(ctx)
    }

    /// Output coordinates `E P ray_point(p, tau^n)`.
    pub fn output_exact(&self, ctx: &GenContext, p: &[GenPoly], n: u64) -> Vec<GenPoly> {
        let u = rat(n as i64);
        let scales: Vec<GenPoly> = (0..self.k()).map(|i| self.block_scale(ctx, i, p, n)).collect();
        (0..self.out_dim())
            .map(|r| {
                let mut acc = GenPoly::zero();
                for i in 0..self.k() {
                    if !self.g_gen[r][i].is_empty() {
                        acc = acc + scales[i].clone() * poly_eval_gen(&self.g_gen[r][i], &u);
                    }
                }
                acc.reduce(ctx)
            })
            .collect()
    }

    /// `J z` on pre-`P` coordinates.
    pub fn apply_j_exact(&self, ctx: &GenContext, z: &[GenPoly]) -> Vec<GenPoly> {
        let mut out = Vec::with_capacity(z.len());
        for (i, b) in self.dec.blocks.iter().enumerate() {
            let off = self.dec.block_offset(i);
            for j in 0..b.size {
                let mut v = self.theta[i].clone() * z[off + j].clone();
                if j + 1 < b.size {
                    v = v + z[off + j + 1].clone();
                }
                out.push(v.reduce(ctx));
            }
        }
        out
    }

    /// `J r(p, t0) = r(L p, tau t0)`.
    pub fn apply_j_to_ray(&self, ctx: &GenContext, r: &Ray) -> Ray {
        let p = r.p.iter().zip(&self.lambda).map(|(a, l)| (a.clone() * l.clone()).reduce(ctx)).collect();
        Ray { p, base: r.base.clone(), steps: r.steps + 1 }
    }

    /// The ray through `p` truncated at the cone's `t0`.
    pub fn ray(&self, p: Vec<GenPoly>) -> Ray {
        Ray { p, base: self.t0.clone(), steps: 0 }
    }

    /// Enclosure of a ray's truncation parameter.
    pub fn ray_t0(&self, r: &Ray, prec: u32) -> Interval {
        let b = Interval::from_rational(&r.base, prec);
        match self.regime {
            Regime::UnitModulus => &b + &Interval::from_int(r.steps as i64, prec),
            _ => &b * &self.tau.real_enclosure(prec + 16).powi(r.steps as u32),
        }
    }

    /// Exact check that `p` satisfies every torus relation.
    pub fn phase_in_torus(&self, ctx: &GenContext, p: &[GenPoly]) -> bool {
        self.torus.lattice.basis.iter().all(|v| {
            let mut num = GenPoly::one();
            for (x, &e) in p.iter().zip(v) {
                let base = if e >= 0 { x.clone() } else { x.conj(ctx) };
                num = (num * base.pow(e.unsigned_abs() as u32)).reduce(ctx);
            }
            num.equals_rational(&Rational::one(), ctx)
        })
    }

    // -----------------------------------------------------------------------
    // Interval evaluation.

    /// Output coordinates for interval phases and `u`.
    pub fn output_interval(&self, p: &[ComplexInterval], u: &Interval, prec: u32) -> Vec<ComplexInterval> {
        let e = self.enclosures_at(prec);
        let uc = ComplexInterval::real(u.clone());
        let scales: Vec<ComplexInterval> = (0..self.k())
            .map(|i| {
                let s = match self.regime {
                    Regime::UnitModulus => Interval::one(prec),
                    _ => (u * &e.ln_rho[i]).exp(),
                };
                p[i].scale(&s)
            })
            .collect();
        (0..self.out_dim())
            .map(|r| {
                let mut acc = ComplexInterval::zero(prec);
                for i in 0..self.k() {
                    if !e.g[r][i].is_empty() {
                        acc = &acc + &(&scales[i] * &poly_eval_ci(&e.g[r][i], &uc, prec));
                    }
                }
                acc
            })
            .collect()
    }

    /// Enclosures of the torus point's coordinates.
    pub fn phase_enclosure(ctx: &GenContext, p: &[GenPoly], prec: u32) -> Vec<ComplexInterval> {
        p.iter().map(|x| x.eval(ctx, prec)).collect()
    }

    /// A random point of `T` as enclosures.
    pub fn sample_phase(&self, rng: &mut impl Rng, prec: u32) -> Vec<ComplexInterval> {
        match &self.torus.kind {
            TorusKind::Finite { points } => points[rng.gen_range(0..points.len())].enclosure(prec),
            TorusKind::Dense { rank, divisors, .. } => {
                let finite: Vec<i64> = divisors.iter().map(|&d| rng.gen_range(0..d.max(1))).collect();
                let free: Vec<Interval> = (0..*rank)
                    .map(|_| Interval::from_rational(&Rational::new(rng.gen_range(0..1u64 << 40).into(), (1u64 << 40).into()), prec))
                    .collect();
                self.torus.param_point(&finite, &free, prec)
            }
        }
    }

    /// Imaginary parts vanish: symbolic pairing of conjugate blocks, plus a
    /// numeric corroboration when that fails.
    pub fn realness_certificate(&self) -> Realness {
        if self.realness_symbolic() {
            return Realness::Verified;
        }
        Realness::Numeric { max_imag: self.realness_numeric(20) }
    }

    fn realness_symbolic(&self) -> bool {
        let lat = &self.torus.lattice;
        for (i, b) in self.dec.blocks.iter().enumerate() {
            if b.is_real() {
                // p_i = +-1 on T, and sigma_i(G) is real.
                let mut v = vec![0; self.k()];
                v[i] = 2;
                if !lat.contains(&v) {
                    return false;
                }
                continue;
            }
            let j = b.partner;
            let pb = &self.dec.blocks[j];
            if j == i || pb.factor != b.factor || pb.chain != b.chain || !pb.eigenvalue.equals(&b.eigenvalue.conj()) {
                return false;
            }
            let mut v = vec![0; self.k()];
            v[i] += 1;
            v[j] += 1;
            if !lat.contains(&v) {
                return false;
            }
            if (0..self.out_dim()).any(|r| self.g[r][i] != self.g[r][j]) {
                return false;
            }
        }
        true
    }

    /// Largest `|Im|` upper bound over `samples` values of `t >= 1` and a few phases.
    pub fn realness_numeric(&self, samples: usize) -> f64 {
        let prec = 160;
        let phases: Vec<Vec<ComplexInterval>> = match &self.torus.kind {
            TorusKind::Finite { points } => points.iter().take(4).map(|p| p.enclosure(prec)).collect(),
            TorusKind::Dense { .. } => {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
                (0..4).map(|_| self.sample_phase(&mut rng, prec)).collect()
            }
        };
        let mut worst = 0f64;
        for s in 0..samples {
            let t = Interval::from_rational(&(rat(1) + Rational::new((3 * s as i64).into(), 2.into())), prec);
            let u = self.u_of_t(&t, prec);
            for p in &phases {
                for y in self.output_interval(p, &u, prec) {
                    worst = worst.max(y.im.mag().to_f64());
                }
            }
        }
        worst
    }

    // -----------------------------------------------------------------------
    // Membership.

    /// Whether `y` lies in the cone with `t >= t0`, to relative tolerance
    /// `2^-prec max(1, |y|)`. `Yes` and `No` are backed by interval bounds.
    pub fn member_test(&self, y: &[Interval], prec: u32) -> Membership {
        let wp = prec + 64;
        let ymag = y.iter().map(|v| v.mag().to_f64().abs()).fold(1f64, f64::max);
        let tol = Interval::from_f64(ymag, wp).mul_pow2(-(prec as i64));
        let tol_box = Interval::new(tol.hi.neg(), tol.hi.clone(), wp);
        // Reduced coordinates through a left inverse of the embedding.
        let Some((left, residual_ok)) = self.reduce_output(y, &tol_box, wp) else { return Membership::No };
        if !residual_ok {
            return Membership::Unknown;
        }
        let e = self.enclosures_at(wp);
        let idx = self.dec.block_rows();
        let z: Vec<ComplexInterval> = (0..idx.len())
            .map(|r| {
                let mut acc = ComplexInterval::zero(wp);
                for (c, yc) in left.iter().enumerate() {
                    acc = &acc + &e.pinv[r][c].scale(yc);
                }
                acc
            })
            .collect();
        let near_zero = |v: &ComplexInterval, slack: &Interval| -> Option<bool> {
            let s = ComplexInterval::new(slack.clone(), slack.clone());
            let w = &ComplexInterval::new(v.re.clone(), v.im.clone()) - &ComplexInterval::zero(wp);
            if (&w + &s).contains_zero() || (&w - &s).contains_zero() || w.contains_zero() {
                return Some(true);
            }
            let widened = ComplexInterval::new(&w.re + &tol_box, &w.im + &tol_box);
            if widened.contains_zero() {
                None
            } else {
                Some(false)
            }
        };
        // Per block: w_i = t^b_i p_i from the deepest non-zero row of x'.
        let mut w: Vec<Option<(usize, ComplexInterval)>> = vec![None; self.k()];
        let mut uncertain = false;
        for (i, b) in self.dec.blocks.iter().enumerate() {
            let off = self.dec.block_offset(i);
            let jmax = (0..b.size).rev().find(|&j| !self.xk[off + j].is_zero());
            match jmax {
                None => {
                    for j in 0..b.size {
                        match near_zero(&z[off + j], &tol_box) {
                            Some(true) => {}
                            Some(false) => return Membership::No,
                            None => uncertain = true,
                        }
                    }
                }
                Some(jm) => {
                    for j in jm + 1..b.size {
                        match near_zero(&z[off + j], &tol_box) {
                            Some(true) => {}
                            Some(false) => return Membership::No,
                            None => uncertain = true,
                        }
                    }
                    w[i] = Some((jm, z[off + jm].div(&e.xk[off + jm])));
                }
            }
        }
        // Recover u. Candidates from different blocks must agree up to a
        // loose slack; the first one is kept for the reconstruction.
        let mut u: Option<Interval> = None;
        let slack = Dyadic::pow2(-((prec / 2) as i64));
        let loose = |c: &Interval| {
            let s = slack.mul(&Dyadic::max(&Dyadic::one(), &c.mag()));
            Interval::new(c.lo.sub(&s), c.hi.add(&s), wp)
        };
        let add_u = |cand: Interval, u: &mut Option<Interval>| -> bool {
            match u {
                None => {
                    *u = Some(cand);
                    true
                }
                Some(prev) => loose(prev).overlaps(&loose(&cand)),
            }
        };
        if self.regime != Regime::UnitModulus {
            for i in 0..self.k() {
                if let Some((_, wi)) = &w[i] {
                    if e.ln_rho[i].contains_zero() {
                        continue;
                    }
                    let m = wi.abs();
                    if !m.is_positive() {
                        uncertain = true;
                        continue;
                    }
                    let cand = &m.ln() / &e.ln_rho[i];
                    if !add_u(cand, &mut u) {
                        return Membership::No;
                    }
                }
            }
        }
        if u.is_none() {
            // Polynomial part: row jm-1 gives x'_(jm-1) + u theta^-1 x'_jm.
            for i in 0..self.k() {
                let Some((jm, wi)) = &w[i] else { continue };
                if *jm == 0 || wi.contains_zero() {
                    continue;
                }
                let off = self.dec.block_offset(i);
                let ratio = z[off + jm - 1].div(wi);
                let cand = (&(&ratio - &e.xk[off + jm - 1]) * &e.theta[i]).div(&e.xk[off + jm]);
                if !add_u(cand.re, &mut u) {
                    return Membership::No;
                }
                break;
            }
        }
        let u0 = self.u_of_t(&Interval::from_rational(&self.t0, wp), wp);
        let u = match u {
            Some(u) => {
                if u.hi < u0.lo {
                    return Membership::No;
                }
                if u.lo < u0.lo {
                    uncertain = true;
                }
                u
            }
            // The cone does not depend on t.
            None => u0,
        };
        // Phases on the determined blocks.
        let mut p: Vec<Option<ComplexInterval>> = vec![None; self.k()];
        for i in 0..self.k() {
            if let Some((_, wi)) = &w[i] {
                let s = match self.regime {
                    Regime::UnitModulus => Interval::one(wp),
                    _ => (&u * &e.ln_rho[i]).exp(),
                };
                let pi = wi.scale(&s.recip());
                let dev = &pi.abs() - &Interval::one(wp);
                let widened = &dev + &tol_box;
                if !widened.contains_zero() && !dev.contains_zero() {
                    if uncertain {
                        return Membership::Unknown;
                    }
                    return Membership::No;
                }
                p[i] = Some(pi);
            }
        }
        // Relations among the determined coordinates.
        let determined: Vec<usize> = (0..self.k()).filter(|&i| p[i].is_some()).collect();
        for v in self.relations_supported_on(&determined) {
            let mut prod = ComplexInterval::one(wp);
            for (i, &ex) in v.iter().enumerate() {
                if ex == 0 {
                    continue;
                }
                let pi = p[i].as_ref().unwrap();
                let base = if ex >= 0 { pi.clone() } else { pi.conj() };
                prod = &prod * &base.powi(ex.unsigned_abs());
            }
            let dev = &prod - &ComplexInterval::one(wp);
            let slack = Interval::from_int(v.iter().map(|x| x.abs()).sum::<i64>().max(1), wp);
            let tol_v = &tol_box * &slack;
            let widened = ComplexInterval::new(&dev.re + &tol_v, &dev.im + &tol_v);
            if !widened.contains_zero() {
                if uncertain {
                    return Membership::Unknown;
                }
                return Membership::No;
            }
        }
        // Reconstruct and compare.
        let pfull: Vec<ComplexInterval> = p.into_iter().map(|x| x.unwrap_or_else(|| ComplexInterval::one(wp))).collect();
        let pred = self.output_interval(&pfull, &u, wp);
        let mut all = true;
        for (a, b) in pred.iter().zip(y) {
            let d = &a.re - b;
            if !(&d + &tol_box).contains_zero() {
                return if uncertain { Membership::Unknown } else { Membership::No };
            }
            // Certified only when the whole discrepancy fits in the tolerance box.
            let inside = |v: &Interval| v.lo >= tol_box.lo && v.hi <= tol_box.hi;
            if !inside(&d) || !inside(&a.im) {
                all = false;
            }
        }
        if all && !uncertain {
            Membership::Yes
        } else {
            Membership::Unknown
        }
    }

    /// Reduced coordinates `L y` and whether `y - E L y` is within tolerance.
    fn reduce_output(&self, y: &[Interval], tol_box: &Interval, wp: u32) -> Option<(Vec<Interval>, bool)> {
        let e = &self.embedding;
        let dp = e.cols();
        // Pivot rows of E form an invertible d' x d' block.
        let rows = pivots_of_rows(e);
        let inv = e.submatrix(&rows, &(0..dp).collect::<Vec<_>>()).inverse()?;
        let left: Vec<Interval> = (0..dp)
            .map(|c| {
                let mut acc = Interval::zero(wp);
                for (k, &r) in rows.iter().enumerate() {
                    acc = &acc + &(&Interval::from_rational(&inv[(c, k)], wp) * &y[r]);
                }
                acc
            })
            .collect();
        for r in 0..e.rows() {
            let mut acc = Interval::zero(wp);
            for c in 0..dp {
                acc = &acc + &(&Interval::from_rational(&e[(r, c)], wp) * &left[c]);
            }
            let d = &acc - &y[r];
            if !(&d + tol_box).contains_zero() {
                return None;
            }
        }
        Some((left, true))
    }

    /// Basis of the relations whose support lies in `s`.
    fn relations_supported_on(&self, s: &[usize]) -> Vec<Vec<i64>> {
        let k = self.k();
        let others: Vec<usize> = (0..k).filter(|i| !s.contains(i)).collect();
        let order: Vec<usize> = others.iter().chain(s.iter()).copied().collect();
        let permuted: Vec<Vec<i64>> = self.torus.lattice.basis.iter().map(|v| order.iter().map(|&i| v[i]).collect()).collect();
        let h = hnf(&permuted, k);
        h.into_iter()
            .filter(|row| row[..others.len()].iter().all(|&x| x == 0))
            .map(|row| {
                let mut v = vec![0; k];
                for (pos, &i) in order.iter().enumerate() {
                    v[i] = row[pos];
                }
                v
            })
            .collect()
    }

    /// Orbit-aligned exact membership of `A'^n x'` (mapped through `E`).
    pub fn aligned_member(&self, n: u64) -> bool {
        match self.regime {
            Regime::UnitModulus => rat(n as i64) >= self.t0,
            _ => {
                let t = self.aligned_t(n);
                t.cmp_real(&AlgebraicNumber::from_rational(self.t0.clone())) != std::cmp::Ordering::Less
            }
        }
    }

    /// Smallest `n` with `tau^n >= t` (`n >= t` in the unit regime).
    pub fn steps_to_reach(&self, t: &Rational) -> u64 {
        match self.regime {
            Regime::UnitModulus => {
                let c = t.ceil().to_integer();
                u64::try_from(c).unwrap_or(0)
            }
            _ => {
                if *t <= Rational::one() {
                    return 0;
                }
                let prec = 128;
                let u = self.u_of_t(&Interval::from_rational(t, prec), prec);
                let mut n = u.lo.floor_int();
                if n < 0.into() {
                    n = 0.into();
                }
                let mut n: u64 = n.try_into().unwrap();
                let target = AlgebraicNumber::from_rational(t.clone());
                while self.aligned_t(n).cmp_real(&target) == std::cmp::Ordering::Less {
                    n += 1;
                }
                n
            }
        }
    }

    pub fn torus_points(&self) -> Option<&[TorusPoint]> {
        match &self.torus.kind {
            TorusKind::Finite { points } => Some(points),
            _ => None,
        }
    }

    /// The interval `u` range of a box of `t` values.
    pub fn u_bounds(&self, t_lo: &Rational, t_hi: &Rational, prec: u32) -> Interval {
        let lo = self.u_of_t(&Interval::from_rational(t_lo, prec), prec);
        let hi = self.u_of_t(&Interval::from_rational(t_hi, prec), prec);
        lo.hull(&hi)
    }
}

/// Rows of `E` forming an invertible square block (pivot columns of `E^T`).
fn pivots_of_rows(e: &RatMatrix) -> Vec<usize> {
    let (_, pivots) = e.transpose().rref();
    pivots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::jordan_decompose;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().copied().map(rat).collect()).collect())
    }

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().copied().map(rat).collect()
    }

    fn cone(a: &RatMatrix, x: &[Rational]) -> TrajectoryCone {
        TrajectoryCone::new(jordan_decompose(a).unwrap(), x, None)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_poly(0), Poly::constant(rat(1)));
        let c2 = binomial_poly(2);
        assert_eq!(c2.eval(&rat(5)), rat(10));
    }

    #[test]
    fn shear_unit_regime() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let c = cone(&a, &v(&[2, 3]));
        assert_eq!(c.regime, Regime::UnitModulus);
        let one = vec![GenPoly::one(); c.k()];
        let y = c.output_exact(c.ctx(), &one, 5);
        assert!(y[0].equals_rational(&rat(17), c.ctx()));
        assert!(y[1].equals_rational(&rat(3), c.ctx()));
        assert_eq!(c.realness_certificate(), Realness::Verified);
    }

    #[test]
    fn rotation_alignment() {
        let a = m(&[&[0, -2], &[2, 0]]);
        let x = v(&[1, 0]);
        let c = cone(&a, &x);
        assert_eq!(c.realness_certificate(), Realness::Verified);
        for n in 0..8u64 {
            let (p, _) = c.orbit_alignment(n);
            let y = c.output_exact(c.ctx(), &p, n);
            let want = a.pow(n).mul_vec(&x);
            for (g, w) in y.iter().zip(&want) {
                assert!(g.equals_rational(w, c.ctx()), "n = {n}");
            }
        }
        assert_eq!(c.torus_points().unwrap().len(), 4);
    }

    #[test]
    fn j_action_is_exact() {
        let a = m(&[&[2, 1, 0], &[0, 2, 0], &[0, 0, 3]]);
        let c = cone(&a, &v(&[1, 1, 1]));
        let mut ctx = c.ctx().clone();
        let p: Vec<GenPoly> = c.torus_points().unwrap()[0].coords_gen(&mut ctx);
        let r = c.ray(p.clone());
        let jr = c.apply_j_to_ray(&ctx, &r);
        for n in 0..5 {
            let lhs = c.apply_j_exact(&ctx, &c.ray_point_exact(&ctx, &p, n));
            let rhs = c.ray_point_exact(&ctx, &jr.p, n + 1);
            for (l, rr) in lhs.iter().zip(&rhs) {
                assert!((l.clone() - rr.clone()).is_zero_exact(&ctx));
            }
        }
    }

    #[test]
    fn membership() {
        let a = m(&[&[0, -2], &[2, 0]]);
        let x = v(&[1, 0]);
        let c = cone(&a, &x);
        let prec = 64;
        let y: Vec<Interval> = a.pow(3).mul_vec(&x).iter().map(|q| Interval::from_rational(q, 128)).collect();
        assert_eq!(c.member_test(&y, prec), Membership::Yes);
        // Norm 1/2 is below every cone point (norm t >= 1).
        let far = vec![Interval::from_rational(&Rational::new(1.into(), 2.into()), 128), Interval::zero(128)];
        assert_eq!(c.member_test(&far, prec), Membership::No);
    }
}
