//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use ominv::algebra::algebraic::AlgebraicNumber;
use ominv::algebra::interval::Interval;
use ominv::algebra::matrix::Matrix;
use ominv::algebra::Sign;
use ominv::cone::{Realness, TrajectoryCone};
use ominv::signdec::{ExpBasis, ExpLogPoly, ExpLogTerm, Formula, MPoly, Relation};
use ominv::spectral::{jordan_decompose, verify_decomposition};
use ominv::suite::{instances, Expect};
use ominv::synthesis::{check_certificate, decide, Analysis, Budget, Certificate, NoReason, Problem, Verdict};
use ominv::torus::moduli_combination_sign;
use ominv::{RatMatrix, Rational};
use ominv_cli::commands::{plot_rows, PlotOpts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

struct Report {
    all: bool,
}

impl Report {
    fn line(&mut self, n: u32, pass: bool, detail: String) {
        println!("criterion {} [{}] {}", n, if pass { "PASS" } else { "FAIL" }, detail);
        self.all &= pass;
    }
}

/// Sign of `p(w / s)` for integer `w` and `s > 0`, clearing denominators.
fn scaled_sign(p: &MPoly, w: &[BigInt], s: &BigInt) -> i32 {
    let deg = p.degree();
    let mut acc = BigInt::zero();
    for (c, e) in &p.terms {
        let mut m = c.clone();
        for (x, &k) in w.iter().zip(e) {
            m *= x.pow(k);
        }
        acc += m * s.pow(deg - e.iter().sum::<u32>());
    }
    match acc.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
    }
}

fn truth(f: &Formula, w: &[BigInt], s: &BigInt) -> bool {
    match f {
        Formula::Atom(a) => {
            let v = scaled_sign(&a.poly, w, s);
            match a.rel {
                Relation::Gt => v > 0,
                Relation::Ge => v >= 0,
                Relation::Eq => v == 0,
                Relation::Ne => v != 0,
                Relation::Lt => v < 0,
                Relation::Le => v <= 0,
            }
        }
        Formula::And(v) => v.iter().all(|g| truth(g, w, s)),
        Formula::Or(v) => v.iter().any(|g| truth(g, w, s)),
        Formula::Not(g) => !truth(g, w, s),
    }
}

/// Independent oracle: integer simulation of `A = B / D`, `x = w0 / c`.
fn brute_force_hit(p: &Problem, max: u64) -> Option<u64> {
    let d = p.x.len();
    let lcm = |a: BigInt, q: &Rational| a.lcm(q.denom());
    let den = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).fold(BigInt::one(), |a, (r, c)| lcm(a, &p.a[(r, c)]));
    let b: Vec<Vec<BigInt>> = (0..d).map(|r| (0..d).map(|c| (&p.a[(r, c)] * Rational::from(den.clone())).to_integer()).collect()).collect();
    let c0 = p.x.iter().fold(BigInt::one(), lcm);
    let mut w: Vec<BigInt> = p.x.iter().map(|q| (q * Rational::from(c0.clone())).to_integer()).collect();
    let mut s = c0;
    for n in 0..=max {
        if truth(&p.f, &w, &s) {
            return Some(n);
        }
        w = (0..d).map(|r| (0..d).map(|c| &b[r][c] * &w[c]).sum()).collect();
        s *= &den;
    }
    None
}

fn c1_jordan(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = Instant::now();
    let (mut ok, mut total) = (0, 0);
    while total < 100 {
        let d = rng.gen_range(1..=4);
        let rows = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        let den = [1, 1, 1, 2, 3][rng.gen_range(0..5)];
                        rat(rng.gen_range(-3..=3), den)
                    })
                    .collect()
            })
            .collect();
        let a: RatMatrix = Matrix::from_rows(rows);
        if a.det().is_zero() {
            continue;
        }
        total += 1;
        if let Ok(dec) = jordan_decompose(&a) {
            if verify_decomposition(&dec, &a) {
                ok += 1;
            }
        }
    }
    rep.line(1, ok == total, format!("{}/{} random invertible matrices (d <= 4) have P J P^-1 = A exactly ({:.1}s)", ok, total, t.elapsed().as_secs_f64()));
}

fn cones() -> Vec<(&'static str, Problem, Analysis)> {
    instances()
        .into_iter()
        .filter_map(|i| {
            let an = Analysis::new(&i.problem).unwrap();
            an.cone.as_ref()?;
            Some((i.name, i.problem, an))
        })
        .collect()
}

fn c2_j_action(rep: &mut Report, cs: &[(&'static str, Problem, Analysis)]) {
    let (mut ok, mut total) = (0, 0);
    for (_, _, an) in cs {
        let c = an.cone.as_ref().unwrap();
        let ctx = c.ctx();
        for j in 0..50u64 {
            let (p, _) = c.orbit_alignment(j % 10);
            let n = j / 10;
            let lhs = c.apply_j_exact(ctx, &c.ray_point_exact(ctx, &p, n));
            let (lp, _) = c.orbit_alignment(j % 10 + 1);
            let rhs = c.ray_point_exact(ctx, &lp, n + 1);
            total += 1;
            if lhs.iter().zip(&rhs).all(|(a, b)| (a.clone() - b.clone()).is_zero_exact(ctx)) {
                ok += 1;
            }
        }
    }
    rep.line(2, ok == total, format!("J r(p, t) = r(L p, tau t) exactly on {}/{} aligned pairs over {} instances", ok, total, cs.len()));
}

fn c3_realness(rep: &mut Report, cs: &[(&'static str, Problem, Analysis)]) {
    let mut bad = Vec::new();
    let mut worst = 0f64;
    for (name, _, an) in cs {
        let c = an.cone.as_ref().unwrap();
        if c.realness_certificate() != Realness::Verified {
            bad.push(*name);
        }
        let m = c.realness_numeric(20);
        worst = worst.max(m);
        if m > 2f64.powi(-64) {
            bad.push(*name);
        }
    }
    rep.line(3, bad.is_empty(), format!("realness Verified on {} instances, max |Im| = {:.3e} (bound 2^-64){}", cs.len(), worst, if bad.is_empty() { String::new() } else { format!(", failing: {:?}", bad) }));
}

fn c4_orbit(rep: &mut Report, cs: &[(&'static str, Problem, Analysis)]) {
    let (mut ok, mut total) = (0, 0);
    for (_, p, an) in cs {
        let c = an.cone.as_ref().unwrap();
        let ctx = c.ctx();
        let s = an.stripped.offset as u64;
        let mut y = p.a.pow(s).mul_vec(&p.x);
        for n in 0..=50u64 {
            let (pn, _) = c.orbit_alignment(n);
            let out = c.output_exact(ctx, &pn, n);
            total += 1;
            if out.iter().zip(&y).all(|(g, q)| g.equals_rational(q, ctx)) {
                ok += 1;
            }
            y = p.a.mul_vec(&y);
        }
    }
    rep.line(4, ok == total, format!("P ray_point(orbit_alignment(n)) = A^n x exactly for {}/{} (instance, n <= 50) pairs", ok, total));
}

fn c5_eventual_sign(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let prec = 256;
    let (mut filtered, mut agree) = (0, 0);
    let ts = [Interval::from_int(1_000_000, prec), Interval::from_int(1_000_000_000, prec)];
    for _ in 0..200 {
        let nb = rng.gen_range(1..=3);
        let pool = [2i64, 3, 5, 7];
        let rho: Vec<AlgebraicNumber> = (0..nb).map(|_| AlgebraicNumber::from_int(pool[rng.gen_range(0..4)])).collect();
        let tau = rho.iter().cloned().max_by(|a, b| a.cmp_real(b)).unwrap();
        let basis = ExpBasis::new(rho, tau, false);
        let nt = rng.gen_range(1..=4);
        let terms = (0..nt)
            .map(|_| ExpLogTerm {
                exponent: (0..nb).map(|_| rng.gen_range(-2..=2)).collect(),
                f: (0..rng.gen_range(1..=2)).map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))).collect(),
            })
            .collect();
        let e = ExpLogPoly { basis, terms }.normalize(&());
        let s = e.eventual_sign(&()).unwrap();
        let v: Vec<Option<i32>> = ts.iter().map(|t| e.eval(t, &(), prec).sign()).collect();
        if let (Some(a), Some(b)) = (v[0], v[1]) {
            if a == b && a != 0 {
                filtered += 1;
                if a == s.to_i32() {
                    agree += 1;
                }
            }
        }
    }
    rep.line(5, filtered > 0 && agree == filtered, format!("eventual_sign agrees with certified evaluation at t = 1e6, 1e9 on {}/{} filtered cases (200 generated)", agree, filtered));
}

fn c6_exponents(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prec = 256;
    let an = |v: i64| AlgebraicNumber::from_int(v);
    let pool = || -> Vec<AlgebraicNumber> {
        vec![an(2), an(3), an(5), AlgebraicNumber::from_rational(rat(3, 2)), an(2).sqrt_real(), an(3).sqrt_real(), an(5).sqrt_real(), AlgebraicNumber::from_rational(rat(1, 3))]
    };
    let pool = pool();
    let (mut decided, mut agree) = (0, 0);
    for _ in 0..100 {
        let k = rng.gen_range(1..=3);
        let rho: Vec<AlgebraicNumber> = (0..k).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect();
        let n: Vec<i64> = (0..k).map(|_| rng.gen_range(-4..=4)).collect();
        let mut s = Interval::zero(prec);
        for (r, &e) in rho.iter().zip(&n) {
            s = &s + &(&r.real_enclosure(prec + 16).ln() * &Interval::from_int(e, prec));
        }
        if let Some(v) = s.sign() {
            decided += 1;
            if moduli_combination_sign(&n, &rho).to_i32() == v {
                agree += 1;
            }
        }
    }
    // Exact zeros: 2^2 = 4, sqrt2^2 = 2, 6 = 2 * 3, |2 (3 + 4i) / 5| = 2, 9 / (3/2)^2 = 4.
    let z = |re: i64, im: i64| AlgebraicNumber::from_rational(rat(re, 5)) + AlgebraicNumber::from_rational(rat(im, 5)) * AlgebraicNumber::imag_unit();
    let zeros: Vec<(Vec<i64>, Vec<AlgebraicNumber>)> = vec![
        (vec![2, -1], vec![an(2), an(4)]),
        (vec![2, -1], vec![an(2).sqrt_real(), an(2)]),
        (vec![1, -1, -1], vec![an(6), an(2), an(3)]),
        (vec![1, -1], vec![z(6, 8).modulus(), an(2)]),
        (vec![2, -1, 1], vec![AlgebraicNumber::from_rational(rat(3, 2)), an(9), an(4)]),
        (vec![0, 0], vec![an(7), an(11)]),
    ];
    let zero_ok = zeros.iter().filter(|(n, r)| moduli_combination_sign(n, r) == Sign::Zero).count();
    rep.line(
        6,
        agree == decided && zero_ok == zeros.len(),
        format!("moduli_combination_sign agrees with 256-bit logs on {}/{} decided cases; {}/{} constructed zeros return 0", agree, decided, zero_ok, zeros.len()),
    );
}

fn c7_suite(rep: &mut Report) -> Vec<(Problem, Certificate)> {
    let budget = Budget::default();
    let mut certs = Vec::new();
    let mut fails = Vec::new();
    let mut slowest = 0f64;
    let list = instances();
    for inst in &list {
        let t = Instant::now();
        let v = decide(&inst.problem, &budget).unwrap();
        let oracle = brute_force_hit(&inst.problem, 10_000);
        let ok = match (&v, inst.expect) {
            (Verdict::NoInvariant(NoReason::OrbitHitsF { n, point }), Expect::Hits(m)) => *n == m && oracle == Some(m) && inst.problem.in_f(point),
            (Verdict::InvariantFound(c), Expect::Invariant) => {
                let r = check_certificate(c, &inst.problem, 1000, 7).unwrap();
                certs.push((inst.problem.clone(), c.clone()));
                r.passed() && oracle.is_none()
            }
            (Verdict::NoInvariant(NoReason::RayPersistsInF(_)), Expect::RayPersists) => oracle.is_none(),
            (Verdict::Unknown(r), Expect::Unknown) => oracle.is_none() && r.reason.contains("measure-zero"),
            _ => false,
        };
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        if !ok || secs > 60.0 {
            fails.push(format!("{} ({:.1}s)", inst.name, secs));
        }
    }
    rep.line(
        7,
        fails.is_empty() && list.len() >= 8,
        format!("{} suite instances match expected verdicts and the brute-force oracle to 1e4 steps; slowest {:.1}s{}", list.len(), slowest, if fails.is_empty() { String::new() } else { format!("; failing: {:?}", fails) }),
    );
    certs
}

fn parse_f(s: &str) -> f64 {
    s.parse().unwrap()
}

fn c8_plot(rep: &mut Report) {
    let spiral = instances().into_iter().find(|i| i.name == "spiral3d").unwrap().problem;
    let rows = plot_rows(&spiral, &PlotOpts::default()).unwrap();
    let orbit: Vec<Vec<f64>> = rows.iter().filter(|r| r.starts_with("orbit,")).map(|r| r.split(',').skip(3).map(parse_f).collect()).collect();
    let z_up = orbit.windows(2).all(|w| w[1][2] > w[0][2]);
    let norm = |v: &Vec<f64>| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let outward = orbit.windows(2).all(|w| norm(&w[1]) > norm(&w[0]));
    // Orbit rows against exact A^n x, and against the aligned cone point.
    let prec = 320;
    let an = Analysis::new(&spiral).unwrap();
    let c: &TrajectoryCone = an.cone.as_ref().unwrap();
    let mut y = spiral.x.clone();
    let mut printed_ok = true;
    let mut worst = 0f64;
    for (n, row) in orbit.iter().enumerate() {
        for (v, q) in row.iter().zip(&y) {
            let exact = Interval::from_rational(q, 64).to_f64();
            if (v - exact).abs() > 1e-14 * exact.abs().max(1.0) {
                printed_ok = false;
            }
        }
        if n >= 1 {
            let (p, _) = c.orbit_alignment(n as u64);
            let pe = TrajectoryCone::phase_enclosure(c.ctx(), &p, prec);
            let out = c.output_interval(&pe, &Interval::from_int(n as i64, prec), prec);
            for (z, q) in out.iter().zip(&y) {
                let d = (&z.re - &Interval::from_rational(q, prec)).abs().hull(&z.im.abs());
                worst = worst.max(d.mag().to_f64());
            }
        }
        y = spiral.a.mul_vec(&y);
    }
    let rays = rows.iter().filter(|r| r.starts_with("ray,")).count();
    let pass = z_up && outward && printed_ok && worst < 1e-9 && rays > 0;
    rep.line(
        8,
        pass,
        format!(
            "spiral plot: {} orbit rows, z increasing {}, planar norm increasing {}, rows match A^n x {}, max certified distance to aligned cone point {:.2e}; {} ray rows",
            orbit.len(),
            z_up,
            outward,
            printed_ok,
            worst,
            rays
        ),
    );
}

fn c9_stability(rep: &mut Report, certs: &[(Problem, Certificate)]) {
    let (mut acc, mut und, mut rej, mut with_cone) = (0, 0, 0, 0);
    for (p, c) in certs {
        let r = check_certificate(c, p, 1000, 9).unwrap();
        if c.cone.is_some() {
            with_cone += 1;
        }
        acc += r.accepted;
        und += r.undetermined;
        rej += r.rejected;
    }
    rep.line(9, rej == 0 && with_cone > 0, format!("{} certificates ({} with a cone): A y accepted {} times, undetermined {}, certified rejections {}", certs.len(), with_cone, acc, und, rej));
}

fn main() {
    let mut rep = Report { all: true };
    c1_jordan(&mut rep);
    let cs = cones();
    c2_j_action(&mut rep, &cs);
    c3_realness(&mut rep, &cs);
    c4_orbit(&mut rep, &cs);
    c5_eventual_sign(&mut rep);
    c6_exponents(&mut rep);
    let certs = c7_suite(&mut rep);
    c8_plot(&mut rep);
    c9_stability(&mut rep, &certs);
    if !rep.all {
        std::process::exit(1);
    }
}
