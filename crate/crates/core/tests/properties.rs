use num_traits::Zero;
use ominv::algebra::algebraic::AlgebraicNumber;
use ominv::algebra::matrix::Matrix;
use ominv::algebra::Sign;
use ominv::ser::{fmt_rational, parse_rational};
use ominv::signdec::{ExpBasis, ExpLogPoly, ExpLogTerm, Formula, MPoly, Relation};
use ominv::spectral::{jordan_decompose, verify_decomposition};
use ominv::suite::instances;
use ominv::synthesis::{emit_certificate, Analysis, Problem};
use ominv::torus::{moduli_combination_sign, relation_lattice};
use ominv::Rational;
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn sign_of(q: &Rational) -> Sign {
    if q.is_zero() {
        Sign::Zero
    } else if *q > Rational::zero() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

fn relation() -> impl Strategy<Value = Relation> {
    prop::sample::select(vec![Relation::Gt, Relation::Ge, Relation::Eq, Relation::Ne, Relation::Lt, Relation::Le])
}

fn poly(d: usize) -> impl Strategy<Value = MPoly> {
    prop::collection::vec((-4i64..=4, prop::collection::vec(0u32..3, d)), 0..4).prop_map(move |t| MPoly::new(d, t.into_iter().map(|(c, e)| (c.into(), e)).collect()))
}

fn formula(d: usize) -> impl Strategy<Value = Formula> {
    let leaf = (poly(d), relation()).prop_map(|(p, r)| Formula::atom(p, r));
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::Or),
            inner.prop_map(|f| Formula::Not(Box::new(f))),
        ]
    })
}

fn explog() -> impl Strategy<Value = ExpLogPoly<Rational>> {
    prop::collection::vec((prop::collection::vec(-2i64..=2, 2), prop::collection::vec(-3i64..=3, 0..3)), 0..6).prop_map(|ts| {
        let basis = ExpBasis::new(vec![AlgebraicNumber::from_int(2), AlgebraicNumber::from_int(4)], AlgebraicNumber::from_int(4), false);
        ExpLogPoly { basis, terms: ts.into_iter().map(|(exponent, f)| ExpLogTerm { exponent, f: f.into_iter().map(|c| rat(c, 1)).collect() }).collect() }
    })
}

fn terms_of(e: &ExpLogPoly<Rational>) -> Vec<(Vec<i64>, Vec<Rational>)> {
    e.terms.iter().map(|t| (t.exponent.clone(), t.f.clone())).collect()
}

proptest! {
    #[test]
    fn rational_text_round_trips(q in rational()) {
        prop_assert_eq!(parse_rational(&fmt_rational(&q)), Some(q));
    }

    #[test]
    fn normalized_formula_agrees(f in formula(2), x in prop::collection::vec(rational(), 2)) {
        let nf = f.normalize();
        let signs: Vec<Option<Sign>> = nf.polys.iter().map(|p| Some(sign_of(&p.eval_rational(&x)))).collect();
        prop_assert_eq!(nf.eval(&signs), Some(f.eval_rational(&x)));
        prop_assert_eq!(nf.negate().eval(&signs), Some(!f.eval_rational(&x)));
    }

    #[test]
    fn explog_normalize_is_idempotent(e in explog()) {
        let once = e.normalize(&());
        let twice = once.normalize(&());
        prop_assert_eq!(terms_of(&once), terms_of(&twice));
        // 2^2 = 4 collapses, so exponents never repeat after normalizing.
        for w in once.terms.windows(2) {
            prop_assert!(once.basis.compare(&w[0].exponent, &w[1].exponent) == std::cmp::Ordering::Greater);
        }
    }

    #[test]
    fn explog_sign_matches_large_tail(e in explog()) {
        let n = e.normalize(&());
        let s = n.eventual_sign(&()).unwrap();
        let t = ominv::algebra::interval::Interval::from_int(1 << 40, 256);
        let v = n.eval(&t, &(), 256);
        if let Some(v) = v.sign() {
            prop_assert_eq!(v, s.to_i32());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moduli_sign_is_antisymmetric(n in prop::collection::vec(-5i64..=5, 3), pick in prop::collection::vec(0usize..4, 3)) {
        let pool = [AlgebraicNumber::from_int(2), AlgebraicNumber::from_int(3), AlgebraicNumber::from_int(6), AlgebraicNumber::from_int(2).sqrt_real()];
        let rho: Vec<AlgebraicNumber> = pick.iter().map(|&i| pool[i].clone()).collect();
        let neg: Vec<i64> = n.iter().map(|v| -v).collect();
        let s = moduli_combination_sign(&n, &rho).to_i32();
        prop_assert_eq!(moduli_combination_sign(&neg, &rho).to_i32(), -s);
        // Appending a zero exponent changes nothing.
        let mut n2 = n.clone();
        n2.push(0);
        let mut r2 = rho.clone();
        r2.push(AlgebraicNumber::from_int(7));
        prop_assert_eq!(moduli_combination_sign(&n2, &r2).to_i32(), s);
    }

    #[test]
    fn generic_jordan_blocks_are_exact(a in 1i64..=4, s in prop::collection::vec(-3i64..=3, 4), x in prop::collection::vec(-3i64..=3, 2)) {
        let sm = Matrix::from_rows(vec![vec![rat(s[0], 1), rat(s[1], 1)], vec![rat(s[2], 1), rat(s[3], 1)]]);
        prop_assume!(!sm.det().is_zero());
        prop_assume!(x.iter().any(|&v| v != 0));
        let j = Matrix::from_rows(vec![vec![rat(a, 1), rat(1, 1)], vec![rat(0, 1), rat(a, 1)]]);
        let m = &(&sm * &j) * &sm.inverse().unwrap();
        let dec = jordan_decompose(&m).unwrap();
        prop_assert!(verify_decomposition(&dec, &m));
        prop_assert_eq!(dec.blocks.len(), 1);

        let xv: Vec<Rational> = x.iter().map(|&v| rat(v, 1)).collect();
        let f = Formula::atom(MPoly::from_i64(2, &[(1, &[0, 0])]), Relation::Lt);
        let p = Problem::new(m.clone(), xv.clone(), f).unwrap();
        let an = Analysis::new(&p).unwrap();
        let c = an.cone.as_ref().unwrap();
        let mut y = xv;
        for n in 0..8u64 {
            let (pn, _) = c.orbit_alignment(n);
            let out = c.output_exact(c.ctx(), &pn, n);
            prop_assert!(out.iter().zip(&y).all(|(g, q)| g.equals_rational(q, c.ctx())));
            y = m.mul_vec(&y);
        }
    }
}

#[test]
fn lattice_contains_structural_relations() {
    let th = AlgebraicNumber::from_rational(rat(3, 5)) + AlgebraicNumber::from_rational(rat(4, 5)) * AlgebraicNumber::imag_unit();
    let lat = relation_lattice(&[th.clone(), th.pow(3), th.conj()]);
    assert!(lat.contains(&[3, -1, 0]));
    assert!(lat.contains(&[1, 0, 1]));
    assert!(!lat.contains(&[1, 0, 0]));
    assert_eq!(lat.rank(), 2);

    let i = AlgebraicNumber::imag_unit();
    let lat = relation_lattice(&[i.clone(), i.negate()]);
    assert!(lat.contains(&[4, 0]));
    // i^a (-i)^b = 1 iff a = b mod 4.
    assert!(lat.contains(&[1, 1]));
    assert!(!lat.contains(&[1, -1]));
    assert_eq!(lat.index(), Some(4));
}

#[test]
fn lattice_relations_hold_for_every_suite_cone() {
    for inst in instances() {
        let an = Analysis::new(&inst.problem).unwrap();
        let Some(c) = &an.cone else { continue };
        for p in c.torus_points().unwrap_or(&[]) {
            assert!(p.satisfies(&c.torus.lattice), "{}", inst.name);
        }
    }
}

#[test]
fn certificate_prefix_covers_steps_to_t0() {
    let p = instances().into_iter().find(|i| i.name == "diag2-invariant").unwrap().problem;
    let an = Analysis::new(&p).unwrap();
    let cert = emit_certificate(&p, &an, rat(8, 1)).unwrap();
    assert_eq!(cert.prefix.len(), 3);
    assert_eq!(cert.prefix[2], vec![rat(4, 1), rat(4, 1)]);
}
