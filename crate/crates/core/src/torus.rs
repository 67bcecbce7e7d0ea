//! Multiplicative relations among unit-modulus eigenvalue phases, the torus
//! they cut out, and exact signs of integer combinations of log-moduli.

use serde::{Deserialize, Serialize};

use crate::algebra::algebraic::AlgebraicNumber;
use crate::algebra::complex::ComplexInterval;
use crate::algebra::genpoly::{GenContext, GenPoly};
use crate::algebra::interval::Interval;
use crate::algebra::Sign;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    Proven,
    SearchBounded(u32),
}

/// Integer relations `v` with `prod lambda_i^v_i = 1`, as an HNF row basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLattice {
    pub k: usize,
    pub basis: Vec<Vec<i64>>,
    pub completeness: Completeness,
}

/// A point of the torus whose coordinates are `exp(2 pi i a_j / n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusPoint {
    pub n: u64,
    pub a: Vec<i64>,
}

impl TorusPoint {
    pub fn identity(k: usize) -> TorusPoint {
        TorusPoint { n: 1, a: vec![0; k] }
    }

    pub fn coords(&self) -> Vec<AlgebraicNumber> {
        self.a.iter().map(|&x| AlgebraicNumber::root_of_unity(self.n, x)).collect()
    }

    /// Coordinates as expressions over a generator context.
    pub fn coords_gen(&self, ctx: &mut GenContext) -> Vec<GenPoly> {
        self.a.iter().map(|&x| ctx.root_of_unity(self.n, x)).collect()
    }

    pub fn enclosure(&self, prec: u32) -> Vec<ComplexInterval> {
        self.a
            .iter()
            .map(|&x| {
                let q = Rational::new((2 * x.rem_euclid(self.n as i64)).into(), self.n.into());
                let th = &Interval::pi(prec + 8) * &Interval::from_rational(&q, prec + 8);
                ComplexInterval::cis(&th)
            })
            .collect()
    }

    /// Whether every relation `v` satisfies `sum v_i a_i = 0 mod n`.
    pub fn satisfies(&self, lat: &RelationLattice) -> bool {
        lat.basis.iter().all(|v| {
            let s: i128 = v.iter().zip(&self.a).map(|(&x, &y)| x as i128 * y as i128).sum();
            s.rem_euclid(self.n as i128) == 0
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TorusKind {
    Finite { points: Vec<TorusPoint> },
    /// `alpha_i = exp(2 pi i (V phi)_i)` with `phi_j` free for `j >= g` and
    /// `phi_j in (1/d_j) Z` for `j < g`.
    Dense { rank: usize, character: Vec<Vec<i64>>, divisors: Vec<i64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusGroup {
    pub lattice: RelationLattice,
    pub kind: TorusKind,
}

// ---------------------------------------------------------------------------
// Integer lattice utilities.

/// Row-style Hermite normal form of the lattice spanned by `rows`
/// (zero rows dropped, positive pivots, entries above pivots reduced).
pub fn hnf(rows: &[Vec<i64>], k: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut out: Vec<Vec<i128>> = Vec::new();
    let mut row = 0;
    for col in 0..k {
        // Euclid on column entries among rows >= row.
        loop {
            let nz: Vec<usize> = (row..m.len()).filter(|&i| m[i][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| m[i][col].abs()).unwrap();
            for &i in &nz {
                if i != p {
                    let q = m[i][col].div_euclid(m[p][col]);
                    for c in 0..k {
                        m[i][c] -= q * m[p][c];
                    }
                }
            }
        }
        if let Some(p) = (row..m.len()).find(|&i| m[i][col] != 0) {
            m.swap(row, p);
            if m[row][col] < 0 {
                for c in 0..k {
                    m[row][c] = -m[row][c];
                }
            }
            row += 1;
        }
    }
    m.truncate(row);
    // Reduce above pivots.
    for i in 0..m.len() {
        let col = (0..k).find(|&c| m[i][c] != 0).unwrap();
        for r in 0..i {
            let q = m[r][col].div_euclid(m[i][col]);
            if q != 0 {
                for c in 0..k {
                    m[r][c] -= q * m[i][c];
                }
            }
        }
    }
    out.extend(m);
    out.into_iter().map(|r| r.into_iter().map(|x| i64::try_from(x).expect("lattice entry overflow")).collect()).collect()
}

/// Smith form `U M V = D`; returns `(diagonal, V)` for a full-row-rank `M`.
pub fn smith(m: &[Vec<i64>], k: usize) -> (Vec<i64>, Vec<Vec<i64>>) {
    let g = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| (i == j) as i128).collect()).collect();
    for t in 0..g {
        loop {
            // Pivot: smallest non-zero in the remaining submatrix.
            let mut best: Option<(usize, usize)> = None;
            for i in t..g {
                for j in t..k {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..g {
                let q = a[i][t].div_euclid(p);
                for c in 0..k {
                    a[i][c] -= q * a[t][c];
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..k {
                let q = a[t][j].div_euclid(p);
                for r in 0..g {
                    a[r][j] -= q * a[r][t];
                }
                for r in 0..k {
                    v[r][j] -= q * v[r][t];
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility condition.
            let mut bad = None;
            for i in t + 1..g {
                for j in t + 1..k {
                    if a[i][j] % p != 0 {
                        bad = Some(i);
                    }
                }
            }
            match bad {
                None => break,
                Some(i) => {
                    for c in 0..k {
                        a[t][c] += a[i][c];
                    }
                }
            }
        }
        if a[t][t] < 0 {
            for c in 0..k {
                a[t][c] = -a[t][c];
            }
        }
    }
    let diag = (0..g).map(|i| a[i][i] as i64).collect();
    let vv = v.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect();
    (diag, vv)
}

// ---------------------------------------------------------------------------

/// Default cap on the exhaustive relation search radius.
pub const SEARCH_CAP: u32 = 6;

fn arg_over_2pi(l: &AlgebraicNumber, prec: u32) -> Interval {
    let e = l.enclosure(prec);
    let two_pi = Interval::pi(prec).mul_pow2(1);
    &e.arg() / &two_pi
}

/// Exact test `prod lambda_i^v_i = 1` for unit-modulus `lambda` (inverse = conjugate).
fn is_relation(ctx: &GenContext, gens: &[GenPoly], v: &[i64]) -> bool {
    let mut num = GenPoly::constant(Rational::from_integer(1.into()));
    for (g, &e) in gens.iter().zip(v) {
        let base = if e >= 0 { g.clone() } else { g.conj(ctx) };
        num = (num * base.pow(e.unsigned_abs() as u32)).reduce(ctx);
    }
    num.equals_rational(&Rational::from_integer(1.into()), ctx)
}

/// Relation lattice of unit-modulus numbers.
pub fn relation_lattice(lambda: &[AlgebraicNumber]) -> RelationLattice {
    relation_lattice_with_cap(lambda, SEARCH_CAP)
}

pub fn relation_lattice_with_cap(lambda: &[AlgebraicNumber], cap: u32) -> RelationLattice {
    let k = lambda.len();
    let mut rels: Vec<Vec<i64>> = Vec::new();
    let unit = |i: usize, s: i64| {
        let mut v = vec![0; k];
        v[i] = s;
        v
    };
    // Torsion coordinates.
    let orders: Vec<Option<u64>> = lambda.iter().map(|l| l.is_root_of_unity()).collect();
    for (i, o) in orders.iter().enumerate() {
        if let Some(n) = o {
            rels.push(unit(i, *n as i64));
        }
    }
    // Structural relations: equal values and conjugate (= inverse) values.
    let mut class: Vec<usize> = (0..k).collect();
    let mut inverse_of: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        for j in 0..i {
            if class[j] == j && orders[i].is_none() && orders[j].is_none() {
                if lambda[i].equals(&lambda[j]) {
                    class[i] = j;
                    let mut v = vec![0; k];
                    v[i] = 1;
                    v[j] = -1;
                    rels.push(v);
                    break;
                }
                if !lambda[i].is_real() && lambda[i].equals(&lambda[j].conj()) {
                    inverse_of[i] = Some(j);
                    let mut v = vec![0; k];
                    v[i] = 1;
                    v[j] = 1;
                    rels.push(v);
                    break;
                }
            }
        }
    }
    // Exact torsion relations among root-of-unity coordinates.
    let tors: Vec<usize> = (0..k).filter(|&i| orders[i].is_some()).collect();
    if !tors.is_empty() {
        let n = tors.iter().map(|&i| orders[i].unwrap()).fold(1u64, num_integer::lcm);
        let exps: Vec<i64> = tors.iter().map(|&i| torsion_exponent(&lambda[i], n)).collect();
        for v in modular_kernel(&exps, n as i64) {
            let mut w = vec![0; k];
            for (t, &i) in tors.iter().enumerate() {
                w[i] = v[t];
            }
            rels.push(w);
        }
    }
    let symbols: Vec<usize> = (0..k).filter(|&i| orders[i].is_none() && class[i] == i && inverse_of[i].is_none()).collect();
    let completeness = if symbols.len() <= 1 {
        // With at most one free symbol mu, any relation reduces to mu^c
        // times a root of unity; c != 0 would make mu torsion.
        Completeness::Proven
    } else {
        let degs: u64 = lambda.iter().map(|l| l.degree() as u64).product();
        let total_cap = ((200_000f64).powf(1.0 / k as f64) - 1.0) / 2.0;
        let b = (degs.min(cap as u64) as u32).min(total_cap.max(1.0) as u32).max(1);
        rels.extend(search_relations(lambda, &orders, b));
        Completeness::SearchBounded(b)
    };
    RelationLattice { k, basis: hnf(&rels, k), completeness }
}

/// `a` with `l = exp(2 pi i a / n)`, for a root of unity of order dividing `n`.
fn torsion_exponent(l: &AlgebraicNumber, n: u64) -> i64 {
    let t = arg_over_2pi(l, 64);
    let m = &t * &Interval::from_int(n as i64, 64);
    let a = m.mid().round_to_int();
    let a: i64 = a.try_into().unwrap();
    debug_assert!(AlgebraicNumber::root_of_unity(n, a).equals(l));
    a.rem_euclid(n as i64)
}

/// Basis of `{v : sum a_i v_i = 0 mod n}`.
fn modular_kernel(a: &[i64], n: i64) -> Vec<Vec<i64>> {
    let t = a.len();
    // Integer kernel of the row (a_1 .. a_t, n), projected to the first t entries.
    let mut cols: Vec<Vec<i128>> = (0..=t)
        .map(|j| {
            let mut c = vec![0i128; t + 2];
            c[0] = if j < t { a[j] as i128 } else { n as i128 };
            c[j + 1] = 1;
            c
        })
        .collect();
    // Column Euclid on the first entry.
    loop {
        let nz: Vec<usize> = (0..cols.len()).filter(|&j| cols[j][0] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let p = *nz.iter().min_by_key(|&&j| cols[j][0].abs()).unwrap();
        for &j in &nz {
            if j != p {
                let q = cols[j][0].div_euclid(cols[p][0]);
                for r in 0..t + 2 {
                    cols[j][r] -= q * cols[p][r];
                }
            }
        }
    }
    let mut out: Vec<Vec<i64>> = cols
        .iter()
        .filter(|c| c[0] == 0)
        .map(|c| (1..=t).map(|r| c[r] as i64).collect())
        .collect();
    for i in 0..t {
        let mut v = vec![0; t];
        v[i] = n;
        out.push(v);
    }
    hnf(&out, t)
}

fn search_relations(lambda: &[AlgebraicNumber], orders: &[Option<u64>], b: u32) -> Vec<Vec<i64>> {
    let k = lambda.len();
    let prec = 96;
    let args: Vec<Interval> = lambda.iter().map(|l| arg_over_2pi(l, prec)).collect();
    let mut ctx = GenContext::new();
    let gens: Vec<GenPoly> = lambda.iter().map(|l| ctx.add(l)).collect();
    let b = b as i64;
    let mut out = Vec::new();
    let mut v = vec![-b; k];
    loop {
        // Canonical sign: first non-zero entry positive; skip pure torsion vectors.
        let first = v.iter().find(|&&x| x != 0).copied();
        let touches_free = v.iter().enumerate().any(|(i, &x)| x != 0 && orders[i].is_none());
        if first.map_or(false, |f| f > 0) && touches_free {
            let mut s = Interval::zero(prec);
            for (a, &e) in args.iter().zip(&v) {
                s = &s + &(a * &Interval::from_int(e, prec));
            }
            let r = s.mid().round_to_int();
            let near = Interval::from_rational(&Rational::from_integer(r), prec);
            if (&s - &near).contains_zero() && is_relation(&ctx, &gens, &v) {
                out.push(v.clone());
            }
        }
        // Next vector.
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
            i += 1;
        }
    }
}

/// Exact relation check for a full lattice against given phases.
pub fn verify_lattice(lat: &RelationLattice, lambda: &[AlgebraicNumber]) -> bool {
    let mut ctx = GenContext::new();
    let gens: Vec<GenPoly> = lambda.iter().map(|l| ctx.add(l)).collect();
    lat.basis.iter().all(|v| is_relation(&ctx, &gens, v))
}

impl RelationLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Index of the lattice in `Z^k` (full rank only).
    pub fn index(&self) -> Option<i64> {
        if self.rank() < self.k {
            return None;
        }
        Some((0..self.k).map(|i| self.basis[i][i]).product())
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        hnf(&rows, self.k) == self.basis
    }
}

pub fn torus_group(lat: &RelationLattice) -> TorusGroup {
    let k = lat.k;
    if k == 0 {
        return TorusGroup { lattice: lat.clone(), kind: TorusKind::Finite { points: vec![TorusPoint::identity(0)] } };
    }
    let (divisors, character) = smith(&lat.basis, k);
    if lat.rank() == k {
        let n = *divisors.iter().max().unwrap_or(&1) as u64;
        let points = roots_of_unity_points_lattice(lat, n);
        return TorusGroup { lattice: lat.clone(), kind: TorusKind::Finite { points } };
    }
    TorusGroup { lattice: lat.clone(), kind: TorusKind::Dense { rank: k - lat.rank(), character, divisors } }
}

fn roots_of_unity_points_lattice(lat: &RelationLattice, n: u64) -> Vec<TorusPoint> {
    let k = lat.k;
    let mut out = Vec::new();
    let mut a = vec![0i64; k];
    loop {
        let p = TorusPoint { n, a: a.clone() };
        if p.satisfies(lat) {
            out.push(p);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if a[i] + 1 < n as i64 {
                a[i] += 1;
                break;
            }
            a[i] = 0;
        }
    }
}

/// Points of `T` with coordinates of order dividing `n`, lexicographic in exponents.
pub fn roots_of_unity_points(t: &TorusGroup, n: u64) -> Vec<TorusPoint> {
    roots_of_unity_points_lattice(&t.lattice, n.max(1))
}

impl TorusGroup {
    pub fn is_finite(&self) -> bool {
        matches!(self.kind, TorusKind::Finite { .. })
    }

    /// Point `exp(2 pi i V phi)` for real angle enclosures `phi_j` (free part)
    /// and finite-part numerators `c_j` (`phi_j = c_j / d_j`).
    pub fn param_point(&self, finite: &[i64], free: &[Interval], prec: u32) -> Vec<ComplexInterval> {
        let TorusKind::Dense { character, divisors, .. } = &self.kind else {
            panic!("param_point on a finite torus");
        };
        let k = self.lattice.k;
        let g = divisors.len();
        let mut phi: Vec<Interval> = Vec::with_capacity(k);
        for j in 0..k {
            if j < g {
                phi.push(Interval::from_rational(&Rational::new(finite[j].into(), divisors[j].into()), prec));
            } else {
                phi.push(free[j - g].clone());
            }
        }
        let two_pi = Interval::pi(prec).mul_pow2(1);
        (0..k)
            .map(|i| {
                let mut s = Interval::zero(prec);
                for j in 0..k {
                    s = &s + &(&phi[j] * &Interval::from_int(character[i][j], prec));
                }
                ComplexInterval::cis(&(&s * &two_pi))
            })
            .collect()
    }

    /// All choices of the finite part numerators.
    pub fn finite_parts(&self) -> Vec<Vec<i64>> {
        let TorusKind::Dense { divisors, .. } = &self.kind else { return vec![Vec::new()] };
        let mut out = vec![Vec::new()];
        for &d in divisors {
            out = out.into_iter().flat_map(|p: Vec<i64>| (0..d).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        out
    }
}

/// Exact sign of `sum n_i ln rho_i` for positive real algebraic `rho_i`.
pub fn moduli_combination_sign(n: &[i64], rho: &[AlgebraicNumber]) -> Sign {
    assert_eq!(n.len(), rho.len());
    // Merge equal moduli.
    let mut vals: Vec<AlgebraicNumber> = Vec::new();
    let mut exps: Vec<i64> = Vec::new();
    for (e, r) in n.iter().zip(rho) {
        if *e == 0 {
            continue;
        }
        match vals.iter().position(|v| v.equals(r)) {
            Some(p) => exps[p] += e,
            None => {
                vals.push(r.clone());
                exps.push(*e);
            }
        }
    }
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| exps[i] != 0 && !vals[i].equals(&AlgebraicNumber::from_int(1))).collect();
    if keep.is_empty() {
        return Sign::Zero;
    }
    // Cheap interval attempt.
    let prec = 128;
    let mut s = Interval::zero(prec);
    for &i in &keep {
        let l = vals[i].real_enclosure(prec).ln();
        s = &s + &(&l * &Interval::from_int(exps[i], prec));
    }
    if let Some(sg) = s.sign() {
        if sg != 0 {
            return Sign::from_i32(sg);
        }
    }
    // Exact: sign of prod_{n>0} rho^n - prod_{n<0} rho^-n.
    let mut ctx = GenContext::new();
    let one = GenPoly::constant(Rational::from_integer(1.into()));
    let (mut pos, mut neg) = (one.clone(), one);
    for &i in &keep {
        let g = ctx.add(&vals[i]).pow(exps[i].unsigned_abs() as u32);
        if exps[i] > 0 {
            pos = (pos * g).reduce(&ctx);
        } else {
            neg = (neg * g).reduce(&ctx);
        }
    }
    (pos - neg).sign_real(&ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::intpoly::from_i64;

    fn an(v: i64) -> AlgebraicNumber {
        AlgebraicNumber::from_int(v)
    }

    #[test]
    fn lattice_examples() {
        let i = AlgebraicNumber::imag_unit();
        let lat = relation_lattice(&[i.clone(), i.negate()]);
        assert_eq!(lat.basis, vec![vec![1, 1], vec![0, 4]]);
        assert_eq!(lat.completeness, Completeness::Proven);
        let t = torus_group(&lat);
        let TorusKind::Finite { points } = &t.kind else { panic!() };
        assert_eq!(points.len(), 4);
        assert!(verify_lattice(&lat, &[i.clone(), i.negate()]));

        let lat1 = relation_lattice(&[an(1)]);
        assert_eq!(lat1.basis, vec![vec![1]]);
        let TorusKind::Finite { points } = torus_group(&lat1).kind else { panic!() };
        assert_eq!(points.len(), 1);

        let r = AlgebraicNumber::roots_of_irreducible(&from_i64(&[5, -6, 5]));
        let lat2 = relation_lattice(&[r[0].clone(), r[1].clone()]);
        assert_eq!(lat2.basis, vec![vec![1, 1]]);
        let t2 = torus_group(&lat2);
        assert!(!t2.is_finite());
        let p2 = roots_of_unity_points(&t2, 2);
        assert_eq!(p2.len(), 2);
        let p4 = roots_of_unity_points(&t2, 4);
        assert_eq!(p4.len(), 4);
        assert!(p4.contains(&TorusPoint { n: 4, a: vec![1, 3] }));
    }

    #[test]
    fn independent_phases_search() {
        // (3+4i)/5 and (5+12i)/13 are multiplicatively independent.
        let a = AlgebraicNumber::roots_of_irreducible(&from_i64(&[5, -6, 5]));
        let b = AlgebraicNumber::roots_of_irreducible(&from_i64(&[13, -10, 13]));
        let lat = relation_lattice(&[a[1].clone(), a[0].clone(), b[1].clone(), b[0].clone()]);
        assert_eq!(lat.basis, vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]);
        assert!(matches!(lat.completeness, Completeness::SearchBounded(_)));
        // a^2 vs a: relation a^2 * conj(a)^... found by search.
        let a2 = a[1].pow(2);
        let lat = relation_lattice(&[a[1].clone(), a2.clone(), a2.conj()]);
        assert!(lat.contains(&[2, -1, 0]));
        assert!(verify_lattice(&lat, &[a[1].clone(), a2.clone(), a2.conj()]));
    }

    #[test]
    fn smith_parametrization() {
        let lat = RelationLattice { k: 2, basis: vec![vec![1, 1]], completeness: Completeness::Proven };
        let t = torus_group(&lat);
        let TorusKind::Dense { rank, .. } = &t.kind else { panic!() };
        assert_eq!(*rank, 1);
        let pts = t.param_point(&[0], &[Interval::from_rational(&Rational::new(1.into(), 8.into()), 64)], 64);
        let prod = &pts[0] * &pts[1];
        assert!(prod.re.contains_rational(&Rational::from_integer(1.into())));
        assert!(prod.im.contains_zero());
    }

    #[test]
    fn sign_examples() {
        assert_eq!(moduli_combination_sign(&[2, -1], &[an(2), an(4)]), Sign::Zero);
        assert_eq!(moduli_combination_sign(&[1, -1], &[an(2), an(3)]), Sign::Negative);
        assert_eq!(moduli_combination_sign(&[1, -1], &[an(8), an(4)]), Sign::Positive);
        let s2 = AlgebraicNumber::from_int(2).sqrt_real();
        assert_eq!(moduli_combination_sign(&[2, -1], &[s2.clone(), an(2)]), Sign::Zero);
        assert_eq!(moduli_combination_sign(&[3, -1], &[s2, an(2)]), Sign::Positive);
    }
}
