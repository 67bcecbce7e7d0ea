//! Eventual signs of sums `sum t^(n . b) f(u)` along rays, with explicit
//! dominance thresholds, and eventual truth of sign conditions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::algebraic::AlgebraicNumber;
use crate::algebra::complex::ComplexInterval;
use crate::algebra::dyadic::{Dyadic, Round};
use crate::algebra::genpoly::{GenContext, GenPoly};
use crate::algebra::interval::Interval;
use crate::algebra::Sign;
use crate::cone::TrajectoryCone;
use crate::spectral::Regime;
use crate::torus::moduli_combination_sign;
use crate::Rational;

// ---------------------------------------------------------------------------
// Polynomials and formulas over the output coordinates.

/// Integer polynomial in `nvars` variables; terms sorted by exponent, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: Vec<(BigInt, Vec<u32>)>,
}

impl MPoly {
    pub fn new(nvars: usize, terms: Vec<(BigInt, Vec<u32>)>) -> MPoly {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (c, e) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            *map.entry(e).or_insert_with(BigInt::zero) += c;
        }
        MPoly { nvars, terms: map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect() }
    }

    pub fn from_i64(nvars: usize, terms: &[(i64, &[u32])]) -> MPoly {
        MPoly::new(nvars, terms.iter().map(|(c, e)| (BigInt::from(*c), e.to_vec())).collect())
    }

    pub fn constant(nvars: usize, c: i64) -> MPoly {
        MPoly::new(nvars, vec![(c.into(), vec![0; nvars])])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn negate(&self) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(c, e)| (-c, e.clone())).collect() }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (c, e) in &self.terms {
            let mut m = Rational::from_integer(c.clone());
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += m;
        }
        acc
    }

    /// Sign at `v / den` for `den > 0`, evaluated homogeneously over the integers.
    pub fn sign_at_scaled(&self, v: &[BigInt], den: &BigInt) -> Sign {
        let d = self.degree();
        let mut acc = BigInt::zero();
        for (c, e) in &self.terms {
            let mut m = c.clone();
            let mut deg = 0;
            for (vi, &k) in v.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(vi.clone(), k as usize);
                    deg += k;
                }
            }
            if d > deg {
                m *= num_traits::pow(den.clone(), (d - deg) as usize);
            }
            acc += m;
        }
        Sign::from_i32(if acc.is_positive() { 1 } else if acc.is_negative() { -1 } else { 0 })
    }

    pub fn eval_interval(&self, x: &[Interval], prec: u32) -> Interval {
        let mut acc = Interval::zero(prec);
        for (c, e) in &self.terms {
            let mut m = Interval::from_rational(&Rational::from_integer(c.clone()), prec);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m = &m * &xi.powi(k);
                }
            }
            acc = &acc + &m;
        }
        acc
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (c, e)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("y{}", i + 1) } else { format!("y{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", a, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn holds(self, s: Sign) -> bool {
        match self {
            Relation::Gt => s == Sign::Positive,
            Relation::Ge => s != Sign::Negative,
            Relation::Eq => s == Sign::Zero,
            Relation::Ne => s != Sign::Zero,
            Relation::Lt => s == Sign::Negative,
            Relation::Le => s != Sign::Positive,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub poly: MPoly,
    pub rel: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn atom(poly: MPoly, rel: Relation) -> Formula {
        Formula::Atom(Atom { poly, rel })
    }

    pub fn nvars(&self) -> Option<usize> {
        match self {
            Formula::Atom(a) => Some(a.poly.nvars),
            Formula::And(v) | Formula::Or(v) => v.iter().find_map(|f| f.nvars()),
            Formula::Not(f) => f.nvars(),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        match self {
            Formula::Atom(a) => vec![a],
            Formula::And(v) | Formula::Or(v) => v.iter().flat_map(|f| f.atoms()).collect(),
            Formula::Not(f) => f.atoms(),
        }
    }

    /// Truth given a sign oracle for the atom polynomials.
    pub fn eval_with(&self, sign: &mut impl FnMut(&MPoly) -> Sign) -> bool {
        match self {
            Formula::Atom(a) => a.rel.holds(sign(&a.poly)),
            Formula::And(v) => v.iter().all(|f| f.eval_with(sign)),
            Formula::Or(v) => v.iter().any(|f| f.eval_with(sign)),
            Formula::Not(f) => !f.eval_with(sign),
        }
    }

    pub fn eval_rational(&self, x: &[Rational]) -> bool {
        self.eval_with(&mut |p| {
            let v = p.eval_rational(x);
            Sign::from_i32(if v.is_positive() { 1 } else if v.is_negative() { -1 } else { 0 })
        })
    }

    pub fn eval_scaled(&self, v: &[BigInt], den: &BigInt) -> bool {
        self.eval_with(&mut |p| p.sign_at_scaled(v, den))
    }

    pub fn normalize(&self) -> NormalFormula {
        let mut polys = Vec::new();
        let body = normal_rec(self, false, &mut polys);
        NormalFormula { polys, body }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{} {} 0", a.poly, a.rel.symbol()),
            Formula::And(v) | Formula::Or(v) => {
                let op = if matches!(self, Formula::And(_)) { " and " } else { " or " };
                if v.is_empty() {
                    return write!(f, "{}", if matches!(self, Formula::And(_)) { "true" } else { "false" });
                }
                let parts: Vec<String> = v.iter().map(|x| format!("({})", x)).collect();
                write!(f, "{}", parts.join(op))
            }
            Formula::Not(x) => write!(f, "not ({})", x),
        }
    }
}

/// Literal over `R > 0` or `R = 0` for a stored polynomial (possibly negated).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Literal {
    Gt { poly: usize, flip: bool, negated: bool },
    Eq { poly: usize, negated: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalBody {
    Const(bool),
    Lit(Literal),
    And(Vec<NormalBody>),
    Or(Vec<NormalBody>),
}

/// A formula with negations pushed to `{>, =}` literals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormula {
    pub polys: Vec<MPoly>,
    pub body: NormalBody,
}

fn poly_index(p: &MPoly, polys: &mut Vec<MPoly>) -> usize {
    match polys.iter().position(|q| q == p) {
        Some(i) => i,
        None => {
            polys.push(p.clone());
            polys.len() - 1
        }
    }
}

fn normal_rec(f: &Formula, neg: bool, polys: &mut Vec<MPoly>) -> NormalBody {
    match f {
        Formula::Not(x) => normal_rec(x, !neg, polys),
        Formula::And(v) | Formula::Or(v) => {
            let is_and = matches!(f, Formula::And(_)) != neg;
            let parts: Vec<NormalBody> = v.iter().map(|x| normal_rec(x, neg, polys)).collect();
            if parts.is_empty() {
                return NormalBody::Const(is_and);
            }
            if is_and {
                NormalBody::And(parts)
            } else {
                NormalBody::Or(parts)
            }
        }
        Formula::Atom(a) => {
            let p = poly_index(&a.poly, polys);
            let gt = |flip, negated| NormalBody::Lit(Literal::Gt { poly: p, flip, negated });
            let eq = |negated| NormalBody::Lit(Literal::Eq { poly: p, negated });
            // R >= 0 is R > 0 or R = 0, and so on.
            let pos = match a.rel {
                Relation::Gt => gt(false, false),
                Relation::Lt => gt(true, false),
                Relation::Eq => eq(false),
                Relation::Ne => eq(true),
                Relation::Ge => NormalBody::Or(vec![gt(false, false), eq(false)]),
                Relation::Le => NormalBody::Or(vec![gt(true, false), eq(false)]),
            };
            if neg {
                negate_body(pos)
            } else {
                pos
            }
        }
    }
}

fn negate_body(b: NormalBody) -> NormalBody {
    match b {
        NormalBody::Const(c) => NormalBody::Const(!c),
        NormalBody::Lit(Literal::Gt { poly, flip, negated }) => NormalBody::Lit(Literal::Gt { poly, flip, negated: !negated }),
        NormalBody::Lit(Literal::Eq { poly, negated }) => NormalBody::Lit(Literal::Eq { poly, negated: !negated }),
        NormalBody::And(v) => NormalBody::Or(v.into_iter().map(negate_body).collect()),
        NormalBody::Or(v) => NormalBody::And(v.into_iter().map(negate_body).collect()),
    }
}

impl NormalFormula {
    /// Kleene evaluation on (possibly unknown) signs of the stored polynomials.
    pub fn eval(&self, signs: &[Option<Sign>]) -> Option<bool> {
        eval_body(&self.body, signs)
    }

    pub fn negate(&self) -> NormalFormula {
        NormalFormula { polys: self.polys.clone(), body: negate_body(self.body.clone()) }
    }
}

fn eval_body(b: &NormalBody, s: &[Option<Sign>]) -> Option<bool> {
    match b {
        NormalBody::Const(c) => Some(*c),
        NormalBody::Lit(Literal::Gt { poly, flip, negated }) => s[*poly].map(|x| {
            let x = if *flip { x.negate() } else { x };
            (x == Sign::Positive) != *negated
        }),
        NormalBody::Lit(Literal::Eq { poly, negated }) => s[*poly].map(|x| (x == Sign::Zero) != *negated),
        NormalBody::And(v) => {
            let mut unknown = false;
            for x in v {
                match eval_body(x, s) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    _ => {}
                }
            }
            if unknown {
                None
            } else {
                Some(true)
            }
        }
        NormalBody::Or(v) => {
            let mut unknown = false;
            for x in v {
                match eval_body(x, s) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    _ => {}
                }
            }
            if unknown {
                None
            } else {
                Some(false)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficient rings.

pub trait Coefficient: Clone + fmt::Debug {
    type Ctx;
    fn null() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn add(&self, o: &Self, ctx: &Self::Ctx) -> Self;
    fn mul(&self, o: &Self, ctx: &Self::Ctx) -> Self;
    fn neg(&self) -> Self;
    /// Certainly zero.
    fn vanishes(&self, ctx: &Self::Ctx) -> bool;
    /// Sign of a real value, `None` if undetermined.
    fn sign(&self, ctx: &Self::Ctx) -> Option<Sign>;
    /// Enclosure of the (real) value.
    fn enclosure(&self, ctx: &Self::Ctx, prec: u32) -> Interval;
}

/// Coefficients that may be complex before the real part is taken.
pub trait PhaseCoefficient: Coefficient {
    fn from_gen(g: &GenPoly, ctx: &Self::Ctx) -> Self;
    fn real_part(&self, ctx: &Self::Ctx) -> Self;
}

fn sign_of_rational(q: &Rational) -> Sign {
    Sign::from_i32(if q.is_positive() { 1 } else if q.is_negative() { -1 } else { 0 })
}

impl Coefficient for Rational {
    type Ctx = ();
    fn null() -> Self {
        Rational::zero()
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self, _: &()) -> Self {
        self + o
    }
    fn mul(&self, o: &Self, _: &()) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn vanishes(&self, _: &()) -> bool {
        Zero::is_zero(self)
    }
    fn sign(&self, _: &()) -> Option<Sign> {
        Some(sign_of_rational(self))
    }
    fn enclosure(&self, _: &(), prec: u32) -> Interval {
        Interval::from_rational(self, prec)
    }
}

impl Coefficient for Interval {
    type Ctx = ();
    fn null() -> Self {
        Interval::zero(128)
    }
    fn from_rational(q: &Rational) -> Self {
        Interval::from_rational(q, 128)
    }
    fn add(&self, o: &Self, _: &()) -> Self {
        self + o
    }
    fn mul(&self, o: &Self, _: &()) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn vanishes(&self, _: &()) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }
    fn sign(&self, _: &()) -> Option<Sign> {
        match self.sign() {
            Some(s) => Some(Sign::from_i32(s)),
            None => None,
        }
    }
    fn enclosure(&self, _: &(), prec: u32) -> Interval {
        self.clone().with_prec(prec)
    }
}

impl Coefficient for GenPoly {
    type Ctx = GenContext;
    fn null() -> Self {
        GenPoly::zero()
    }
    fn from_rational(q: &Rational) -> Self {
        GenPoly::constant(q.clone())
    }
    fn add(&self, o: &Self, _: &GenContext) -> Self {
        self.clone() + o.clone()
    }
    fn mul(&self, o: &Self, ctx: &GenContext) -> Self {
        (self.clone() * o.clone()).reduce(ctx)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn vanishes(&self, ctx: &GenContext) -> bool {
        self.is_zero_exact(ctx)
    }
    fn sign(&self, ctx: &GenContext) -> Option<Sign> {
        Some(self.sign_real(ctx))
    }
    fn enclosure(&self, ctx: &GenContext, prec: u32) -> Interval {
        self.eval(ctx, prec).re
    }
}

impl PhaseCoefficient for GenPoly {
    fn from_gen(g: &GenPoly, _: &GenContext) -> Self {
        g.clone()
    }
    fn real_part(&self, ctx: &GenContext) -> Self {
        GenPoly::real_part(self, ctx)
    }
}

/// Laurent polynomial in free unit variables `w_j = exp(2 pi i phi_j)` with
/// exact coefficients; the context fixes a box of angles (in turns).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub terms: BTreeMap<Vec<i64>, GenPoly>,
}

#[derive(Clone, Debug)]
pub struct TrigCtx {
    pub gen: GenContext,
    pub cell: Vec<Interval>,
    pub prec: u32,
}

impl TrigPoly {
    pub fn monomial(e: Vec<i64>, c: GenPoly) -> TrigPoly {
        let mut terms = BTreeMap::new();
        terms.insert(e, c);
        TrigPoly { terms }
    }

    fn constant_part(&self) -> Option<&GenPoly> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c);
            }
        }
        None
    }

    fn eval_cell(&self, ctx: &TrigCtx) -> ComplexInterval {
        let prec = ctx.prec;
        let two_pi = Interval::pi(prec).mul_pow2(1);
        let w: Vec<ComplexInterval> = ctx.cell.iter().map(|phi| ComplexInterval::cis(&(phi * &two_pi))).collect();
        let mut acc = ComplexInterval::zero(prec);
        for (e, c) in &self.terms {
            let mut m = c.eval(&ctx.gen, prec);
            for (wj, &k) in w.iter().zip(e) {
                if k > 0 {
                    m = &m * &wj.powi(k as u64);
                } else if k < 0 {
                    m = &m * &wj.conj().powi((-k) as u64);
                }
            }
            acc = &acc + &m;
        }
        acc
    }
}

impl Coefficient for TrigPoly {
    type Ctx = TrigCtx;
    fn null() -> Self {
        TrigPoly { terms: BTreeMap::new() }
    }
    fn from_rational(q: &Rational) -> Self {
        if Zero::is_zero(q) {
            return TrigPoly::null();
        }
        TrigPoly::monomial(Vec::new(), GenPoly::constant(q.clone()))
    }
    fn add(&self, o: &Self, _: &TrigCtx) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            let v = terms.remove(e).map_or_else(|| c.clone(), |x| x + c.clone());
            if v.num_terms() > 0 {
                terms.insert(e.clone(), v);
            }
        }
        TrigPoly { terms }
    }
    fn mul(&self, o: &Self, ctx: &TrigCtx) -> Self {
        let mut terms: BTreeMap<Vec<i64>, GenPoly> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let n = e1.len().max(e2.len());
                let e: Vec<i64> = (0..n).map(|i| e1.get(i).copied().unwrap_or(0) + e2.get(i).copied().unwrap_or(0)).collect();
                let e = trim_exp(e);
                let p = (c1.clone() * c2.clone()).reduce(&ctx.gen);
                let v = terms.remove(&e).map_or(p.clone(), |x| x + p);
                if v.num_terms() > 0 {
                    terms.insert(e, v);
                }
            }
        }
        TrigPoly { terms }
    }
    fn neg(&self) -> Self {
        TrigPoly { terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
    fn vanishes(&self, ctx: &TrigCtx) -> bool {
        self.terms.values().all(|c| c.is_zero_exact(&ctx.gen))
    }
    fn sign(&self, ctx: &TrigCtx) -> Option<Sign> {
        if self.terms.is_empty() {
            return Some(Sign::Zero);
        }
        if let Some(c) = self.constant_part() {
            return Some(c.sign_real(&ctx.gen));
        }
        self.eval_cell(ctx).re.sign().map(Sign::from_i32)
    }
    fn enclosure(&self, ctx: &TrigCtx, prec: u32) -> Interval {
        let c = TrigCtx { gen: ctx.gen.clone(), cell: ctx.cell.clone(), prec };
        self.eval_cell(&c).re
    }
}

fn trim_exp(mut e: Vec<i64>) -> Vec<i64> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl PhaseCoefficient for TrigPoly {
    fn from_gen(g: &GenPoly, _: &TrigCtx) -> Self {
        if g.num_terms() == 0 {
            return TrigPoly::null();
        }
        TrigPoly::monomial(Vec::new(), g.clone())
    }
    fn real_part(&self, ctx: &TrigCtx) -> Self {
        // (q + conj q) / 2 with conj(w^e) = w^-e.
        let half = Rational::new(1.into(), 2.into());
        let mut sum = self.clone();
        let conj = TrigPoly {
            terms: self.terms.iter().map(|(e, c)| (trim_exp(e.iter().map(|x| -x).collect()), c.conj(&ctx.gen))).collect(),
        };
        sum = sum.add(&conj, ctx);
        TrigPoly { terms: sum.terms.into_iter().map(|(e, c)| (e, c.scale(&half).reduce(&ctx.gen))).collect() }
    }
}

// ---------------------------------------------------------------------------
// Exponent basis and exp-log polynomials.

/// Moduli `rho_c` the exponents refer to, and the scale base `tau`.
#[derive(Debug)]
pub struct ExpBasis {
    pub rho: Vec<AlgebraicNumber>,
    pub tau: AlgebraicNumber,
    pub unit: bool,
    cache: Mutex<HashMap<Vec<i64>, Sign>>,
    ln_cache: Mutex<HashMap<u32, (Vec<Interval>, Interval)>>,
}

impl ExpBasis {
    pub fn new(rho: Vec<AlgebraicNumber>, tau: AlgebraicNumber, unit: bool) -> Arc<ExpBasis> {
        Arc::new(ExpBasis { rho, tau, unit, cache: Mutex::new(HashMap::new()), ln_cache: Mutex::new(HashMap::new()) })
    }

    /// Distinct moduli of a cone's blocks, with the class index of every block.
    pub fn from_cone(cone: &TrajectoryCone) -> (Arc<ExpBasis>, Vec<usize>) {
        let mut rho: Vec<AlgebraicNumber> = Vec::new();
        let mut class = Vec::with_capacity(cone.k());
        for r in &cone.rho {
            match rho.iter().position(|x| x.equals(r)) {
                Some(c) => class.push(c),
                None => {
                    rho.push(r.clone());
                    class.push(rho.len() - 1);
                }
            }
        }
        (ExpBasis::new(rho, cone.tau.clone(), cone.regime == Regime::UnitModulus), class)
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    /// Exact order of `n . b` and `m . b`.
    pub fn compare(&self, n: &[i64], m: &[i64]) -> Ordering {
        if self.unit {
            return Ordering::Equal;
        }
        let diff: Vec<i64> = (0..self.dim()).map(|i| n.get(i).copied().unwrap_or(0) - m.get(i).copied().unwrap_or(0)).collect();
        if diff.iter().all(|&x| x == 0) {
            return Ordering::Equal;
        }
        if let Some(s) = self.cache.lock().unwrap().get(&diff) {
            return s.to_i32().cmp(&0);
        }
        let s = moduli_combination_sign(&diff, &self.rho);
        self.cache.lock().unwrap().insert(diff, s);
        s.to_i32().cmp(&0)
    }

    /// `ln rho_c` and `ln tau` enclosures.
    pub fn logs(&self, prec: u32) -> (Vec<Interval>, Interval) {
        if let Some(v) = self.ln_cache.lock().unwrap().get(&prec) {
            return v.clone();
        }
        let ln = |a: &AlgebraicNumber| {
            if a.as_rational().map_or(false, |q| q.is_one()) {
                Interval::zero(prec)
            } else {
                a.real_enclosure(prec + 16).ln().with_prec(prec)
            }
        };
        let v = (self.rho.iter().map(ln).collect(), ln(&self.tau));
        self.ln_cache.lock().unwrap().insert(prec, v.clone());
        v
    }

    /// Enclosure of `n . b = sum n_c ln rho_c / ln tau`.
    pub fn exponent_value(&self, n: &[i64], prec: u32) -> Interval {
        if self.unit {
            return Interval::zero(prec);
        }
        let (l, lt) = self.logs(prec);
        let mut s = Interval::zero(prec);
        for (c, &e) in n.iter().enumerate() {
            if e != 0 {
                s = &s + &(&l[c] * &Interval::from_int(e, prec));
            }
        }
        &s / &lt
    }

    /// `u = log_tau t` (`u = t` in the unit regime).
    pub fn u_of_t(&self, t: &Interval, prec: u32) -> Interval {
        if self.unit {
            return t.clone();
        }
        let (_, lt) = self.logs(prec);
        &t.ln() / &lt
    }
}

#[derive(Clone, Debug)]
pub struct ExpLogTerm<C> {
    pub exponent: Vec<i64>,
    /// Coefficients of `f(u)`, lowest degree first.
    pub f: Vec<C>,
}

#[derive(Clone, Debug)]
pub struct ExpLogPoly<C> {
    pub basis: Arc<ExpBasis>,
    pub terms: Vec<ExpLogTerm<C>>,
}

/// `t*` and the matching `u* = log_tau t*` beyond which signs are stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(with = "crate::ser::rational")]
    pub u: Rational,
    #[serde(with = "crate::ser::rational")]
    pub t: Rational,
}

impl Threshold {
    pub fn trivial() -> Threshold {
        Threshold { u: Rational::zero(), t: Rational::one() }
    }

    pub fn max(self, o: Threshold) -> Threshold {
        if o.u > self.u {
            Threshold { u: o.u, t: if o.t > self.t { o.t } else { self.t } }
        } else {
            let t = if o.t > self.t { o.t.clone() } else { self.t.clone() };
            Threshold { u: self.u, t }
        }
    }
}

fn poly_add<C: Coefficient>(a: &[C], b: &[C], ctx: &C::Ctx) -> Vec<C> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x.add(y, ctx),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            _ => unreachable!(),
        })
        .collect()
}

fn poly_mul<C: Coefficient>(a: &[C], b: &[C], ctx: &C::Ctx) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C::null(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y, ctx), ctx);
        }
    }
    out
}

fn trim_poly<C: Coefficient>(mut f: Vec<C>, ctx: &C::Ctx) -> Vec<C> {
    while f.last().map_or(false, |c| c.vanishes(ctx)) {
        f.pop();
    }
    f
}

impl<C: Coefficient> ExpLogPoly<C> {
    pub fn zero(basis: Arc<ExpBasis>) -> Self {
        ExpLogPoly { basis, terms: Vec::new() }
    }

    pub fn constant(basis: Arc<ExpBasis>, c: C) -> Self {
        let dim = basis.dim();
        ExpLogPoly { basis, terms: vec![ExpLogTerm { exponent: vec![0; dim], f: vec![c] }] }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn merged(basis: Arc<ExpBasis>, map: BTreeMap<Vec<i64>, Vec<C>>) -> Self {
        ExpLogPoly { basis, terms: map.into_iter().map(|(exponent, f)| ExpLogTerm { exponent, f }).collect() }
    }

    pub fn add(&self, o: &Self, ctx: &C::Ctx) -> Self {
        let mut map: BTreeMap<Vec<i64>, Vec<C>> = BTreeMap::new();
        for t in self.terms.iter().chain(&o.terms) {
            let e = map.entry(t.exponent.clone()).or_default();
            *e = poly_add(e, &t.f, ctx);
        }
        Self::merged(self.basis.clone(), map)
    }

    pub fn mul(&self, o: &Self, ctx: &C::Ctx) -> Self {
        let mut map: BTreeMap<Vec<i64>, Vec<C>> = BTreeMap::new();
        for a in &self.terms {
            for b in &o.terms {
                let e: Vec<i64> = a.exponent.iter().zip(&b.exponent).map(|(x, y)| x + y).collect();
                let f = poly_mul(&a.f, &b.f, ctx);
                let slot = map.entry(e).or_default();
                *slot = poly_add(slot, &f, ctx);
            }
        }
        Self::merged(self.basis.clone(), map)
    }

    pub fn scale(&self, c: &C, ctx: &C::Ctx) -> Self {
        ExpLogPoly {
            basis: self.basis.clone(),
            terms: self.terms.iter().map(|t| ExpLogTerm { exponent: t.exponent.clone(), f: t.f.iter().map(|x| x.mul(c, ctx)).collect() }).collect(),
        }
    }

    /// Merge exactly equal exponents, drop zero parts, sort descending.
    pub fn normalize(&self, ctx: &C::Ctx) -> Self {
        let mut terms: Vec<ExpLogTerm<C>> = self
            .terms
            .iter()
            .map(|t| ExpLogTerm { exponent: t.exponent.clone(), f: trim_poly(t.f.clone(), ctx) })
            .filter(|t| !t.f.is_empty())
            .collect();
        let basis = self.basis.clone();
        terms.sort_by(|a, b| basis.compare(&b.exponent, &a.exponent));
        let mut out: Vec<ExpLogTerm<C>> = Vec::new();
        for t in terms {
            if let Some(last) = out.last_mut() {
                if basis.compare(&last.exponent, &t.exponent) == Ordering::Equal {
                    // Keep the lexicographically smaller representative.
                    if t.exponent < last.exponent {
                        last.exponent = t.exponent.clone();
                    }
                    last.f = poly_add(&last.f, &t.f, ctx);
                    continue;
                }
            }
            out.push(t);
        }
        let terms = out
            .into_iter()
            .map(|t| ExpLogTerm { exponent: t.exponent, f: trim_poly(t.f, ctx) })
            .filter(|t| !t.f.is_empty())
            .collect();
        ExpLogPoly { basis, terms }
    }

    /// Sign for all large `t`; `None` when a coefficient sign is undetermined.
    pub fn eventual_sign(&self, ctx: &C::Ctx) -> Option<Sign> {
        match self.terms.first() {
            None => Some(Sign::Zero),
            Some(t) => t.f.last().unwrap().sign(ctx),
        }
    }

    /// Enclosure of the value at `t`.
    pub fn eval(&self, t: &Interval, ctx: &C::Ctx, prec: u32) -> Interval {
        let u = self.basis.u_of_t(t, prec);
        self.eval_u(&u, ctx, prec)
    }

    pub fn eval_u(&self, u: &Interval, ctx: &C::Ctx, prec: u32) -> Interval {
        let (l, _) = self.basis.logs(prec);
        let mut acc = Interval::zero(prec);
        for term in &self.terms {
            let scale = if self.basis.unit {
                Interval::one(prec)
            } else {
                let mut s = Interval::zero(prec);
                for (c, &e) in term.exponent.iter().enumerate() {
                    if e != 0 {
                        s = &s + &(&l[c] * &Interval::from_int(e, prec));
                    }
                }
                (&s * u).exp()
            };
            let f = term.f.iter().rev().fold(Interval::zero(prec), |a, c| &(&a * u) + &c.enclosure(ctx, prec));
            acc = &acc + &(&scale * &f);
        }
        acc
    }

    /// Certified `t*` with: for `t >= t*` the leading term dominates the rest
    /// in absolute value and its polynomial has constant sign.
    pub fn dominance_threshold(&self, ctx: &C::Ctx) -> Option<Threshold> {
        let prec = 128;
        let Some(lead) = self.terms.first() else { return Some(Threshold::trivial()) };
        let d0 = lead.f.len() - 1;
        let a = lead.f[d0].enclosure(ctx, prec);
        let a_lo = a.mig();
        if a_lo.is_zero() {
            return None;
        }
        let a_lo = Interval::point(a_lo, prec);
        let mags: Vec<Interval> = lead.f[..d0].iter().map(|c| Interval::point(c.enclosure(ctx, prec).mag(), prec)).collect();
        // Roots of f0 are below 1 + max |c_m| / |a|.
        let mut u0 = Interval::zero(prec);
        if d0 > 0 {
            let mx = mags.iter().fold(Interval::zero(prec), |m, c| m.max_i(c));
            u0 = &Interval::one(prec) + &(&mx / &a_lo);
        }
        if self.terms.len() > 1 {
            let s: Interval = mags.iter().fold(Interval::zero(prec), |acc, c| &acc + c);
            let u1 = &(&s / &a_lo).mul_pow2(1);
            u0 = u0.max_i(u1);
            // Bounds |f_j(u)| <= S_j u^D_j need u >= 1 once some degree is positive.
            if self.terms.iter().any(|t| t.f.len() > 1) {
                u0 = u0.max_i(&Interval::one(prec));
            }
        }
        let mut u = Dyadic::ceil_int(&u0.hi);
        let (_, ln_tau) = self.basis.logs(prec);
        if self.terms.len() > 1 {
            if self.basis.unit {
                // All exponents agree after normalization in the unit regime.
                return None;
            }
            // Gaps g_j > 0, refined until certified positive.
            let mut rest = Vec::new();
            for t in &self.terms[1..] {
                let diff: Vec<i64> = lead.exponent.iter().zip(&t.exponent).map(|(x, y)| x - y).collect();
                let mut p = prec;
                let g = loop {
                    let g = self.basis.exponent_value(&diff, p);
                    if g.is_positive() {
                        break g.lo.clone();
                    }
                    p *= 2;
                    if p > 1 << 16 {
                        return None;
                    }
                };
                let s = t.f.iter().fold(Interval::zero(prec), |acc, c| &acc + &Interval::point(c.enclosure(ctx, prec).mag(), prec));
                let dj = t.f.len() as i64 - 1;
                // Decreasing for u >= (dj - d0)^+ / (g ln tau).
                if dj > d0 as i64 {
                    let m = &Interval::from_int(dj - d0 as i64, prec) / &(&Interval::point(g.clone(), prec) * &ln_tau);
                    let mc = Dyadic::ceil_int(&m.hi);
                    if mc > u {
                        u = mc;
                    }
                }
                rest.push((Interval::point(g, prec), s, dj - d0 as i64));
            }
            let half_a = a_lo.mul_pow2(-1);
            let mut tries = 0;
            loop {
                let uu = Interval::from_rational(&Rational::from_integer(u.clone()), prec);
                let mut sum = Interval::zero(prec);
                for (g, s, de) in &rest {
                    let pw = if *de >= 0 { uu.powi(*de as u32) } else { uu.powi((-de) as u32).recip() };
                    let decay = (&-(&(g * &uu) * &ln_tau)).exp();
                    sum = &sum + &(&(s * &pw) * &decay);
                }
                if sum.hi < half_a.lo {
                    break;
                }
                u *= 2;
                if u.is_zero() {
                    u = BigInt::one();
                }
                tries += 1;
                if tries > 64 {
                    return None;
                }
            }
        }
        let u = Rational::from_integer(u);
        let t = if self.basis.unit {
            if u > Rational::one() {
                u.clone()
            } else {
                Rational::one()
            }
        } else {
            tau_power_upper(&self.basis.tau, &u)
        };
        Some(Threshold { u, t })
    }
}

/// A rational upper bound of `tau^u` (exact for rational `tau`), at least 1.
pub fn tau_power_upper(tau: &AlgebraicNumber, u: &Rational) -> Rational {
    if u.is_zero() {
        return Rational::one();
    }
    let n: u64 = u.to_integer().try_into().expect("threshold exponent");
    if let Some(q) = tau.as_rational() {
        let v = num_traits::pow(q.clone(), n as usize);
        return if v < Rational::one() { Rational::one() } else { v };
    }
    let e = tau.real_enclosure(64 + 8 * n as u32).powi(n as u32);
    let hi = e.hi.round(64, Round::Up).to_rational();
    if hi < Rational::one() {
        Rational::one()
    } else {
        hi
    }
}

/// Substitute the outputs of `cone` along the ray through `p` into `R`.
pub fn compose_atom<C: PhaseCoefficient>(r: &MPoly, cone: &TrajectoryCone, basis: &Arc<ExpBasis>, class: &[usize], p: &[C], ctx: &C::Ctx) -> ExpLogPoly<C> {
    let ys = cone_outputs(cone, basis, class, p, ctx);
    compose_with_outputs(r, &ys, basis, ctx)
}

/// Each output `y_r` as a sum over blocks of `t^(b_i) p_i G_ri(u)` (complex coefficients).
pub fn cone_outputs<C: PhaseCoefficient>(cone: &TrajectoryCone, basis: &Arc<ExpBasis>, class: &[usize], p: &[C], ctx: &C::Ctx) -> Vec<ExpLogPoly<C>> {
    let dim = basis.dim();
    (0..cone.out_dim())
        .map(|r| {
            let mut terms = Vec::new();
            for i in 0..cone.k() {
                let g = cone.g_gen(r, i);
                if g.is_empty() {
                    continue;
                }
                let mut e = vec![0; dim];
                if !basis.unit {
                    e[class[i]] = 1;
                }
                let f: Vec<C> = g.iter().map(|c| p[i].mul(&C::from_gen(c, ctx), ctx)).collect();
                terms.push(ExpLogTerm { exponent: e, f });
            }
            let mut map: BTreeMap<Vec<i64>, Vec<C>> = BTreeMap::new();
            for t in terms {
                let slot = map.entry(t.exponent).or_default();
                *slot = poly_add(slot, &t.f, ctx);
            }
            ExpLogPoly::merged(basis.clone(), map)
        })
        .collect()
}

pub fn compose_with_outputs<C: PhaseCoefficient>(r: &MPoly, ys: &[ExpLogPoly<C>], basis: &Arc<ExpBasis>, ctx: &C::Ctx) -> ExpLogPoly<C> {
    let mut powers: Vec<Vec<ExpLogPoly<C>>> = ys.iter().map(|y| vec![ExpLogPoly::constant(basis.clone(), C::from_rational(&Rational::one())), y.clone()]).collect();
    let mut acc = ExpLogPoly::zero(basis.clone());
    for (c, e) in &r.terms {
        let mut m = ExpLogPoly::constant(basis.clone(), C::from_rational(&Rational::from_integer(c.clone())));
        for (v, &k) in e.iter().enumerate() {
            if k == 0 {
                continue;
            }
            while powers[v].len() <= k as usize {
                let next = powers[v].last().unwrap().mul(&ys[v], ctx);
                powers[v].push(next);
            }
            m = m.mul(&powers[v][k as usize], ctx);
        }
        acc = acc.add(&m, ctx);
    }
    let real = ExpLogPoly {
        basis: basis.clone(),
        terms: acc.terms.into_iter().map(|t| ExpLogTerm { exponent: t.exponent, f: t.f.iter().map(|c| c.real_part(ctx)).collect() }).collect(),
    };
    real.normalize(ctx)
}

/// Per-atom outcome along one ray.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomTrace {
    pub poly: String,
    pub terms: usize,
    pub leading_exponent: Vec<i64>,
    pub sign: Option<Sign>,
    pub threshold: Option<Threshold>,
}

/// Eventual truth of `phi` and the threshold beyond which it is stable.
pub fn eventual_truth<C: Coefficient>(phi: &NormalFormula, atoms: &[ExpLogPoly<C>], ctx: &C::Ctx) -> (Option<bool>, Option<Threshold>, Vec<AtomTrace>) {
    let mut signs = Vec::with_capacity(atoms.len());
    let mut thr = Some(Threshold::trivial());
    let mut trace = Vec::new();
    for (poly, e) in phi.polys.iter().zip(atoms) {
        let s = e.eventual_sign(ctx);
        let t = if s.is_some() { e.dominance_threshold(ctx) } else { None };
        thr = match (thr, &t) {
            (Some(a), Some(b)) => Some(a.max(b.clone())),
            _ => None,
        };
        trace.push(AtomTrace {
            poly: poly.to_string(),
            terms: e.terms.len(),
            leading_exponent: e.terms.first().map(|t| t.exponent.clone()).unwrap_or_default(),
            sign: s,
            threshold: t,
        });
        signs.push(s);
    }
    (phi.eval(&signs), thr, trace)
}

/// Compose every polynomial of `phi` along the ray through `p`.
pub fn compose_formula<C: PhaseCoefficient>(phi: &NormalFormula, cone: &TrajectoryCone, basis: &Arc<ExpBasis>, class: &[usize], p: &[C], ctx: &C::Ctx) -> Vec<ExpLogPoly<C>> {
    let ys = cone_outputs(cone, basis, class, p, ctx);
    phi.polys.iter().map(|r| compose_with_outputs(r, &ys, basis, ctx)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrix::Matrix;
    use crate::spectral::jordan_decompose;
    use crate::RatMatrix;

    fn rat(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn m(rows: &[&[i64]]) -> RatMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().copied().map(rat).collect()).collect())
    }

    fn basis(rho: &[i64], tau: i64) -> Arc<ExpBasis> {
        ExpBasis::new(rho.iter().map(|&r| AlgebraicNumber::from_int(r)).collect(), AlgebraicNumber::from_int(tau), false)
    }

    fn term(e: &[i64], f: &[i64]) -> ExpLogTerm<Rational> {
        ExpLogTerm { exponent: e.to_vec(), f: f.iter().copied().map(rat).collect() }
    }

    #[test]
    fn normalize_examples() {
        let b = basis(&[2, 4], 4);
        let e = ExpLogPoly { basis: b.clone(), terms: vec![term(&[2, -1], &[1]), term(&[0, 0], &[-1])] };
        assert!(e.normalize(&()).is_empty());
        let b = basis(&[2, 3], 3);
        let e = ExpLogPoly { basis: b, terms: vec![term(&[1, 0], &[1]), term(&[0, 1], &[-1])] };
        let n = e.normalize(&());
        assert_eq!(n.terms[0].exponent, vec![0, 1]);
        assert_eq!(n.eventual_sign(&()), Some(Sign::Negative));
        let again = n.normalize(&());
        assert_eq!(again.terms.len(), n.terms.len());
    }

    #[test]
    fn thresholds() {
        let b = basis(&[2], 2);
        let e = ExpLogPoly { basis: b.clone(), terms: vec![term(&[0], &[-3, 1])] };
        let t = e.dominance_threshold(&()).unwrap();
        assert_eq!(t.u, rat(4));
        assert_eq!(t.t, rat(16));
        let single = ExpLogPoly { basis: b, terms: vec![term(&[1], &[5])] };
        assert_eq!(single.dominance_threshold(&()).unwrap().t, rat(1));
        // t - t^(log_3 2) u
        let b = basis(&[3, 2], 3);
        let e = ExpLogPoly { basis: b, terms: vec![term(&[1, 0], &[1]), term(&[0, 1], &[0, -1])] }.normalize(&());
        let t = e.dominance_threshold(&()).unwrap();
        for k in 0..20 {
            let tt = Interval::from_rational(&(t.t.clone() * rat(1 + k * k)), 128);
            assert!(e.eval(&tt, &(), 128).is_positive());
        }
    }

    #[test]
    fn formula_normal_form() {
        let y1 = MPoly::from_i64(1, &[(1, &[1]), (-3, &[0])]);
        let f = Formula::Not(Box::new(Formula::atom(y1.clone(), Relation::Ge)));
        let nf = f.normalize();
        assert_eq!(nf.eval(&[Some(Sign::Negative)]), Some(true));
        assert_eq!(nf.eval(&[Some(Sign::Zero)]), Some(false));
        assert_eq!(nf.eval(&[None]), None);
        assert!(f.eval_rational(&[rat(2)]));
        assert!(!f.eval_rational(&[rat(3)]));
    }

    #[test]
    fn compose_examples() {
        // Shear, x = (0, 1): y1 = u.
        let a = m(&[&[1, 1], &[0, 1]]);
        let cone = TrajectoryCone::new(jordan_decompose(&a).unwrap(), &[rat(0), rat(1)], None);
        let (b, class) = ExpBasis::from_cone(&cone);
        let ctx = cone.ctx().clone();
        let p = vec![GenPoly::one(); cone.k()];
        let r = MPoly::from_i64(2, &[(1, &[1, 0]), (-3, &[0, 0])]);
        let e = compose_atom(&r, &cone, &b, &class, &p, &ctx);
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].f.len(), 2);
        assert!(e.terms[0].f[0].equals_rational(&rat(-3), &ctx));
        assert_eq!(e.eventual_sign(&ctx), Some(Sign::Positive));

        // Rotation-scaling: norm^2 = t^2.
        let a = m(&[&[0, -2], &[2, 0]]);
        let cone = TrajectoryCone::new(jordan_decompose(&a).unwrap(), &[rat(1), rat(0)], None);
        let (b, class) = ExpBasis::from_cone(&cone);
        let mut ctx = cone.ctx().clone();
        let p = cone.torus_points().unwrap()[1].coords_gen(&mut ctx);
        let r = MPoly::from_i64(2, &[(1, &[2, 0]), (1, &[0, 2])]);
        let e = compose_atom(&r, &cone, &b, &class, &p, &ctx);
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].exponent, vec![2]);
        assert!(e.terms[0].f[0].equals_rational(&rat(1), &ctx));
        let phi = Formula::atom(MPoly::from_i64(2, &[(1, &[2, 0]), (1, &[0, 2]), (-1, &[0, 0])]), Relation::Gt).normalize();
        let atoms = compose_formula(&phi, &cone, &b, &class, &p, &ctx);
        let (truth, thr, _) = eventual_truth(&phi, &atoms, &ctx);
        assert_eq!(truth, Some(true));
        assert!(thr.unwrap().t >= rat(1));

        // Empty polynomial.
        let z = compose_atom(&MPoly::new(2, vec![]), &cone, &b, &class, &p, &ctx);
        assert!(z.is_empty());
    }
}
