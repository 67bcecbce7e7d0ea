//! Decision loop, cone avoidance, certificates and their checker.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::algebraic::AlgebraicRecord;
use crate::algebra::interval::Interval;
use crate::algebra::Sign;
use crate::cone::{Membership, Realness, TrajectoryCone};
use crate::ser::{fmt_rational, rational, rational_mat, rational_vec};
use crate::signdec::{
    compose_formula, eventual_truth, tau_power_upper, AtomTrace, ExpBasis, Formula, NormalFormula, Threshold, TrigCtx, TrigPoly,
};
use crate::spectral::{jordan_decompose, strip_nilpotent, IntOrbit, Regime, Stripped};
use crate::torus::{Completeness, TorusKind, TorusPoint};
use crate::{RatMatrix, Rational};

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("initial vector has length {0}, expected {1}")]
    VectorLength(usize, usize),
    #[error("halting formula uses {0} variables, expected {1}")]
    FormulaArity(usize, usize),
    #[error("certificate belongs to a different problem")]
    FingerprintMismatch,
    #[error("internal error: {0}")]
    Internal(String),
}

/// `while x not in F: x <- A x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub a: RatMatrix,
    pub x: Vec<Rational>,
    pub f: Formula,
}

#[derive(Serialize)]
struct CanonicalProblem<'a> {
    #[serde(with = "rational_mat")]
    matrix: Vec<Vec<Rational>>,
    #[serde(with = "rational_vec")]
    initial: Vec<Rational>,
    halting: &'a Formula,
}

impl Problem {
    pub fn new(a: RatMatrix, x: Vec<Rational>, f: Formula) -> Result<Problem, SynthesisError> {
        if !a.is_square() {
            return Err(SynthesisError::NotSquare(a.rows(), a.cols()));
        }
        if x.len() != a.rows() {
            return Err(SynthesisError::VectorLength(x.len(), a.rows()));
        }
        for atom in f.atoms() {
            if atom.poly.nvars != a.rows() {
                return Err(SynthesisError::FormulaArity(atom.poly.nvars, a.rows()));
            }
        }
        Ok(Problem { a, x, f })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// SHA-256 of a canonical JSON rendering.
    pub fn fingerprint(&self) -> String {
        let c = CanonicalProblem { matrix: self.a.to_rows(), initial: self.x.clone(), halting: &self.f };
        let s = serde_json::to_string(&c).expect("canonical problem");
        let h = Sha256::digest(s.as_bytes());
        h.iter().map(|b| format!("{:02x}", b)).collect()
    }

    pub fn in_f(&self, y: &[Rational]) -> bool {
        self.f.eval_rational(y)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Budget {
    pub max_prefix: u64,
    pub torus_order_bound: u64,
    pub subdivision_depth: u32,
    pub precision: u32,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { max_prefix: 10_000, torus_order_bound: 12, subdivision_depth: 10, precision: 128 }
    }
}

// ---------------------------------------------------------------------------
// Verdicts.

/// Enough of the cone to identify it when re-deriving from the problem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeRecord {
    pub regime: Regime,
    pub tau: AlgebraicRecord,
    pub blocks: Vec<(AlgebraicRecord, usize)>,
    pub relations: Vec<Vec<i64>>,
    pub torus: String,
    #[serde(with = "rational_mat")]
    pub embedding: Vec<Vec<Rational>>,
    pub offset: usize,
    #[serde(with = "rational_vec")]
    pub x_reduced: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub fingerprint: String,
    #[serde(with = "rational")]
    pub t0: Rational,
    #[serde(with = "rational_mat")]
    pub prefix: Vec<Vec<Rational>>,
    pub cone: Option<ConeRecord>,
    pub realness: Option<Realness>,
    pub formula_text: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RayEvidence {
    pub point: TorusPoint,
    pub trace: Vec<AtomTrace>,
    pub threshold: Threshold,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum NoReason {
    OrbitHitsF {
        n: u64,
        #[serde(with = "rational_vec")]
        point: Vec<Rational>,
    },
    RayPersistsInF(RayEvidence),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct UnknownReport {
    pub reason: String,
    pub simulated_steps: u64,
    pub rays_checked: usize,
    pub cells_unresolved: usize,
    pub torus: String,
    pub lattice_proven: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Verdict {
    InvariantFound(Certificate),
    NoInvariant(NoReason),
    Unknown(UnknownReport),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::InvariantFound(_) => 0,
            Verdict::NoInvariant(_) => 1,
            Verdict::Unknown(_) => 2,
        }
    }
}

// ---------------------------------------------------------------------------
// Shared analysis state.

/// Nilpotent stripping plus the cone of the invertible part (if nontrivial).
pub struct Analysis {
    pub stripped: Stripped,
    pub cone: Option<TrajectoryCone>,
    pub basis: Option<Arc<ExpBasis>>,
    pub class: Vec<usize>,
    pub formula: NormalFormula,
}

impl Analysis {
    pub fn new(prob: &Problem) -> Result<Analysis, SynthesisError> {
        let stripped = strip_nilpotent(&prob.a, &prob.x);
        let formula = prob.f.normalize();
        let mut cone = None;
        if stripped.a.rows() > 0 && stripped.x.iter().any(|v| !v.is_zero()) {
            let dec = jordan_decompose(&stripped.a).map_err(|e| SynthesisError::Internal(e.to_string()))?;
            let c = TrajectoryCone::new(dec, &stripped.x, Some(&stripped.embedding));
            if !c.is_trivial() {
                cone = Some(c);
            }
        }
        let (basis, class) = match &cone {
            Some(c) => {
                let (b, cl) = ExpBasis::from_cone(c);
                (Some(b), cl)
            }
            None => (None, Vec::new()),
        };
        Ok(Analysis { stripped, cone, basis, class, formula })
    }

    pub fn offset(&self) -> u64 {
        self.stripped.offset as u64
    }

    pub fn record(&self) -> Option<ConeRecord> {
        let c = self.cone.as_ref()?;
        Some(ConeRecord {
            regime: c.regime,
            tau: c.tau.to_record(),
            blocks: c.dec.blocks.iter().map(|b| (b.eigenvalue.to_record(), b.size)).collect(),
            relations: c.torus.lattice.basis.clone(),
            torus: torus_label(c),
            embedding: c.embedding.to_rows(),
            offset: self.stripped.offset,
            x_reduced: self.stripped.x.clone(),
        })
    }
}

fn torus_label(c: &TrajectoryCone) -> String {
    match &c.torus.kind {
        TorusKind::Finite { points } => format!("finite({} points)", points.len()),
        TorusKind::Dense { rank, .. } => format!("dense(rank {})", rank),
    }
}

/// First `n <= max` with `A^n x in F`, by exact integer simulation.
pub fn first_hit(prob: &Problem, max: u64) -> Option<(u64, Vec<Rational>)> {
    let mut orbit = IntOrbit::new(&prob.a, &prob.x);
    for n in 0..=max {
        if prob.f.eval_scaled(&orbit.v, &orbit.den) {
            return Some((n, orbit.point()));
        }
        if n < max {
            orbit.step();
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Cone avoidance.

#[derive(Clone, Debug)]
pub enum ConeOutcome {
    /// `P C_t0 ∩ F = ∅`; `steps` orbit points of the reduced system precede `t0`.
    Avoids { t0: Rational, steps: u64 },
    Meets(RayEvidence),
    Unknown(UnknownReport),
}

fn interval_truth(nf: &NormalFormula, ys: &[Interval], prec: u32) -> Option<bool> {
    let signs: Vec<Option<Sign>> = nf.polys.iter().map(|p| p.eval_interval(ys, prec).sign().map(Sign::from_i32)).collect();
    nf.eval(&signs)
}

/// `not F` holds on the ray through `p` for every `u` in `[lo, hi]`.
fn segment_avoids(cone: &TrajectoryCone, nf_not: &NormalFormula, p: &[crate::algebra::complex::ComplexInterval], lo: &Rational, hi: &Rational, depth: u32, prec: u32) -> bool {
    let u = Interval::from_rational(lo, prec).hull(&Interval::from_rational(hi, prec));
    let ys: Vec<Interval> = cone.output_interval(p, &u, prec).into_iter().map(|z| z.re).collect();
    if interval_truth(nf_not, &ys, prec) == Some(true) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let mid = (lo + hi) / Rational::from_integer(2.into());
    segment_avoids(cone, nf_not, p, lo, &mid, depth - 1, prec) && segment_avoids(cone, nf_not, p, &mid, hi, depth - 1, prec)
}

/// Largest `u` in `0..=u_max` such that every ray avoids `F` from `u` on,
/// given that `u_max` is a dominance threshold.
fn lower_start(cone: &TrajectoryCone, nf_not: &NormalFormula, phases: &[Vec<crate::algebra::complex::ComplexInterval>], u_max: u64, prec: u32) -> u64 {
    let min_u = if cone.regime == Regime::UnitModulus { 1 } else { 0 };
    let mut u = u_max;
    while u > min_u {
        let lo = Rational::from_integer((u - 1).into());
        let hi = Rational::from_integer(u.into());
        if !phases.iter().all(|p| segment_avoids(cone, nf_not, p, &lo, &hi, 8, prec)) {
            break;
        }
        u -= 1;
    }
    u
}

fn threshold_u(t: &Threshold) -> u64 {
    t.u.ceil().to_integer().try_into().unwrap_or(u64::MAX)
}

/// `t0` for an integer `u` start.
fn start_t0(cone: &TrajectoryCone, u: u64) -> Rational {
    match cone.regime {
        Regime::UnitModulus => Rational::from_integer(u.max(1).into()),
        _ => tau_power_upper(&cone.tau, &Rational::from_integer(u.into())),
    }
}

/// Eventual behaviour of the ray through an exact torus point.
pub fn ray_persists_in_f(an: &Analysis, p: &TorusPoint) -> Result<Option<RayEvidence>, SynthesisError> {
    let cone = an.cone.as_ref().ok_or_else(|| SynthesisError::Internal("no cone".into()))?;
    if p.a.len() != cone.k() || !p.satisfies(&cone.torus.lattice) {
        return Err(SynthesisError::Internal("point is not on the torus".into()));
    }
    let mut ctx = cone.ctx().clone();
    let pg = p.coords_gen(&mut ctx);
    if !cone.phase_in_torus(&ctx, &pg) {
        return Err(SynthesisError::Internal("point fails a torus relation".into()));
    }
    let basis = an.basis.as_ref().unwrap();
    let atoms = compose_formula(&an.formula, cone, basis, &an.class, &pg, &ctx);
    let (truth, thr, trace) = eventual_truth(&an.formula, &atoms, &ctx);
    Ok(match (truth, thr) {
        (Some(true), Some(threshold)) => Some(RayEvidence { point: p.clone(), trace, threshold }),
        _ => None,
    })
}

/// Whether some `t0' >= 1` has `P C_t0' ∩ F = ∅`.
pub fn cone_avoids_from(an: &Analysis, budget: &Budget) -> ConeOutcome {
    let Some(cone) = an.cone.as_ref() else {
        return ConeOutcome::Avoids { t0: Rational::one(), steps: 0 };
    };
    let nf_not = an.formula.negate();
    let basis = an.basis.as_ref().unwrap();
    let proven = cone.torus.lattice.completeness == Completeness::Proven;
    let prec = budget.precision.max(64);
    let mut report = UnknownReport { torus: torus_label(cone), lattice_proven: proven, ..Default::default() };
    match &cone.torus.kind {
        TorusKind::Finite { points } => {
            let mut u_max = 0u64;
            let mut phases = Vec::new();
            for p in points {
                let mut ctx = cone.ctx().clone();
                let pg = p.coords_gen(&mut ctx);
                let atoms = compose_formula(&an.formula, cone, basis, &an.class, &pg, &ctx);
                let (truth, thr, trace) = eventual_truth(&nf_not, &atoms, &ctx);
                report.rays_checked += 1;
                match (truth, thr) {
                    (Some(true), Some(t)) => u_max = u_max.max(threshold_u(&t)),
                    (Some(false), Some(threshold)) if proven => {
                        return ConeOutcome::Meets(RayEvidence { point: p.clone(), trace, threshold });
                    }
                    _ => {
                        report.reason = format!("ray {:?} undecided", p.a);
                        return ConeOutcome::Unknown(report);
                    }
                }
                phases.push(p.enclosure(prec));
            }
            let u = lower_start(cone, &nf_not, &phases, u_max, prec);
            let t0 = start_t0(cone, u);
            ConeOutcome::Avoids { steps: cone.steps_to_reach(&t0), t0 }
        }
        TorusKind::Dense { rank, character, divisors } => dense_analysis(an, cone, basis, &nf_not, *rank, character, divisors, budget, report),
    }
}

fn lcm_all(xs: impl IntoIterator<Item = i64>) -> i64 {
    xs.into_iter().fold(1i64, |a, b| a.lcm(&b.max(1)))
}

/// Torus point `exp(2 pi i V phi)` for `phi = (c_j / d_j, m / n)`.
fn param_torus_point(character: &[Vec<i64>], divisors: &[i64], finite: &[i64], free: &[i64], n: i64) -> TorusPoint {
    let k = character.len();
    let g = divisors.len();
    let l = lcm_all(divisors.iter().copied().chain([n]));
    let a: Vec<i64> = (0..k)
        .map(|i| {
            let mut s: i128 = 0;
            for j in 0..k {
                let num = if j < g { finite[j] as i128 * (l / divisors[j].max(1)) as i128 } else { free[j - g] as i128 * (l / n) as i128 };
                s += character[i][j] as i128 * num;
            }
            s.rem_euclid(l as i128) as i64
        })
        .collect();
    let gcd = a.iter().fold(l, |acc, &x| acc.gcd(&x));
    TorusPoint { n: (l / gcd) as u64, a: a.iter().map(|x| x / gcd).collect() }
}

#[allow(clippy::too_many_arguments)]
fn dense_analysis(
    an: &Analysis,
    cone: &TrajectoryCone,
    basis: &Arc<ExpBasis>,
    nf_not: &NormalFormula,
    rank: usize,
    character: &[Vec<i64>],
    divisors: &[i64],
    budget: &Budget,
    mut report: UnknownReport,
) -> ConeOutcome {
    let prec = budget.precision.max(64);
    let k = cone.k();
    let g = divisors.len();
    let finite_parts = cone.torus.finite_parts();
    let full_cell = vec![Interval::new(crate::algebra::dyadic::Dyadic::zero(), crate::algebra::dyadic::Dyadic::one(), prec); rank];
    let mut composed = Vec::new();
    let mut u_max = 0u64;
    let mut all_resolved = true;
    for fp in &finite_parts {
        let mut gen = cone.ctx().clone();
        let zeta = param_torus_point(character, divisors, fp, &vec![0; rank], 1).coords_gen(&mut gen);
        let phases: Vec<TrigPoly> = (0..k).map(|i| TrigPoly::monomial(character[i][g..].to_vec(), zeta[i].clone())).collect();
        let phases: Vec<TrigPoly> = phases.into_iter().map(|p| TrigPoly { terms: p.terms.into_iter().map(|(e, c)| (trim(e), c)).collect() }).collect();
        let mut ctx = TrigCtx { gen, cell: full_cell.clone(), prec };
        let atoms = compose_formula(&an.formula, cone, basis, &an.class, &phases, &ctx);
        // Bisect the free angles until `not F` is eventually true on every cell.
        let mut work = vec![(full_cell.clone(), 0u32)];
        while let Some((cell, depth)) = work.pop() {
            ctx.cell = cell.clone();
            let (truth, thr, _) = eventual_truth(nf_not, &atoms, &ctx);
            if let (Some(true), Some(t)) = (truth, thr) {
                u_max = u_max.max(threshold_u(&t));
                continue;
            }
            if depth >= budget.subdivision_depth {
                report.cells_unresolved += 1;
                all_resolved = false;
                continue;
            }
            let (w, _) = cell.iter().enumerate().map(|(j, c)| (j, c.width())).max_by(|a, b| a.1.cmp(&b.1)).unwrap();
            let mid = cell[w].mid();
            let mut left = cell.clone();
            let mut right = cell;
            left[w] = Interval::new(left[w].lo.clone(), mid.clone(), prec);
            right[w] = Interval::new(mid, right[w].hi.clone(), prec);
            work.push((right, depth + 1));
            work.push((left, depth + 1));
        }
        composed.push((fp.clone(), atoms, ctx));
    }
    if all_resolved {
        let t0 = start_t0(cone, u_max);
        return ConeOutcome::Avoids { steps: cone.steps_to_reach(&t0), t0 };
    }
    // Search rays through points of finite order.
    let proven = report.lattice_proven;
    let mut seen = std::collections::HashSet::new();
    for n in 1..=budget.torus_order_bound.max(1) as i64 {
        for (fp, atoms, ctx) in composed.iter_mut() {
            let mut m = vec![0i64; rank];
            loop {
                let p = param_torus_point(character, divisors, fp, &m, n);
                if seen.insert(p.clone()) {
                    report.rays_checked += 1;
                    ctx.cell = m.iter().map(|&mi| Interval::from_rational(&Rational::new(mi.into(), n.into()), prec)).collect();
                    let (quick, _, _) = eventual_truth(&an.formula, atoms, ctx);
                    if quick != Some(false) && proven {
                        if let Ok(Some(ev)) = ray_persists_in_f(an, &p) {
                            return ConeOutcome::Meets(ev);
                        }
                    }
                }
                let mut j = 0;
                loop {
                    if j == rank {
                        break;
                    }
                    m[j] += 1;
                    if m[j] < n {
                        break;
                    }
                    m[j] = 0;
                    j += 1;
                }
                if j == rank {
                    break;
                }
            }
        }
    }
    report.reason = format!(
        "dense torus: {} angle cells unresolved at depth {} and no ray of order <= {} persists in F{}; \
         sets met by a measure-zero family of rays are outside both tiers",
        report.cells_unresolved,
        budget.subdivision_depth,
        budget.torus_order_bound,
        if proven { "" } else { " (relation lattice not proven complete)" }
    );
    ConeOutcome::Unknown(report)
}

fn trim(mut e: Vec<i64>) -> Vec<i64> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

// ---------------------------------------------------------------------------
// The decision loop.

pub fn decide(prob: &Problem, budget: &Budget) -> Result<Verdict, SynthesisError> {
    Problem::new(prob.a.clone(), prob.x.clone(), prob.f.clone())?;
    if let Some((n, point)) = first_hit(prob, budget.max_prefix) {
        return Ok(Verdict::NoInvariant(NoReason::OrbitHitsF { n, point }));
    }
    let an = Analysis::new(prob)?;
    match cone_avoids_from(&an, budget) {
        ConeOutcome::Avoids { t0, steps } => {
            let total = an.offset() + steps;
            if total > budget.max_prefix {
                if total > budget.max_prefix.saturating_mul(100).max(1_000_000) {
                    return Ok(Verdict::Unknown(UnknownReport {
                        reason: format!("certificate prefix of {} points exceeds the budget", total),
                        simulated_steps: budget.max_prefix,
                        ..Default::default()
                    }));
                }
                if let Some((n, point)) = first_hit(prob, total) {
                    return Ok(Verdict::NoInvariant(NoReason::OrbitHitsF { n, point }));
                }
            }
            Ok(Verdict::InvariantFound(emit_certificate(prob, &an, t0)?))
        }
        ConeOutcome::Meets(ev) => Ok(Verdict::NoInvariant(NoReason::RayPersistsInF(ev))),
        ConeOutcome::Unknown(mut r) => {
            r.simulated_steps = budget.max_prefix;
            Ok(Verdict::Unknown(r))
        }
    }
}

pub fn emit_certificate(prob: &Problem, an: &Analysis, t0: Rational) -> Result<Certificate, SynthesisError> {
    let steps = match &an.cone {
        Some(c) => c.steps_to_reach(&t0),
        None => 1,
    };
    let total = an.offset() + steps;
    let mut prefix = Vec::with_capacity(total as usize);
    let mut orbit = IntOrbit::new(&prob.a, &prob.x);
    for n in 0..total {
        if n > 0 {
            orbit.step();
        }
        if prob.f.eval_scaled(&orbit.v, &orbit.den) {
            return Err(SynthesisError::Internal(format!("prefix point {} lies in F", n)));
        }
        prefix.push(orbit.point());
    }
    let realness = an.cone.as_ref().map(|c| c.realness_certificate());
    let formula_text = formula_text(prob, an, &t0, prefix.len());
    Ok(Certificate { fingerprint: prob.fingerprint(), t0, prefix, cone: an.record(), realness, formula_text })
}

fn approx(c: &crate::algebra::genpoly::GenPoly, ctx: &crate::algebra::genpoly::GenContext) -> String {
    let z = c.eval(ctx, 64);
    let (re, im) = (z.re.to_f64(), z.im.to_f64());
    if im.abs() < 1e-15 {
        format!("{:.12e}", re)
    } else {
        format!("({:.12e}{:+.12e}i)", re, im)
    }
}

/// Parametric description of `P C_t0 ∪ prefix`.
fn formula_text(prob: &Problem, an: &Analysis, t0: &Rational, prefix_len: usize) -> String {
    let d = prob.dim();
    let vars: Vec<String> = (1..=d).map(|i| format!("y{}", i)).collect();
    let mut out = String::new();
    out.push_str(&format!("I = C ∪ {{A^n x : 0 <= n < {}}}\n", prefix_len));
    let Some(cone) = &an.cone else {
        out.push_str("C = {} (the orbit reaches 0 and stays there)\n");
        return out;
    };
    let ctx = cone.ctx();
    let (lhs, u_def) = match cone.regime {
        Regime::UnitModulus => ("t", "u = t".to_string()),
        _ => ("t", format!("u = log(t) / log(tau), tau = {}", cone.tau)),
    };
    out.push_str(&format!(
        "C = {{ ({}) : exists p in T, {} >= {}, {} }}\n",
        vars.join(", "),
        lhs,
        fmt_rational(t0),
        u_def
    ));
    for (i, b) in cone.dec.blocks.iter().enumerate() {
        let bi = match cone.regime {
            Regime::UnitModulus => "0".to_string(),
            _ => format!("log({}) / log(tau)", b.modulus),
        };
        out.push_str(&format!("  block {}: eigenvalue {}, size {}, b{} = {}\n", i + 1, b.eigenvalue, b.size, i + 1, bi));
    }
    let rels: Vec<String> = cone.torus.lattice.basis.iter().map(|v| format!("{:?}", v)).collect();
    out.push_str(&format!("  T = {{ |p_i| = 1, prod p_i^v_i = 1 for v in [{}] }}\n", rels.join(", ")));
    for r in 0..cone.out_dim() {
        let mut parts = Vec::new();
        for i in 0..cone.k() {
            let g = cone.g_gen(r, i);
            if g.is_empty() {
                continue;
            }
            let poly: Vec<String> = g.iter().enumerate().map(|(c, x)| if c == 0 { approx(x, ctx) } else { format!("{}*u^{}", approx(x, ctx), c) }).collect();
            parts.push(format!("exp(b{} log t) p{} ({})", i + 1, i + 1, poly.join(" + ")));
        }
        out.push_str(&format!("  {} = Re[{}]\n", vars[r], if parts.is_empty() { "0".to_string() } else { parts.join(" + ") }));
    }
    out
}

// ---------------------------------------------------------------------------
// Checking.

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CheckReport {
    pub contains_x: bool,
    pub prefix_consistent: bool,
    pub stable: bool,
    pub disjoint: bool,
    pub samples: usize,
    pub accepted: usize,
    pub undetermined: usize,
    pub rejected: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.contains_x && self.prefix_consistent && self.stable && self.disjoint
    }
}

fn interval_vec(v: &[Rational], prec: u32) -> Vec<Interval> {
    v.iter().map(|q| Interval::from_rational(q, prec)).collect()
}

fn mat_vec_interval(a: &RatMatrix, y: &[Interval], prec: u32) -> Vec<Interval> {
    (0..a.rows())
        .map(|r| {
            let mut acc = Interval::zero(prec);
            for (c, yc) in y.iter().enumerate() {
                if !a[(r, c)].is_zero() {
                    acc = &acc + &(&Interval::from_rational(&a[(r, c)], prec) * yc);
                }
            }
            acc
        })
        .collect()
}

/// Independent check of containment, stability and disjointness.
pub fn check_certificate(cert: &Certificate, prob: &Problem, samples: usize, seed: u64) -> Result<CheckReport, SynthesisError> {
    if cert.fingerprint != prob.fingerprint() {
        return Err(SynthesisError::FingerprintMismatch);
    }
    let prec = 192;
    let mut rep = CheckReport { samples, prefix_consistent: true, stable: true, disjoint: true, ..Default::default() };
    let an = Analysis::new(prob)?;
    if an.record() != cert.cone {
        rep.prefix_consistent = false;
        rep.failures.push("cone record differs from the problem's cone".into());
        return Ok(rep);
    }
    if cert.t0 < Rational::one() {
        rep.failures.push("t0 < 1".into());
        rep.stable = false;
        return Ok(rep);
    }
    // Prefix: exact orbit, outside F.
    for (n, y) in cert.prefix.iter().enumerate() {
        let expect = if n == 0 { prob.x.clone() } else { prob.a.mul_vec(&cert.prefix[n - 1]) };
        if *y != expect {
            rep.prefix_consistent = false;
            rep.failures.push(format!("prefix point {} is not A^{} x", n, n));
        }
        if prob.in_f(y) {
            rep.disjoint = false;
            rep.failures.push(format!("prefix point {} lies in F", n));
        }
    }
    let cone = an.cone.map(|c| c.with_t0(cert.t0.clone()));
    let n_prefix = cert.prefix.len() as u64;
    // (1) x in I.
    rep.contains_x = !cert.prefix.is_empty()
        || (an.stripped.offset == 0 && cone.as_ref().map_or(false, |c| c.aligned_member(0)));
    if !rep.contains_x {
        rep.failures.push("x is neither in the prefix nor aligned in the cone".into());
    }
    let next = if cert.prefix.is_empty() { prob.x.clone() } else { prob.a.mul_vec(cert.prefix.last().unwrap()) };
    match &cone {
        None => {
            // I is the finite orbit; it must be closed under A.
            if !cert.prefix.iter().any(|y| *y == next) {
                rep.stable = false;
                rep.failures.push("A maps the last orbit point outside the orbit prefix".into());
            }
        }
        Some(c) => {
            // A (last prefix point) is the orbit point n_prefix; it must be aligned in C.
            let offset = an.stripped.offset as u64;
            let aligned = !cert.prefix.is_empty() && n_prefix >= offset && c.aligned_member(n_prefix - offset);
            let aligned = aligned || cert.prefix.is_empty();
            if !aligned || c.member_test(&interval_vec(&next, prec), 64) == Membership::No {
                rep.stable = false;
                rep.failures.push(format!("A^{} x is not in the truncated cone", n_prefix));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u0 = c.u_of_t(&Interval::from_rational(&cert.t0, prec), prec);
            let u_lo = u0.hi.to_rational();
            let span = match c.regime {
                Regime::UnitModulus => Rational::from_integer(20.into()),
                _ => Rational::from_integer(8.into()),
            };
            for s in 0..samples {
                let frac = Rational::new(BigInt::from(rng.gen_range(0..1u64 << 32)), BigInt::from(1u64 << 32));
                let u = Interval::from_rational(&(&u_lo + &span * frac), prec);
                let p = c.sample_phase(&mut rng, prec);
                let ys: Vec<Interval> = c.output_interval(&p, &u, prec).into_iter().map(|z| z.re).collect();
                match interval_truth(&an.formula, &ys, prec) {
                    Some(false) => {}
                    Some(true) => {
                        if rep.disjoint {
                            rep.failures.push(format!("sample {} (u = {:.6}) lies in F", s, u.to_f64()));
                        }
                        rep.disjoint = false;
                    }
                    None => {
                        if rep.disjoint {
                            rep.failures.push(format!("sample {} (u = {:.6}) undetermined against F", s, u.to_f64()));
                        }
                        rep.disjoint = false;
                    }
                }
                let ay = mat_vec_interval(&prob.a, &ys, prec);
                match c.member_test(&ay, 64) {
                    Membership::Yes => rep.accepted += 1,
                    Membership::Unknown => rep.undetermined += 1,
                    Membership::No => {
                        rep.rejected += 1;
                        if rep.stable {
                            rep.failures.push(format!("A * sample {} rejected by the membership test", s));
                        }
                        rep.stable = false;
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrix::Matrix;
    use crate::signdec::{MPoly, Relation};

    fn rat(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn problem(rows: &[&[i64]], x: &[i64], f: Formula) -> Problem {
        let a = Matrix::from_rows(rows.iter().map(|r| r.iter().copied().map(rat).collect()).collect());
        Problem::new(a, x.iter().copied().map(rat).collect(), f).unwrap()
    }

    #[test]
    fn diag_examples() {
        let hits = problem(&[&[2, 0], &[0, 2]], &[1, 1], Formula::atom(MPoly::from_i64(2, &[(1, &[1, 0]), (-4, &[0, 0])]), Relation::Ge));
        match decide(&hits, &Budget::default()).unwrap() {
            Verdict::NoInvariant(NoReason::OrbitHitsF { n, point }) => {
                assert_eq!(n, 2);
                assert_eq!(point, vec![rat(4), rat(4)]);
            }
            v => panic!("{:?}", v),
        }
        let inv = problem(&[&[2, 0], &[0, 2]], &[1, 1], Formula::atom(MPoly::from_i64(2, &[(1, &[1, 0])]), Relation::Le));
        match decide(&inv, &Budget::default()).unwrap() {
            Verdict::InvariantFound(c) => {
                assert_eq!(c.t0, rat(1));
                assert!(c.prefix.is_empty());
                let r = check_certificate(&c, &inv, 200, 1).unwrap();
                assert!(r.passed(), "{:?}", r);
            }
            v => panic!("{:?}", v),
        }
    }

    #[test]
    fn rotation_invariant() {
        let f = Formula::atom(MPoly::from_i64(2, &[(4, &[2, 0]), (4, &[0, 2]), (-1, &[0, 0])]), Relation::Lt);
        let p = problem(&[&[0, -2], &[2, 0]], &[1, 0], f);
        match decide(&p, &Budget::default()).unwrap() {
            Verdict::InvariantFound(c) => {
                assert_eq!(c.t0, rat(1));
                assert!(c.prefix.is_empty());
                assert!(check_certificate(&c, &p, 200, 2).unwrap().passed());
            }
            v => panic!("{:?}", v),
        }
    }

    #[test]
    fn nilpotent_orbit() {
        let f = Formula::atom(MPoly::from_i64(2, &[(1, &[1, 0]), (-5, &[0, 0])]), Relation::Gt);
        let p = problem(&[&[0, 1], &[0, 0]], &[3, 1], f);
        match decide(&p, &Budget::default()).unwrap() {
            Verdict::InvariantFound(c) => {
                assert!(c.cone.is_none());
                assert!(check_certificate(&c, &p, 10, 3).unwrap().passed());
            }
            v => panic!("{:?}", v),
        }
    }
}
