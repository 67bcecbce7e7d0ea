use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use ominv::algebra::interval::Interval;
use ominv::cone::TrajectoryCone;
use ominv::ser::fmt_rational;
use ominv::spectral::{IntOrbit, Regime};
use ominv::synthesis::{check_certificate, decide, Analysis, Budget, Certificate, NoReason, SynthesisError, Verdict};
use ominv::torus::TorusKind;
use ominv::Rational;
use serde_json::{json, Value};

use crate::problem_file::{parse_problem, ParseError};

pub const EXIT_INPUT: i32 = 3;

/// Outcome of a command: exit code and the text for standard output.
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

fn input_error(msg: impl std::fmt::Display) -> Output {
    Output { code: EXIT_INPUT, stdout: serde_json::to_string_pretty(&json!({ "error": msg.to_string() })).unwrap() + "\n" }
}

/// Write via a temporary sibling and rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("out")));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn load_problem(path: &Path) -> Result<ominv::synthesis::Problem, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    parse_problem(&text).map_err(|e: ParseError| format!("{}: {}", path.display(), e))
}

#[derive(Clone, Debug)]
pub struct AnalyzeOpts {
    pub budget: Budget,
    pub cert: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

fn verdict_detail(v: &Verdict, cert_path: Option<&Path>) -> (String, Value) {
    match v {
        Verdict::InvariantFound(c) => (
            "invariant".into(),
            json!({
                "t0": fmt_rational(&c.t0),
                "prefix_length": c.prefix.len(),
                "torus": c.cone.as_ref().map(|r| r.torus.clone()),
                "realness": c.realness,
                "certificate": cert_path.map(|p| p.display().to_string()),
                "invariant": c.formula_text,
            }),
        ),
        Verdict::NoInvariant(NoReason::OrbitHitsF { n, point }) => (
            "no_invariant".into(),
            json!({ "reason": "orbit_hits_f", "n": n, "point": point.iter().map(fmt_rational).collect::<Vec<_>>() }),
        ),
        Verdict::NoInvariant(NoReason::RayPersistsInF(e)) => (
            "no_invariant".into(),
            json!({
                "reason": "ray_persists_in_f",
                "phase": { "order": e.point.n, "exponents": e.point.a },
                "threshold": e.threshold,
                "atoms": e.trace,
            }),
        ),
        Verdict::Unknown(r) => ("unknown".into(), serde_json::to_value(r).unwrap()),
    }
}

pub fn cmd_analyze(path: &Path, opts: &AnalyzeOpts) -> Output {
    let prob = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let start = Instant::now();
    let verdict = match decide(&prob, &opts.budget) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    let elapsed = start.elapsed();
    if let (Verdict::InvariantFound(c), Some(p)) = (&verdict, &opts.cert) {
        if let Err(e) = write_atomic(p, &(serde_json::to_string_pretty(c).unwrap() + "\n")) {
            return input_error(format!("{}: {}", p.display(), e));
        }
    }
    if let Some(p) = &opts.trace {
        if let Err(e) = write_atomic(p, &(serde_json::to_string_pretty(&verdict).unwrap() + "\n")) {
            return input_error(format!("{}: {}", p.display(), e));
        }
    }
    let cert_written = match &verdict {
        Verdict::InvariantFound(_) => opts.cert.as_deref(),
        _ => None,
    };
    let (kind, detail) = verdict_detail(&verdict, cert_written);
    let out = json!({
        "verdict": kind,
        "detail": detail,
        "timing_ms": elapsed.as_millis() as u64,
        "budget": opts.budget,
    });
    Output { code: verdict.exit_code(), stdout: serde_json::to_string_pretty(&out).unwrap() + "\n" }
}

pub fn cmd_check(cert_path: &Path, problem_path: &Path, samples: usize) -> Output {
    let prob = match load_problem(problem_path) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let cert: Certificate = match fs::read_to_string(cert_path).map_err(|e| e.to_string()).and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => return input_error(format!("{}: {}", cert_path.display(), e)),
    };
    match check_certificate(&cert, &prob, samples, 0x5eed) {
        Ok(rep) => {
            let code = if rep.passed() { 0 } else { 1 };
            let out = json!({ "passed": rep.passed(), "report": rep });
            Output { code, stdout: serde_json::to_string_pretty(&out).unwrap() + "\n" }
        }
        Err(SynthesisError::FingerprintMismatch) => input_error("certificate and problem do not match"),
        Err(e) => input_error(e),
    }
}

// ---------------------------------------------------------------------------
// Point clouds.

#[derive(Clone, Debug)]
pub struct PlotOpts {
    pub orbit: u64,
    pub rays: usize,
    pub t_samples: usize,
    /// Output coordinates to export (at most three); `None` takes the first three.
    pub coords: Option<Vec<usize>>,
}

impl Default for PlotOpts {
    fn default() -> PlotOpts {
        PlotOpts { orbit: 60, rays: 16, t_samples: 200, coords: None }
    }
}

pub const CSV_HEADER: &str = "kind,id,n_or_t,c1,c2,c3";

/// `q` in scientific notation with `sig` significant digits, rounded to nearest.
pub fn decimal(q: &Rational, sig: usize) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let neg = q.is_negative();
    let a = q.abs();
    let ten = BigInt::from(10);
    // e = floor(log10 a)
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::from(1), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a < pow(e) {
        e -= 1;
    }
    while a >= pow(e + 1) {
        e += 1;
    }
    let scaled = &a * pow(sig as i64 - 1 - e);
    let (qt, r) = scaled.numer().div_rem(scaled.denom());
    let mut m = qt;
    if r * BigInt::from(2) >= *scaled.denom() {
        m += 1;
    }
    let mut digits = m.to_string();
    if digits.len() > sig {
        digits.truncate(sig);
        e += 1;
    }
    let (head, tail) = digits.split_at(1);
    let tail = tail.trim_end_matches('0');
    format!("{}{}{}{}e{}", if neg { "-" } else { "" }, head, if tail.is_empty() { "" } else { "." }, tail, e)
}

fn row(kind: &str, id: usize, n_or_t: &str, c: &[String]) -> String {
    let mut cols = c.to_vec();
    cols.resize(3, String::new());
    format!("{},{},{},{},{},{}", kind, id, n_or_t, cols[0], cols[1], cols[2])
}

fn pick(v: &[String], coords: &[usize]) -> Vec<String> {
    coords.iter().filter_map(|&i| v.get(i).cloned()).collect()
}

fn ray_phases(cone: &TrajectoryCone, m: usize, prec: u32) -> Vec<Vec<ominv::algebra::complex::ComplexInterval>> {
    match &cone.torus.kind {
        TorusKind::Finite { points } => points.iter().take(m).map(|p| p.enclosure(prec)).collect(),
        TorusKind::Dense { rank, divisors, .. } => (0..m)
            .map(|j| {
                let free: Vec<Interval> = (0..*rank).map(|_| Interval::from_rational(&Rational::new(j.into(), m.into()), prec)).collect();
                cone.torus.param_point(&vec![0; divisors.len()], &free, prec)
            })
            .collect(),
    }
}

/// CSV rows: exact orbit, its normalization by the scale, and ray samples.
pub fn plot_rows(prob: &ominv::synthesis::Problem, opts: &PlotOpts) -> Result<Vec<String>, SynthesisError> {
    let prec = 128;
    let coords: Vec<usize> = opts.coords.clone().unwrap_or_else(|| (0..prob.dim().min(3)).collect());
    let an = Analysis::new(prob)?;
    let mut out = vec![CSV_HEADER.to_string()];
    let mut orbit = IntOrbit::new(&prob.a, &prob.x);
    let mut points = Vec::new();
    for n in 0..=opts.orbit {
        let p = orbit.point();
        out.push(row("orbit", 0, &n.to_string(), &pick(&p.iter().map(|v| decimal(v, 15)).collect::<Vec<_>>(), &coords)));
        points.push(p);
        orbit.step();
    }
    let Some(cone) = &an.cone else { return Ok(out) };
    let offset = an.stripped.offset as u64;
    for (n, p) in points.iter().enumerate() {
        let n = n as u64;
        if n < offset {
            continue;
        }
        let k = n - offset;
        let scale = match cone.regime {
            Regime::UnitModulus => Interval::from_int(k.max(1) as i64, prec),
            _ => cone.tau.real_enclosure(prec).powi(k as u32),
        };
        let v: Vec<String> = p.iter().map(|c| decimal(&(&Interval::from_rational(c, prec) / &scale).mid().to_rational(), 15)).collect();
        out.push(row("normalized", 0, &n.to_string(), &pick(&v, &coords)));
    }
    let u_max = match cone.regime {
        Regime::UnitModulus => (opts.orbit as f64).max(2.0),
        _ => (opts.orbit.saturating_sub(offset) as f64).max(1.0),
    };
    let u_min = if cone.regime == Regime::UnitModulus { 1.0 } else { 0.0 };
    for (id, ph) in ray_phases(cone, opts.rays, prec).iter().enumerate() {
        for s in 0..opts.t_samples {
            let frac = if opts.t_samples > 1 { s as f64 / (opts.t_samples - 1) as f64 } else { 0.0 };
            let u = Interval::from_f64(u_min + frac * (u_max - u_min), prec);
            let t = cone.t_of_u(&u, prec);
            let ys: Vec<String> = cone.output_interval(ph, &u, prec).iter().map(|z| decimal(&z.re.mid().to_rational(), 15)).collect();
            out.push(row("ray", id, &decimal(&t.mid().to_rational(), 15), &pick(&ys, &coords)));
        }
    }
    Ok(out)
}

pub fn cmd_plot(path: &Path, opts: &PlotOpts, out: Option<&Path>) -> Output {
    let prob = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let bad = |c: &Vec<usize>| c.is_empty() || c.len() > 3 || c.iter().any(|&i| i >= prob.dim());
    if opts.coords.as_ref().map_or(false, bad) {
        return input_error(format!("--coords must name one to three of the {} coordinates", prob.dim()));
    }
    let rows = match plot_rows(&prob, opts) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    let text = rows.join("\n") + "\n";
    match out {
        Some(p) => match write_atomic(p, &text) {
            Ok(()) => Output { code: 0, stdout: String::new() },
            Err(e) => input_error(format!("{}: {}", p.display(), e)),
        },
        None => Output { code: 0, stdout: text },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        let q = |s: &str| ominv::ser::parse_rational(s).unwrap();
        assert_eq!(decimal(&q("4"), 15), "4e0");
        assert_eq!(decimal(&q("-1/3"), 5), "-3.3333e-1");
        assert_eq!(decimal(&q("999999/1000"), 3), "1e3");
        assert_eq!(decimal(&q("1234"), 15), "1.234e3");
    }
}
