//! JSON problem files.
//!
//! ```json
//! { "matrix": [["2", "0"], ["0", "2"]],
//!   "initial": ["1", "1"],
//!   "halting": { "atom": { "monomials": [{ "coef": "1", "exps": [1, 0] }], "rel": ">=" } } }
//! ```

use num_bigint::BigInt;
use ominv::algebra::matrix::Matrix;
use ominv::ser::{fmt_rational, parse_rational};
use ominv::signdec::{Formula, MPoly, Relation};
use ominv::synthesis::Problem;
use ominv::Rational;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("invalid JSON at line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error("{path}: {msg}")]
    Field { path: String, msg: String },
}

fn field(path: &str, msg: impl Into<String>) -> ParseError {
    ParseError::Field { path: path.to_string(), msg: msg.into() }
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, ParseError> {
    v.get(key).ok_or_else(|| field(path, format!("missing field `{}`", key)))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array().ok_or_else(|| field(path, "expected an array"))
}

fn rational_at(v: &Value, path: &str) -> Result<Rational, ParseError> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        _ => return Err(field(path, "expected a rational string \"p/q\"")),
    };
    parse_rational(&s).ok_or_else(|| field(path, format!("malformed rational {:?}", s)))
}

fn relation(s: &str, path: &str) -> Result<Relation, ParseError> {
    Ok(match s {
        ">" => Relation::Gt,
        ">=" => Relation::Ge,
        "=" | "==" => Relation::Eq,
        "!=" => Relation::Ne,
        "<" => Relation::Lt,
        "<=" => Relation::Le,
        _ => return Err(field(path, format!("unknown relation {:?}", s))),
    })
}

fn formula(v: &Value, d: usize, path: &str) -> Result<Formula, ParseError> {
    if let Some(atom) = v.get("atom") {
        let p = format!("{}.atom", path);
        let monos = array(get(atom, "monomials", &p)?, &format!("{}.monomials", p))?;
        let mut terms = Vec::with_capacity(monos.len());
        for (i, m) in monos.iter().enumerate() {
            let mp = format!("{}.monomials[{}]", p, i);
            let coef = match get(m, "coef", &mp)? {
                Value::String(s) => s.trim().parse::<BigInt>().map_err(|_| field(&format!("{}.coef", mp), format!("malformed integer {:?}", s)))?,
                Value::Number(n) if n.is_i64() => BigInt::from(n.as_i64().unwrap()),
                _ => return Err(field(&format!("{}.coef", mp), "expected an integer string")),
            };
            let exps = array(get(m, "exps", &mp)?, &format!("{}.exps", mp))?;
            if exps.len() != d {
                return Err(field(&format!("{}.exps", mp), format!("expected {} exponents, got {}", d, exps.len())));
            }
            let e: Result<Vec<u32>, _> = exps
                .iter()
                .enumerate()
                .map(|(j, x)| x.as_u64().and_then(|x| u32::try_from(x).ok()).ok_or_else(|| field(&format!("{}.exps[{}]", mp, j), "expected a non-negative integer")))
                .collect();
            terms.push((coef, e?));
        }
        let rel = get(atom, "rel", &p)?.as_str().ok_or_else(|| field(&format!("{}.rel", p), "expected a string"))?;
        return Ok(Formula::atom(MPoly::new(d, terms), relation(rel, &format!("{}.rel", p))?));
    }
    let op = get(v, "op", path)?.as_str().ok_or_else(|| field(&format!("{}.op", path), "expected a string"))?;
    let args = array(get(v, "args", path)?, &format!("{}.args", path))?;
    let sub: Result<Vec<Formula>, _> = args.iter().enumerate().map(|(i, a)| formula(a, d, &format!("{}.args[{}]", path, i))).collect();
    let mut sub = sub?;
    match op {
        "and" => Ok(Formula::And(sub)),
        "or" => Ok(Formula::Or(sub)),
        "not" => {
            if sub.len() != 1 {
                return Err(field(&format!("{}.args", path), "`not` takes exactly one argument"));
            }
            Ok(Formula::Not(Box::new(sub.pop().unwrap())))
        }
        _ => Err(field(&format!("{}.op", path), format!("unknown operator {:?}", op))),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Json { line: e.line(), column: e.column(), msg: e.to_string() })?;
    let rows = array(get(&v, "matrix", "$")?, "$.matrix")?;
    let d = rows.len();
    if d == 0 {
        return Err(field("$.matrix", "empty matrix"));
    }
    let mut m = Vec::with_capacity(d);
    for (i, r) in rows.iter().enumerate() {
        let rp = format!("$.matrix[{}]", i);
        let r = array(r, &rp)?;
        if r.len() != d {
            return Err(field(&rp, format!("expected {} entries, got {}", d, r.len())));
        }
        let row: Result<Vec<Rational>, _> = r.iter().enumerate().map(|(j, x)| rational_at(x, &format!("{}[{}]", rp, j))).collect();
        m.push(row?);
    }
    let init = array(get(&v, "initial", "$")?, "$.initial")?;
    if init.len() != d {
        return Err(field("$.initial", format!("expected {} entries, got {}", d, init.len())));
    }
    let x: Result<Vec<Rational>, _> = init.iter().enumerate().map(|(j, e)| rational_at(e, &format!("$.initial[{}]", j))).collect();
    let f = formula(get(&v, "halting", "$")?, d, "$.halting")?;
    Problem::new(Matrix::from_rows(m), x?, f).map_err(|e| field("$", e.to_string()))
}

fn formula_json(f: &Formula) -> Value {
    match f {
        Formula::Atom(a) => json!({
            "atom": {
                "monomials": a.poly.terms.iter().map(|(c, e)| json!({ "coef": c.to_string(), "exps": e })).collect::<Vec<_>>(),
                "rel": a.rel.symbol(),
            }
        }),
        Formula::And(v) => json!({ "op": "and", "args": v.iter().map(formula_json).collect::<Vec<_>>() }),
        Formula::Or(v) => json!({ "op": "or", "args": v.iter().map(formula_json).collect::<Vec<_>>() }),
        Formula::Not(x) => json!({ "op": "not", "args": [formula_json(x)] }),
    }
}

pub fn problem_json(p: &Problem) -> Value {
    json!({
        "matrix": p.a.to_rows().iter().map(|r| r.iter().map(fmt_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "initial": p.x.iter().map(fmt_rational).collect::<Vec<_>>(),
        "halting": formula_json(&p.f),
    })
}

pub fn serialize_problem(p: &Problem) -> String {
    serde_json::to_string_pretty(&problem_json(p)).expect("problem JSON")
}
