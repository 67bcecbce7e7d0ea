//! Curated end-to-end instances with their expected verdict kind.

use crate::algebra::matrix::Matrix;
use crate::signdec::{Formula, MPoly, Relation};
use crate::synthesis::Problem;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Hits(u64),
    Invariant,
    RayPersists,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: &'static str,
    pub problem: Problem,
    pub expect: Expect,
}

fn q(s: &str) -> Rational {
    crate::ser::parse_rational(s).expect("rational literal")
}

fn mat(rows: &[&[&str]]) -> crate::RatMatrix {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect())
}

fn vecq(xs: &[&str]) -> Vec<Rational> {
    xs.iter().map(|s| q(s)).collect()
}

fn atom(d: usize, terms: &[(i64, &[u32])], rel: Relation) -> Formula {
    Formula::atom(MPoly::from_i64(d, terms), rel)
}

fn inst(name: &'static str, a: crate::RatMatrix, x: Vec<Rational>, f: Formula, expect: Expect) -> Instance {
    Instance { name, problem: Problem::new(a, x, f).expect("suite instance"), expect }
}

/// Rotation-scaling by `2 (3 + 4i) / 5`, a phase of infinite order.
pub fn dense_matrix() -> crate::RatMatrix {
    mat(&[&["6/5", "-8/5"], &["8/5", "6/5"]])
}

/// Planar spiral at rate 2 lifted by a third axis growing at rate 3.
pub fn spiral_matrix() -> crate::RatMatrix {
    mat(&[&["6/5", "-8/5", "0"], &["8/5", "6/5", "0"], &["0", "0", "3"]])
}

pub fn sector(k: i64) -> Formula {
    Formula::And(vec![
        atom(2, &[(1, &[1, 0]), (-1, &[0, 0])], Relation::Gt),
        atom(2, &[(k, &[0, 2]), (-1, &[2, 0])], Relation::Lt),
    ])
}

pub fn instances() -> Vec<Instance> {
    let diag = || mat(&[&["2", "0"], &["0", "2"]]);
    let ball = || atom(2, &[(4, &[2, 0]), (4, &[0, 2]), (-1, &[0, 0])], Relation::Lt);
    vec![
        inst("diag2-hits", diag(), vecq(&["1", "1"]), atom(2, &[(1, &[1, 0]), (-4, &[0, 0])], Relation::Ge), Expect::Hits(2)),
        inst("diag2-invariant", diag(), vecq(&["1", "1"]), atom(2, &[(1, &[1, 0])], Relation::Le), Expect::Invariant),
        inst("diag2-window", diag(), vecq(&["1", "1"]), Formula::And(vec![
            atom(2, &[(1, &[1, 0]), (-2, &[0, 0])], Relation::Gt),
            atom(2, &[(1, &[1, 0]), (-3, &[0, 0])], Relation::Lt),
        ]), Expect::Invariant),
        inst("rotation-ball", mat(&[&["0", "-2"], &["2", "0"]]), vecq(&["1", "0"]), ball(), Expect::Invariant),
        inst("dense-ball", dense_matrix(), vecq(&["1", "0"]), ball(), Expect::Invariant),
        inst("dense-sector-wide", dense_matrix(), vecq(&["1", "0"]), sector(5), Expect::Hits(7)),
        inst("dense-sector-narrow", dense_matrix(), vecq(&["1", "0"]), sector(1_000_000_000_000), Expect::RayPersists),
        inst("dense-half-line", dense_matrix(), vecq(&["1", "0"]), Formula::And(vec![
            atom(2, &[(1, &[1, 0]), (-2, &[0, 1])], Relation::Eq),
            atom(2, &[(1, &[1, 0]), (-1, &[0, 0])], Relation::Gt),
        ]), Expect::Unknown),
        inst("spiral3d", spiral_matrix(), vecq(&["1", "0", "1"]), Formula::Or(vec![
            atom(3, &[(1, &[0, 0, 1])], Relation::Le),
            atom(3, &[(4, &[2, 0, 0]), (4, &[0, 2, 0]), (-1, &[0, 0, 0])], Relation::Lt),
        ]), Expect::Invariant),
        inst("shear-invariant", mat(&[&["1", "1"], &["0", "1"]]), vecq(&["0", "1"]), atom(2, &[(1, &[1, 0])], Relation::Lt), Expect::Invariant),
        inst("shear-hits", mat(&[&["1", "1"], &["0", "1"]]), vecq(&["0", "1"]), atom(2, &[(1, &[1, 0]), (-7, &[0, 0])], Relation::Eq), Expect::Hits(7)),
        inst("contracting-invariant", mat(&[&["1/2", "0"], &["0", "1/3"]]), vecq(&["1", "1"]), atom(2, &[(1, &[0, 1]), (-1, &[1, 0])], Relation::Gt), Expect::Invariant),
        inst("contracting-hits", mat(&[&["1/2", "0"], &["0", "1/3"]]), vecq(&["1", "1"]), atom(2, &[(1000, &[1, 0]), (-1, &[0, 0])], Relation::Lt), Expect::Hits(10)),
        inst("jordan3-invariant", mat(&[&["2", "1", "0"], &["0", "2", "1"], &["0", "0", "2"]]), vecq(&["0", "0", "1"]), atom(3, &[(1, &[1, 0, 0])], Relation::Lt), Expect::Invariant),
        inst("nilpotent-strip", mat(&[&["2", "1"], &["0", "0"]]), vecq(&["1", "1"]), Formula::And(vec![
            atom(2, &[(1, &[0, 1])], Relation::Gt),
            atom(2, &[(1, &[1, 0]), (-5, &[0, 0])], Relation::Gt),
        ]), Expect::Invariant),
        inst("nilpotent-zero", mat(&[&["0", "1"], &["0", "0"]]), vecq(&["3", "1"]), atom(2, &[(1, &[1, 0]), (-5, &[0, 0])], Relation::Gt), Expect::Invariant),
    ]
}
