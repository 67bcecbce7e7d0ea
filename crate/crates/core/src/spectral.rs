//! Exact Jordan decomposition, nilpotent stripping and regime classification.
//!
//! For each irreducible factor `m` of the characteristic polynomial the
//! Jordan chains are computed once over `K = Q[z]/(m)` with `z` standing for
//! the eigenvalue; the chains of every root of `m` are the images of these
//! under the embeddings `z -> root`. Rows of `P^-1` are obtained the same
//! way from left generalized eigenvectors. Because the embeddings of one
//! factor sum to the field trace, `P J P^-1` and `P P^-1` are rational
//! matrices that can be checked exactly over `Q`.

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::algebraic::AlgebraicNumber;
use crate::algebra::factor;
use crate::algebra::genpoly::{GenContext, GenPoly};
use crate::algebra::intpoly;
use crate::algebra::matrix::Matrix;
use crate::algebra::numfield::{FieldElem, NumberField};
use crate::{IntPoly, RatMatrix, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Dominant modulus `> 1`; `t = rho^n`.
    Expanding,
    /// All moduli `<= 1`, dominant (minimum) `< 1`; `t = rho^-n`.
    Contracting,
    /// All moduli equal to one; `t = n`.
    UnitModulus,
}

#[derive(Debug, thiserror::Error)]
pub enum SpectralError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is singular; strip the nilpotent part first")]
    Singular,
}

/// Data attached to one irreducible factor of the characteristic polynomial.
#[derive(Clone, Debug)]
pub struct EigenFactor {
    /// Primitive irreducible factor.
    pub minpoly: IntPoly,
    pub multiplicity: usize,
    /// `None` for a rational eigenvalue.
    pub field: Option<Arc<NumberField>>,
    /// The eigenvalue as a field element.
    pub theta: FieldElem,
    /// Generalized eigenvectors over `K`, chain by chain.
    pub columns: Vec<Vec<FieldElem>>,
    /// Matching rows of the inverse.
    pub rows: Vec<Vec<FieldElem>>,
    pub chain_sizes: Vec<usize>,
    /// All roots, ordered by real part then imaginary part descending.
    pub roots: Vec<AlgebraicNumber>,
}

impl EigenFactor {
    pub fn degree(&self) -> usize {
        self.minpoly.degree().unwrap()
    }

    fn chain_start(&self, c: usize) -> usize {
        self.chain_sizes[..c].iter().sum()
    }

    fn trace(&self, e: &FieldElem) -> Rational {
        match &self.field {
            None => e.as_rational().cloned().unwrap_or_else(Rational::zero),
            Some(k) => e.trace(k),
        }
    }
}

/// One Jordan block `rho * lambda` of size `size`.
#[derive(Clone, Debug)]
pub struct JordanBlockInfo {
    pub eigenvalue: AlgebraicNumber,
    pub modulus: AlgebraicNumber,
    pub size: usize,
    pub factor: usize,
    pub root: usize,
    pub chain: usize,
    /// Index of the block holding the conjugate eigenvalue (itself if real).
    pub partner: usize,
    phase: OnceLock<AlgebraicNumber>,
}

impl JordanBlockInfo {
    pub fn is_real(&self) -> bool {
        self.eigenvalue.is_real()
    }

    /// `lambda = eigenvalue / modulus`, computed on first use.
    pub fn phase(&self) -> &AlgebraicNumber {
        self.phase.get_or_init(|| {
            if self.is_real() {
                AlgebraicNumber::from_int(self.eigenvalue.alg_sign().to_i32() as i64)
            } else {
                self.eigenvalue.clone() / self.modulus.clone()
            }
        })
    }
}

/// `(block, row-in-block)` with zero-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRowIndex {
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub dim: usize,
    pub factors: Vec<EigenFactor>,
    pub blocks: Vec<JordanBlockInfo>,
    pub dominant: usize,
    pub regime: Regime,
    p: OnceLock<(Matrix<AlgebraicNumber>, Matrix<AlgebraicNumber>)>,
}

#[cfg(test)]
fn rat(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn nullspace(m: &Matrix<FieldElem>) -> Vec<Vec<FieldElem>> {
    m.kernel()
}

fn rank_of(vecs: &[Vec<FieldElem>], d: usize) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    Matrix::from_fn(vecs.len(), d, |r, c| vecs[r][c].clone()).rank()
}

/// Jordan chains of `A - theta I` for an eigenvalue of algebraic multiplicity `mult`.
fn chains_over(a: &Matrix<FieldElem>, theta: &FieldElem, mult: usize) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
    let d = a.rows();
    let b = Matrix::from_fn(d, d, |r, c| {
        if r == c {
            a[(r, c)].clone() - theta.clone()
        } else {
            a[(r, c)].clone()
        }
    });
    // Kernels of B^j until the generalized eigenspace is reached.
    let mut kernels: Vec<Vec<Vec<FieldElem>>> = vec![Vec::new()];
    let mut bp = Matrix::<FieldElem>::identity(d);
    loop {
        bp = &bp * &b;
        let k = nullspace(&bp);
        let done = k.len() >= mult;
        kernels.push(k);
        if done {
            break;
        }
        assert!(kernels.len() <= d + 1, "generalized eigenspace dimension mismatch");
    }
    let s = kernels.len() - 1;
    let apply_b = |v: &Vec<FieldElem>| b.mul_vec(v);
    let mut tops: Vec<(usize, Vec<FieldElem>)> = Vec::new();
    for j in (1..=s).rev() {
        let mut current: Vec<Vec<FieldElem>> = kernels[j - 1].clone();
        for (l, w) in &tops {
            let mut v = w.clone();
            for _ in 0..(l - j) {
                v = apply_b(&v);
            }
            current.push(v);
        }
        let mut r = rank_of(&current, d);
        for v in &kernels[j] {
            current.push(v.clone());
            let r2 = rank_of(&current, d);
            if r2 > r {
                r = r2;
                tops.push((j, v.clone()));
            } else {
                current.pop();
            }
        }
    }
    let mut columns = Vec::new();
    let mut sizes = Vec::new();
    for (l, w) in &tops {
        let mut chain = vec![w.clone()];
        for _ in 1..*l {
            let nxt = apply_b(chain.last().unwrap());
            chain.push(nxt);
        }
        chain.reverse();
        columns.extend(chain);
        sizes.push(*l);
    }
    (columns, sizes)
}

fn left_rows(
    a: &Matrix<FieldElem>,
    theta: &FieldElem,
    mult: usize,
    columns: &[Vec<FieldElem>],
) -> Vec<Vec<FieldElem>> {
    let d = a.rows();
    let bt = Matrix::from_fn(d, d, |r, c| {
        if r == c {
            a[(c, r)].clone() - theta.clone()
        } else {
            a[(c, r)].clone()
        }
    });
    let w0 = nullspace(&bt.pow(mult as u64));
    assert_eq!(w0.len(), mult);
    let w0m = Matrix::from_fn(mult, d, |r, c| w0[r][c].clone());
    let vm = Matrix::from_fn(d, mult, |r, c| columns[c][r].clone());
    let g = (&w0m * &vm).inverse().expect("left and right generalized eigenspaces pair");
    let w = &g * &w0m;
    w.to_rows()
}

fn sort_roots(mut roots: Vec<AlgebraicNumber>) -> Vec<AlgebraicNumber> {
    roots.sort_by(|x, y| {
        let (a, b) = (x.approx(), y.approx());
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
    });
    roots
}

/// Exact Jordan decomposition of an invertible rational matrix.
pub fn jordan_decompose(a: &RatMatrix) -> Result<JordanDecomposition, SpectralError> {
    if !a.is_square() {
        return Err(SpectralError::NotSquare);
    }
    let d = a.rows();
    let cp = intpoly::from_rational(&a.charpoly());
    if d > 0 && cp.coeff(0).is_zero() {
        return Err(SpectralError::Singular);
    }
    let mut factors = Vec::new();
    if d > 0 {
        for (f, mult) in factor::factor(&cp) {
            let f = intpoly::primitive(&f);
            let mult = mult as usize;
            let (field, theta) = if f.degree() == Some(1) {
                (None, FieldElem::scalar(Rational::new(-f.coeff(0), f.coeff(1))))
            } else {
                let k = NumberField::new(&f);
                let z = k.generator();
                (Some(k), z)
            };
            let ak = a.map(|q| FieldElem::scalar(q.clone()));
            let (columns, chain_sizes) = chains_over(&ak, &theta, mult);
            let rows = left_rows(&ak, &theta, mult, &columns);
            let roots = sort_roots(AlgebraicNumber::roots_of_irreducible(&f));
            factors.push(EigenFactor { minpoly: f, multiplicity: mult, field, theta, columns, rows, chain_sizes, roots });
        }
    }
    Ok(assemble(d, factors))
}

struct Unit {
    factor: usize,
    roots: Vec<usize>,
    modulus: AlgebraicNumber,
}

fn assemble(d: usize, factors: Vec<EigenFactor>) -> JordanDecomposition {
    // Ordering units: a real root, or a conjugate pair (Im > 0 first).
    let mut units = Vec::new();
    for (fi, f) in factors.iter().enumerate() {
        let mut used = vec![false; f.roots.len()];
        for r in 0..f.roots.len() {
            if used[r] {
                continue;
            }
            used[r] = true;
            let root = &f.roots[r];
            let modulus = root.modulus();
            if root.is_real() {
                units.push(Unit { factor: fi, roots: vec![r], modulus });
                continue;
            }
            let c = root.conj();
            let partner = (0..f.roots.len()).find(|&s| !used[s] && f.roots[s].equals(&c)).expect("conjugate root");
            used[partner] = true;
            let (hi, lo) = if root.approx().1 > 0.0 { (r, partner) } else { (partner, r) };
            units.push(Unit { factor: fi, roots: vec![hi, lo], modulus });
        }
    }
    let one = AlgebraicNumber::from_int(1);
    let regime = if units.is_empty() {
        Regime::UnitModulus
    } else if units.iter().any(|u| u.modulus.cmp_real(&one) == Ordering::Greater) {
        Regime::Expanding
    } else if units.iter().any(|u| u.modulus.cmp_real(&one) == Ordering::Less) {
        Regime::Contracting
    } else {
        Regime::UnitModulus
    };
    // Stable sort keeps factor/root order among equal moduli; dominant last.
    units.sort_by(|x, y| {
        let o = x.modulus.cmp_real(&y.modulus);
        if regime == Regime::Contracting {
            o.reverse()
        } else {
            o
        }
    });
    let mut blocks: Vec<JordanBlockInfo> = Vec::new();
    for u in &units {
        let f = &factors[u.factor];
        for c in 0..f.chain_sizes.len() {
            let base = blocks.len();
            for (k, &r) in u.roots.iter().enumerate() {
                let partner = if u.roots.len() == 2 { base + 1 - k } else { base };
                blocks.push(JordanBlockInfo {
                    eigenvalue: f.roots[r].clone(),
                    modulus: u.modulus.clone(),
                    size: f.chain_sizes[c],
                    factor: u.factor,
                    root: r,
                    chain: c,
                    partner,
                    phase: OnceLock::new(),
                });
            }
        }
    }
    let dominant = blocks.len().saturating_sub(1);
    JordanDecomposition { dim: d, factors, blocks, dominant, regime, p: OnceLock::new() }
}

impl JordanDecomposition {
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    /// Block-row indices in coordinate order.
    pub fn block_rows(&self) -> Vec<BlockRowIndex> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            for j in 0..b.size {
                out.push(BlockRowIndex { i, j });
            }
        }
        out
    }

    pub fn block_offset(&self, i: usize) -> usize {
        self.blocks[..i].iter().map(|b| b.size).sum()
    }

    /// Column `j` of block `i` of `P`, over the factor's field.
    pub fn column_k(&self, i: usize, j: usize) -> &[FieldElem] {
        let b = &self.blocks[i];
        let f = &self.factors[b.factor];
        &f.columns[f.chain_start(b.chain) + j]
    }

    /// Row `j` of block `i` of `P^-1`, over the factor's field.
    pub fn row_k(&self, i: usize, j: usize) -> &[FieldElem] {
        let b = &self.blocks[i];
        let f = &self.factors[b.factor];
        &f.rows[f.chain_start(b.chain) + j]
    }

    /// Embedding of a field element of block `i`'s factor at block `i`'s root.
    pub fn embed(&self, i: usize, e: &FieldElem) -> AlgebraicNumber {
        e.embed(&self.blocks[i].eigenvalue)
    }

    pub fn dominant_modulus(&self) -> &AlgebraicNumber {
        &self.blocks[self.dominant].modulus
    }

    /// `P` and `P^-1` with algebraic entries (computed on first use).
    pub fn p_matrices(&self) -> &(Matrix<AlgebraicNumber>, Matrix<AlgebraicNumber>) {
        self.p.get_or_init(|| {
            let d = self.dim;
            let idx = self.block_rows();
            let p = Matrix::from_fn(d, d, |r, c| {
                let BlockRowIndex { i, j } = idx[c];
                self.embed(i, &self.column_k(i, j)[r])
            });
            let pinv = Matrix::from_fn(d, d, |r, c| {
                let BlockRowIndex { i, j } = idx[r];
                self.embed(i, &self.row_k(i, j)[c])
            });
            (p, pinv)
        })
    }

    pub fn p(&self) -> &Matrix<AlgebraicNumber> {
        &self.p_matrices().0
    }

    pub fn p_inv(&self) -> &Matrix<AlgebraicNumber> {
        &self.p_matrices().1
    }

    /// The Jordan matrix with algebraic entries.
    pub fn j_matrix(&self) -> Matrix<AlgebraicNumber> {
        let d = self.dim;
        let idx = self.block_rows();
        Matrix::from_fn(d, d, |r, c| {
            let (a, b) = (idx[r], idx[c]);
            if a.i != b.i {
                AlgebraicNumber::from_int(0)
            } else if a.j == b.j {
                self.blocks[a.i].eigenvalue.clone()
            } else if b.j == a.j + 1 {
                AlgebraicNumber::from_int(1)
            } else {
                AlgebraicNumber::from_int(0)
            }
        })
    }

    /// `sum over factors Tr(V J W)` and `Tr(V W)`: exactly `P J P^-1` and `P P^-1`.
    pub fn reconstruct(&self) -> (RatMatrix, RatMatrix) {
        let d = self.dim;
        let mut pjp: RatMatrix = Matrix::zeros(d, d);
        let mut ppi: RatMatrix = Matrix::zeros(d, d);
        for f in &self.factors {
            let n = f.columns.len();
            for r in 0..d {
                for c in 0..d {
                    let mut s1 = FieldElem::zero();
                    let mut s2 = FieldElem::zero();
                    let mut off = 0;
                    for &size in &f.chain_sizes {
                        for j in 0..size {
                            let col = off + j;
                            let v = f.columns[col][r].clone();
                            let w = f.rows[col][c].clone();
                            // (J W)_{col} = theta w_col + w_{col+1} inside a chain.
                            let mut jw = f.theta.clone() * w.clone();
                            if j + 1 < size {
                                jw = jw + f.rows[col + 1][c].clone();
                            }
                            s1 = s1 + v.clone() * jw;
                            s2 = s2 + v * w;
                        }
                        off += size;
                    }
                    debug_assert_eq!(off, n);
                    pjp[(r, c)] = pjp[(r, c)].clone() + f.trace(&s1);
                    ppi[(r, c)] = ppi[(r, c)].clone() + f.trace(&s2);
                }
            }
        }
        (pjp, ppi)
    }

    /// `x' = P^-1 x`, as field elements per coordinate.
    pub fn transform_k(&self, x: &[Rational]) -> Vec<FieldElem> {
        self.block_rows()
            .iter()
            .map(|&BlockRowIndex { i, j }| {
                let row = self.row_k(i, j);
                row.iter().zip(x).fold(FieldElem::zero(), |acc, (w, xi)| acc + w.clone() * FieldElem::scalar(xi.clone()))
            })
            .collect()
    }

    /// A generator context holding one generator per eigenvalue; entry `i`
    /// of the returned vector is block `i`'s eigenvalue as an expression.
    pub fn gen_context(&self) -> (GenContext, Vec<GenPoly>) {
        let mut ctx = GenContext::new();
        let thetas = self.blocks.iter().map(|b| ctx.add(&b.eigenvalue)).collect();
        (ctx, thetas)
    }

    /// Field element of block `i` as an expression in its eigenvalue.
    pub fn embed_gen(&self, theta: &GenPoly, e: &FieldElem) -> GenPoly {
        GenPoly::from_univariate(&e.as_poly(), theta)
    }
}

/// True iff `P J P^-1 = A` and `P P^-1 = I` exactly.
pub fn verify_decomposition(dec: &JordanDecomposition, a: &RatMatrix) -> bool {
    if a.rows() != dec.dim || a.cols() != dec.dim {
        return false;
    }
    if dec.blocks.iter().map(|b| b.size).sum::<usize>() != dec.dim {
        return false;
    }
    let (pjp, ppi) = dec.reconstruct();
    pjp == *a && ppi == Matrix::identity(dec.dim)
}

/// Result of removing the nilpotent part.
#[derive(Clone, Debug)]
pub struct Stripped {
    /// Invertible restriction to the image subspace (possibly 0 x 0).
    pub a: RatMatrix,
    /// Reduced coordinates of `A^s x`.
    pub x: Vec<Rational>,
    /// `x, Ax, ..., A^(s-1) x`.
    pub prefix: Vec<Vec<Rational>>,
    /// `d x d'` basis of the image subspace: reduced `y` maps to `E y`.
    pub embedding: RatMatrix,
    pub offset: usize,
}

impl Stripped {
    pub fn embed(&self, y: &[Rational]) -> Vec<Rational> {
        self.embedding.mul_vec(y)
    }
}

pub fn strip_nilpotent(a: &RatMatrix, x: &[Rational]) -> Stripped {
    let d = a.rows();
    // Index s of the eigenvalue 0: ranks of A^s stabilize.
    let mut pw = Matrix::identity(d);
    let mut rank = d;
    let mut s = 0;
    loop {
        let next = &pw * a;
        let r = next.rank();
        if r == rank {
            break;
        }
        pw = next;
        rank = r;
        s += 1;
    }
    if s == 0 {
        return Stripped { a: a.clone(), x: x.to_vec(), prefix: Vec::new(), embedding: Matrix::identity(d), offset: 0 };
    }
    let mut prefix = Vec::new();
    let mut cur = x.to_vec();
    for _ in 0..s {
        prefix.push(cur.clone());
        cur = a.mul_vec(&cur);
    }
    // Basis of the column space of A^s from the rref of its transpose.
    let (rr, pivots) = pw.transpose().rref();
    let dp = pivots.len();
    let basis: Vec<Vec<Rational>> = (0..dp).map(|i| rr.row(i)).collect();
    let embedding = Matrix::from_fn(d, dp, |r, c| basis[c][r].clone());
    let coords = |v: &[Rational]| -> Vec<Rational> { pivots.iter().map(|&p| v[p].clone()).collect() };
    let ab = Matrix::from_fn(dp, dp, |r, c| {
        let img = a.mul_vec(&basis[c]);
        coords(&img)[r].clone()
    });
    Stripped { a: ab, x: coords(&cur), prefix, embedding, offset: s }
}

/// Exact orbit `A^n x / den` kept over the integers to avoid repeated gcds.
#[derive(Clone, Debug)]
pub struct IntOrbit {
    m: Matrix<num_bigint::BigInt>,
    q: num_bigint::BigInt,
    pub v: Vec<num_bigint::BigInt>,
    pub den: num_bigint::BigInt,
}

impl IntOrbit {
    pub fn new(a: &RatMatrix, x: &[Rational]) -> IntOrbit {
        use num_integer::Integer;
        let mut q = num_bigint::BigInt::one();
        for e in a.data() {
            q = q.lcm(e.denom());
        }
        let mut den = num_bigint::BigInt::one();
        for e in x {
            den = den.lcm(e.denom());
        }
        let qq = Rational::from_integer(q.clone());
        let m = a.map(|e| (e * &qq).to_integer());
        let dd = Rational::from_integer(den.clone());
        let v = x.iter().map(|e| (e * &dd).to_integer()).collect();
        IntOrbit { m, q, v, den }
    }

    pub fn step(&mut self) {
        self.v = self.m.mul_vec(&self.v);
        self.den *= &self.q;
    }

    pub fn point(&self) -> Vec<Rational> {
        self.v.iter().map(|e| Rational::new(e.clone(), self.den.clone())).collect()
    }
}

pub fn rational_orbit(a: &RatMatrix, x: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![x.to_vec()];
    for _ in 0..n {
        let nxt = a.mul_vec(out.last().unwrap());
        out.push(nxt);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect())
    }

    #[test]
    fn rotation_scaling() {
        let a = m(&[&[0, -2], &[2, 0]]);
        let dec = jordan_decompose(&a).unwrap();
        assert!(verify_decomposition(&dec, &a));
        assert_eq!(dec.regime, Regime::Expanding);
        assert_eq!(dec.blocks.len(), 2);
        assert!(dec.blocks[0].eigenvalue.equals(&(AlgebraicNumber::imag_unit() * AlgebraicNumber::from_int(2))));
        assert!(dec.blocks[0].modulus.equals(&AlgebraicNumber::from_int(2)));
        assert!(dec.blocks[1].phase().equals(&AlgebraicNumber::imag_unit().negate()));
        assert_eq!(dec.blocks[0].partner, 1);
    }

    #[test]
    fn shear_and_scalar() {
        let a = m(&[&[1, 1], &[0, 1]]);
        let dec = jordan_decompose(&a).unwrap();
        assert_eq!(dec.regime, Regime::UnitModulus);
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(dec.blocks[0].size, 2);
        let p = dec.p();
        for r in 0..2 {
            for c in 0..2 {
                assert!(p[(r, c)].equals(&AlgebraicNumber::from_int((r == c) as i64)));
            }
        }
        let h = Rational::new(1.into(), 2.into());
        let b = Matrix::from_rows(vec![vec![h.clone(), rat(0)], vec![rat(0), h]]);
        let dec = jordan_decompose(&b).unwrap();
        assert_eq!(dec.regime, Regime::Contracting);
        assert_eq!(dec.blocks.len(), 2);
        assert!(verify_decomposition(&dec, &b));
    }

    #[test]
    fn perturbed_inverse_fails() {
        let a = m(&[&[0, -2], &[2, 0]]);
        let mut dec = jordan_decompose(&a).unwrap();
        let e = dec.factors[0].rows[0][0].clone();
        dec.factors[0].rows[0][0] = e + FieldElem::one();
        assert!(!verify_decomposition(&dec, &a));
        let id = m(&[&[1, 0], &[0, 1]]);
        assert!(verify_decomposition(&jordan_decompose(&id).unwrap(), &id));
    }

    #[test]
    fn nontrivial_chains() {
        // Two Jordan blocks for eigenvalue 2 (sizes 2 and 1) and a quadratic pair.
        let a = m(&[&[2, 1, 0, 0, 0], &[0, 2, 0, 0, 0], &[0, 0, 2, 0, 0], &[0, 0, 0, 0, -1], &[0, 0, 0, 1, 1]]);
        let t = m(&[&[1, 1, 0, 0, 1], &[0, 1, 1, 0, 0], &[0, 0, 1, 1, 0], &[1, 0, 0, 1, 0], &[0, 1, 0, 0, 1]]);
        let ti = t.inverse().unwrap();
        let b = &(&t * &a) * &ti;
        let dec = jordan_decompose(&b).unwrap();
        assert!(verify_decomposition(&dec, &b));
        let mut sizes: Vec<usize> = dec.blocks.iter().map(|b| b.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 1, 2]);
        assert_eq!(dec.regime, Regime::Expanding);
        assert!(dec.dominant_modulus().equals(&AlgebraicNumber::from_int(2)));
    }

    #[test]
    fn strip_examples() {
        let a = m(&[&[0, 0], &[0, 2]]);
        let s = strip_nilpotent(&a, &[rat(3), rat(1)]);
        assert_eq!(s.prefix, vec![vec![rat(3), rat(1)]]);
        assert_eq!(s.a, m(&[&[2]]));
        assert_eq!(s.x, vec![rat(2)]);
        assert_eq!(s.embed(&[rat(5)]), vec![rat(0), rat(5)]);
        let n = m(&[&[0, 1], &[0, 0]]);
        let s = strip_nilpotent(&n, &[rat(0), rat(1)]);
        assert_eq!(s.a.rows(), 0);
        assert_eq!(s.prefix, vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]]);
        let i = m(&[&[1, 2], &[3, 4]]);
        let s = strip_nilpotent(&i, &[rat(1), rat(1)]);
        assert!(s.prefix.is_empty() && s.a == i);
    }
}
