use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use super::poly::Poly;
use super::{Field, Ring};

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Matrix<T> {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Matrix<T> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Matrix<T> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> Vec<T> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn from_cols(cols: &[Vec<T>]) -> Matrix<T> {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        Matrix::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Matrix<T> {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix<T> {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    acc = acc + self[(r, c)].clone() * v[c].clone();
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn pow(&self, mut e: u64) -> Matrix<T> {
        assert!(self.is_square());
        let mut result = Matrix::identity(self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn kron(&self, o: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.rows * o.rows, self.cols * o.cols, |r, c| {
            self[(r / o.rows, c / o.cols)].clone() * o[(r % o.rows, c % o.cols)].clone()
        })
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Characteristic polynomial `det(zI - A)` by Berkowitz (division-free).
    pub fn charpoly(&self) -> Poly<T> {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Poly::constant(T::one());
        }
        // Vector of coefficients in descending degree, starting with the 1x1 case.
        let mut v: Vec<T> = vec![T::one(), -self[(0, 0)].clone()];
        for k in 1..n {
            // Submatrix A[0..k,0..k], row R = A[k,0..k], column C = A[0..k,k], a = A[k,k].
            let a = self[(k, k)].clone();
            let rrow: Vec<T> = (0..k).map(|j| self[(k, j)].clone()).collect();
            let ccol: Vec<T> = (0..k).map(|i| self[(i, k)].clone()).collect();
            // Toeplitz column: 1, -a, -R C, -R M C, -R M^2 C, ...
            let mut t = vec![T::one(), -a];
            let mut w = ccol.clone();
            for _ in 0..k {
                let rc = dot(&rrow, &w);
                t.push(-rc);
                w = (0..k)
                    .map(|i| {
                        let mut acc = T::zero();
                        for j in 0..k {
                            acc = acc + self[(i, j)].clone() * w[j].clone();
                        }
                        acc
                    })
                    .collect();
            }
            // new v (length k+2) = Toeplitz(t) * v (length k+1)
            let mut nv = vec![T::zero(); k + 2];
            for (i, item) in nv.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, vj) in v.iter().enumerate() {
                    if i >= j {
                        acc = acc + t[i - j].clone() * vj.clone();
                    }
                }
                *item = acc;
            }
            v = nv;
        }
        v.reverse();
        Poly::new(v)
    }
}

fn dot<T: Ring>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

impl<T: Field> Matrix<T> {
    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix<T>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    let tmp = m[(r, j)].clone();
                    m[(r, j)] = m[(p, j)].clone();
                    m[(p, j)] = tmp;
                }
            }
            let inv = T::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                m[(r, j)] = m[(r, j)].clone() * inv.clone();
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in 0..m.cols {
                        m[(i, j)] = m[(i, j)].clone() - f.clone() * m[(r, j)].clone();
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as column vectors.
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let (m, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -m[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<Matrix<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Matrix::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self[(r, c)].clone()
            } else if c - n == r {
                T::one()
            } else {
                T::zero()
            }
        });
        let (m, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, |r, c| m[(r, c + n)].clone()))
    }

    pub fn det(&self) -> T {
        let cp = self.charpoly();
        let c0 = cp.coeff(0);
        if self.rows % 2 == 0 {
            c0
        } else {
            -c0
        }
    }

    /// Solve `self * x = b`; `None` if inconsistent. Returns one solution.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        let aug = Matrix::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                b[r].clone()
            }
        });
        let (m, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![T::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = m[(i, self.cols)].clone();
        }
        Some(x)
    }
}

impl<T: Ring> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, o: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, o.rows, "matrix dimension mismatch");
        let mut out: Matrix<T> = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * o[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<T: Ring> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, o: &Matrix<T>) -> Matrix<T> {
        assert!(self.rows == o.rows && self.cols == o.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<T: Ring> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, o: &Matrix<T>) -> Matrix<T> {
        assert!(self.rows == o.rows && self.cols == o.cols);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect(),
        )
    }

    #[test]
    fn charpoly_berkowitz() {
        let a = m(&[&[0, -2], &[2, 0]]);
        let cp = a.charpoly();
        let want: Vec<Rational> = [4, 0, 1].iter().map(|&x| Rational::from_integer(x.into())).collect();
        assert_eq!(cp.coeffs(), &want[..]);
        let b = m(&[&[2, 1, 0], &[0, 2, 0], &[1, 0, 3]]);
        // (z-2)^2 (z-3) = z^3 - 7z^2 + 16z - 12
        let want: Vec<Rational> = [-12, 16, -7, 1].iter().map(|&x| Rational::from_integer(x.into())).collect();
        assert_eq!(b.charpoly().coeffs(), &want[..]);
        assert_eq!(b.det(), Rational::from_integer(12.into()));
    }

    #[test]
    fn inverse_and_kernel() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, Matrix::identity(2));
        let s = m(&[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
        let k = s.kernel();
        assert_eq!(k.len(), 1);
        assert!(s.mul_vec(&k[0]).iter().all(|x| x == &Rational::from_integer(0.into())));
        assert_eq!(s.rank(), 1);
    }
}
