//! Dense matrices over a [`Scalar`] with row reduction, rank and nullspace.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::{Scalar, Tolerance};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| if r == c { entries[r].clone() } else { S::zero() })
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

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, r: usize) -> Vec<S> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, k: &S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * k.clone()).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for c in 0..self.cols {
                    let a = &self[(r, c)];
                    if !a.is_exact_zero() && !v[c].is_exact_zero() {
                        acc = acc + a.clone() * v[c].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_exact_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if b.is_exact_zero() {
                        continue;
                    }
                    let cell = &mut out.data[r * other.cols + c];
                    *cell = cell.clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn trace(&self) -> S {
        assert!(self.is_square());
        (0..self.rows).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::abs_f64).fold(0.0, f64::max)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_exact_zero)
    }

    /// Zero test against `tol`, relative to `scale`.
    pub fn is_zero_tol(&self, tol: &Tolerance, scale: f64) -> bool {
        tol.all_zero(self.data.iter(), scale)
    }

    pub fn is_symmetric(&self, tol: &Tolerance) -> bool {
        self.is_square() && (self - &self.transpose()).is_zero_tol(tol, self.max_abs())
    }

    pub fn is_skew(&self, tol: &Tolerance) -> bool {
        self.is_square() && (self + &self.transpose()).is_zero_tol(tol, self.max_abs())
    }

    /// Stacks `blocks` vertically.
    pub fn vstack(blocks: &[Matrix<S>]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        assert!(blocks.iter().all(|b| b.cols == cols));
        let rows = blocks.iter().map(|b| b.rows).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().cloned()).collect();
        Matrix { rows, cols, data }
    }

    /// Copies `block` into `self` with its top-left corner at (`r0`, `c0`).
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix<S>) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(r0 + r, c0 + c)] = block[(r, c)].clone();
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Reduced row echelon form.
    pub fn rref(&self, tol: &Tolerance) -> Rref<S> {
        let scale = self.max_abs();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut smallest_pivot = f64::INFINITY;
        let mut marginal = false;
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // exact: first nonzero; float: partial pivoting by magnitude
            let candidate = if S::EXACT {
                (row..m.rows).find(|&r| !m[(r, col)].is_exact_zero())
            } else {
                (row..m.rows)
                    .max_by(|&a, &b| m[(a, col)].abs_f64().total_cmp(&m[(b, col)].abs_f64()))
                    .filter(|&r| !tol.is_zero(&m[(r, col)], scale))
            };
            let Some(p) = candidate else {
                if !S::EXACT {
                    // entries below the threshold are flushed so later columns see clean rows
                    for r in row..m.rows {
                        if tol.is_marginal(m[(r, col)].abs_f64(), scale) {
                            marginal = true;
                        }
                        m[(r, col)] = S::zero();
                    }
                }
                continue;
            };
            m.swap_rows(row, p);
            let pv = m[(row, col)].clone();
            let mag = pv.abs_f64();
            smallest_pivot = smallest_pivot.min(mag);
            if !S::EXACT && tol.is_marginal(mag, scale) {
                marginal = true;
            }
            for c in col..m.cols {
                let v = m[(row, c)].clone() / pv.clone();
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m[(r, col)].clone();
                if f.is_exact_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = m[(r, c)].clone() - f.clone() * m[(row, c)].clone();
                    m[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { matrix: m, pivots, smallest_pivot, marginal }
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        self.rref(tol).pivots.len()
    }

    /// Basis of the right nullspace `{x : self * x = 0}`.
    pub fn nullspace(&self, tol: &Tolerance) -> Vec<Vec<S>> {
        self.rref(tol).nullspace()
    }

    /// Inverse of a square matrix; `None` when singular.
    pub fn inverse(&self, tol: &Tolerance) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self[(r, c)].clone()
            } else if c - n == r {
                S::one()
            } else {
                S::zero()
            }
        });
        let red = aug.rref(tol);
        (red.pivots.len() >= n && red.pivots[n - 1] == n - 1).then(|| red.matrix.block(0, n, n, n))
    }

    /// Cayley transform `(I - A)(I + A)^{-1}`: a rotation for skew `A`, rational when `A` is.
    pub fn cayley(&self, tol: &Tolerance) -> Option<Self> {
        let id = Self::identity(self.rows);
        Some((&id - self).matmul(&(&id + self).inverse(tol)?))
    }

    /// Solves `self * x = rhs`; `None` when inconsistent. Returns one particular solution.
    pub fn solve(&self, rhs: &[S], tol: &Tolerance) -> Option<Vec<S>> {
        assert_eq!(rhs.len(), self.rows);
        let aug = Self::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols { self[(r, c)].clone() } else { rhs[r].clone() }
        });
        let red = aug.rref(tol);
        if red.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (i, &p) in red.pivots.iter().enumerate() {
            x[p] = red.matrix[(i, self.cols)].clone();
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Result of [`Matrix::rref`].
#[derive(Debug, Clone)]
pub struct Rref<S: Scalar> {
    pub matrix: Matrix<S>,
    pub pivots: Vec<usize>,
    /// Smallest pivot magnitude encountered before normalisation.
    pub smallest_pivot: f64,
    /// Float backend only: some retained or discarded magnitude was within 10x of the threshold.
    pub marginal: bool,
}

impl<S: Scalar> Rref<S> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let n = self.matrix.cols;
        let free: Vec<usize> = (0..n).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); n];
                v[f] = S::one();
                for (i, &p) in self.pivots.iter().enumerate() {
                    v[p] = -self.matrix[(i, f)].clone();
                }
                v
            })
            .collect()
    }
}

/// Incrementally grown span of vectors, kept in echelon form.
#[derive(Debug, Clone)]
pub struct Span<S: Scalar> {
    dim: usize,
    basis: Vec<(usize, Vec<S>)>,
    pub marginal: bool,
}

impl<S: Scalar> Span<S> {
    pub fn new(dim: usize) -> Self {
        Span { dim, basis: Vec::new(), marginal: false }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Reduces `v` against the current basis.
    pub fn residual(&self, v: &[S]) -> Vec<S> {
        let mut r = v.to_vec();
        for (p, b) in &self.basis {
            let f = r[*p].clone();
            if f.is_exact_zero() {
                continue;
            }
            for (x, y) in r.iter_mut().zip(b) {
                if !y.is_exact_zero() {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[S], tol: &Tolerance) -> bool {
        let scale = v.iter().map(Scalar::abs_f64).fold(0.0, f64::max);
        tol.all_zero(self.residual(v).iter(), scale)
    }

    /// Adds `v` when it is independent of the span; returns whether it was added.
    pub fn insert(&mut self, v: &[S], tol: &Tolerance) -> bool {
        assert_eq!(v.len(), self.dim);
        let scale = v.iter().map(Scalar::abs_f64).fold(0.0, f64::max);
        let mut r = self.residual(v);
        let pivot = if S::EXACT {
            r.iter().position(|x| !x.is_exact_zero())
        } else {
            let (idx, mag) = r
                .iter()
                .enumerate()
                .map(|(i, x)| (i, x.abs_f64()))
                .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if tol.is_marginal(mag, scale) {
                self.marginal = true;
            }
            (mag > tol.threshold(scale)).then_some(idx)
        };
        let Some(p) = pivot else {
            return false;
        };
        let pv = r[p].clone();
        for x in r.iter_mut() {
            *x = x.clone() / pv.clone();
        }
        self.basis.push((p, r));
        true
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Vec<S>> {
        self.basis.iter().map(|(_, v)| v)
    }
}

impl<S: Scalar> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        self.matmul(rhs)
    }
}

impl<S: Scalar> Neg for &Matrix<S> {
    type Output = Matrix<S>;
    fn neg(self) -> Matrix<S> {
        self.map(|x| -x.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn rank_and_nullspace_exact() {
        let m = Matrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(1), q(0), q(1)],
        ]);
        let tol = Tolerance::default();
        assert_eq!(m.rank(&tol), 2);
        let ns = m.nullspace(&tol);
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(Scalar::is_exact_zero));
    }

    #[test]
    fn cayley_gives_rotation() {
        let a = Matrix::from_rows(vec![
            vec![q(0), q(1), q(-2), q(0)],
            vec![q(-1), q(0), q(1), q(3)],
            vec![q(2), q(-1), q(0), q(1)],
            vec![q(0), q(-3), q(-1), q(0)],
        ]);
        let r = a.cayley(&Tolerance::default()).unwrap();
        assert_eq!(r.transpose().matmul(&r), Matrix::identity(4));
        assert_eq!(r.matmul(&r.inverse(&Tolerance::default()).unwrap()), Matrix::identity(4));
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(2), q(2)]]);
        let tol = Tolerance::default();
        assert!(m.solve(&[q(1), q(3)], &tol).is_none());
        let x = m.solve(&[q(1), q(2)], &tol).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(1), q(2)]);
    }

    #[test]
    fn float_rank_uses_tolerance() {
        let m: Matrix<f64> = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-13]]);
        assert_eq!(m.rank(&Tolerance::default()), 1);
        assert_eq!(m.rank(&Tolerance::new(1e-15)), 2);
    }

    #[test]
    fn span_insert_and_membership() {
        let tol = Tolerance::default();
        let mut s = Span::new(3);
        assert!(s.insert(&[q(1), q(1), q(0)], &tol));
        assert!(s.insert(&[q(0), q(1), q(1)], &tol));
        assert!(!s.insert(&[q(1), q(2), q(1)], &tol));
        assert!(s.contains(&[q(2), q(0), q(-2)], &tol));
        assert!(!s.contains(&[q(0), q(0), q(1)], &tol));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn commutator_of_commuting_is_zero() {
        let a = Matrix::diagonal(&[q(1), q(2)]);
        let b = Matrix::diagonal(&[q(3), q(-1)]);
        assert!(a.commutator(&b).is_exact_zero());
    }
}
