//! Small dense symmetric linear algebra: Cholesky factorization, cyclic
//! Jacobi diagonalization and the symmetric-definite generalized
//! eigenproblem `H x = ε S x` by congruence reduction.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Largest accepted `S` condition number before a basis is declared
/// linearly dependent.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvariantViolation("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
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

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Places `blocks` (a grid of matrices) into one matrix.
    pub fn block(blocks: &[&[&Matrix<T>]]) -> Self {
        let rows: usize = blocks.iter().map(|row| row[0].rows).sum();
        let cols: usize = blocks[0].iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for row in blocks {
            let mut c0 = 0;
            for b in row.iter() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b[(i, j)];
                    }
                }
                c0 += b.cols;
            }
            r0 += row[0].rows;
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular `L` with `L Lᵀ = a`.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::InvariantViolation("cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite { condition: f64::INFINITY });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solves `Lᵀ x = y` for lower-triangular `L`.
pub fn back_substitute<T: Real>(l: &Matrix<T>, y: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `a x = b` for symmetric positive-definite `a`, one column of `b` at a time.
pub fn spd_solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let l = cholesky(a)?;
    let mut out = Matrix::zeros(b.rows(), b.cols());
    for j in 0..b.cols() {
        let x = back_substitute(&l, &forward_substitute(&l, &b.column(j)));
        for (i, v) in x.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Eigenvalues (ascending) and column eigenvectors of a symmetric matrix by
/// cyclic Jacobi rotations.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if !a.is_square() {
        return Err(Error::InvariantViolation("eigenproblem needs a square matrix".into()));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let mut trace = Vec::new();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        trace.push(off.to_f64().unwrap_or(f64::NAN));
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // below this the rotation no longer changes the diagonal
                if apq.abs() <= lit::<T>(0.25) * T::epsilon() * (app.abs() + aqq.abs())
                    || apq.abs() < T::min_positive_value()
                {
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            return Ok(sorted(m, v));
        }
    }
    Err(Error::NonConvergence {
        stage: "jacobi".into(),
        trace,
    })
}

fn sorted<T: Real>(m: Matrix<T>, v: Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Condition number of a symmetric positive-definite matrix after scaling
/// to unit diagonal; infinite if it is not positive definite.
pub fn condition_number<T: Real>(s: &Matrix<T>) -> Result<T> {
    let n = s.rows();
    for i in 0..n {
        if !(s[(i, i)] > T::zero()) {
            return Ok(T::infinity());
        }
    }
    let d: Vec<T> = (0..n).map(|i| s[(i, i)].sqrt().recip()).collect();
    let scaled = Matrix::from_fn(n, n, |i, j| d[i] * s[(i, j)] * d[j]);
    let (values, _) = symmetric_eigen(&scaled)?;
    let lo = values[0];
    let hi = values[n - 1];
    if !(lo > T::zero()) {
        return Ok(T::infinity());
    }
    Ok(hi / lo)
}

/// Solution of `H x = ε S x` with `S` symmetric positive definite; the
/// eigenvectors are `S`-orthonormal columns.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
    pub condition: T,
}

pub fn generalized_eigen<T: Real>(h: &Matrix<T>, s: &Matrix<T>) -> Result<GeneralizedEigen<T>> {
    if !(h.is_square() && s.is_square() && h.rows() == s.rows()) {
        return Err(Error::InvariantViolation("H and S must be square and of equal size".into()));
    }
    let condition = condition_number(s)?;
    if !(condition <= lit(CONDITION_LIMIT)) {
        return Err(Error::NotPositiveDefinite {
            condition: condition.to_f64().unwrap_or(f64::INFINITY),
        });
    }
    let n = h.rows();
    let l = cholesky(s)?;
    // A = L⁻¹ H L⁻ᵀ, column by column
    let mut tmp = Matrix::zeros(n, n);
    for j in 0..n {
        let y = forward_substitute(&l, &h.column(j));
        for i in 0..n {
            tmp[(i, j)] = y[i];
        }
    }
    let tmp_t = tmp.transpose();
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        let y = forward_substitute(&l, &tmp_t.column(j));
        for i in 0..n {
            a[(i, j)] = y[i];
        }
    }
    let a = Matrix::from_fn(n, n, |i, j| lit::<T>(0.5) * (a[(i, j)] + a[(j, i)]));
    let (values, y) = symmetric_eigen(&a)?;
    let mut vectors = Matrix::zeros(n, n);
    for j in 0..n {
        let x = back_substitute(&l, &y.column(j));
        for i in 0..n {
            vectors[(i, j)] = x[i];
        }
    }
    Ok(GeneralizedEigen {
        values,
        vectors,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::<f64>::from_rows(&[vec![4.0, 2.0, 0.4], vec![2.0, 5.0, 1.0], vec![0.4, 1.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-14);
            }
        }
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cholesky(&bad).is_err());
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = Matrix::<f64>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15);
        assert!((vals[1] - 3.0).abs() < 1e-15);
        assert!((vecs[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn jacobi_residuals_and_orthonormality() {
        let n = 7;
        let a = Matrix::from_fn(n, n, |i, j| ((i * 3 + j * 3) % 5) as f64 - 1.5 + if i == j { i as f64 } else { 0.0 });
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        for k in 0..n {
            let x = vecs.column(k);
            let ax = a.mul_vec(&x);
            for i in 0..n {
                assert!((ax[i] - vals[k] * x[i]).abs() < 1e-12);
            }
            for m in 0..n {
                let dot: f64 = (0..n).map(|i| x[i] * vecs[(i, m)]).sum();
                let expected = if m == k { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-13);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn generalized_problem_is_s_orthonormal() {
        let h = Matrix::<f64>::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, -2.0, 0.5], vec![0.0, 0.5, 4.0]]).unwrap();
        let s = Matrix::from_rows(&[vec![1.0, 0.2, 0.1], vec![0.2, 1.0, 0.3], vec![0.1, 0.3, 1.0]]).unwrap();
        let g = generalized_eigen(&h, &s).unwrap();
        for k in 0..3 {
            let x = g.vectors.column(k);
            let hx = h.mul_vec(&x);
            let sx = s.mul_vec(&x);
            for i in 0..3 {
                assert!((hx[i] - g.values[k] * sx[i]).abs() < 1e-12);
            }
            for m in 0..3 {
                let dot: f64 = (0..3).map(|i| g.vectors[(i, m)] * sx[i]).sum();
                assert!((dot - if m == k { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ill_conditioned_overlap_is_rejected() {
        let s = hilbert(12);
        let h = Matrix::identity(12);
        assert!(matches!(generalized_eigen(&h, &s), Err(Error::NotPositiveDefinite { .. })));
        assert!(generalized_eigen(&Matrix::identity(4), &hilbert(4)).is_ok());
    }

    #[test]
    fn spd_solve_inverts() {
        let a = Matrix::<f64>::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = spd_solve(&a, &Matrix::identity(2)).unwrap();
        let prod = a.matmul(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert!((prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
