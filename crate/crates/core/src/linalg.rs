//! Compressed sparse rows, a sparse LU wrapper and small dense helpers.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed. The result has sorted column indices in each row.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k])))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.values[self.indptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|k| self.values[k] * x[self.indices[k]]).sum()).collect()
    }

    /// Aᵀ x.
    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * x[r];
            }
        }
        y
    }

    /// yᵀ A x.
    pub fn form(&self, y: &[f64], x: &[f64]) -> f64 {
        dot(y, &self.mul_vec(x))
    }

    pub fn transpose(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.ncols, self.nrows, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// self + s·other.
    pub fn add_scaled(&self, other: &CsrMatrix, s: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self.triplets().chain(other.triplets().map(|(r, c, v)| (r, c, s * v))).collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, t)
    }

    /// max |A - Aᵀ|.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.add_scaled(&self.transpose(), -1.0);
        d.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let t: Vec<Triplet<usize, usize, f64>> = self.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t).expect("valid triplets")
    }

    /// Rows with at least one nonzero entry.
    pub fn nonzero_rows(&self) -> Vec<usize> {
        (0..self.nrows).filter(|&r| (self.indptr[r]..self.indptr[r + 1]).any(|k| self.values[k] != 0.0)).collect()
    }
}

/// Symmetric block matrix [K, Cᵀ; C, 0] as sparse triplets.
pub fn saddle_matrix(k: &CsrMatrix, c: &CsrMatrix) -> CsrMatrix {
    let n = k.nrows;
    let m = c.nrows;
    let mut t: Vec<_> = k.triplets().collect();
    for (r, col, v) in c.triplets() {
        t.push((n + r, col, v));
        t.push((col, n + r, v));
    }
    CsrMatrix::from_triplets(n + m, n + m, t)
}

/// Sparse LU factorization with iterative refinement.
pub struct SparseLu {
    matrix: CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SparseLu(n={}, nnz={})", self.matrix.nrows, self.matrix.nnz())
    }
}

impl SparseLu {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        let lu = matrix.to_faer().sp_lu().map_err(|e| Error::Singular(format!("{e:?}")))?;
        Ok(SparseLu { matrix, lu })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Solves Ax = b, refining until the relative residual is at most `tol`.
    /// Returns the solution and the attained relative residual.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
        let bn = norm(b);
        if bn == 0.0 {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let mut x = self.raw_solve(b);
        let mut res = f64::INFINITY;
        for _ in 0..4 {
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            res = norm(&r) / bn;
            if !res.is_finite() {
                return Err(Error::Singular("non-finite solution".into()));
            }
            if res <= tol {
                return Ok((x, res));
            }
            let d = self.raw_solve(&r);
            x.iter_mut().zip(&d).for_each(|(x, d)| *x += d);
        }
        let ax = self.matrix.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        res = res.min(norm(&r) / bn);
        if res <= tol {
            Ok((x, res))
        } else {
            Err(Error::NotConverged { residual: res, tol })
        }
    }

    /// Solves for several right-hand sides at once without refinement.
    pub fn solve_many(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        if cols.is_empty() {
            return vec![];
        }
        let n = self.dim();
        let rhs = Mat::<f64>::from_fn(n, cols.len(), |i, j| cols[j][i]);
        let x = self.lu.solve(&rhs);
        (0..cols.len()).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a dense symmetric matrix.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = a.self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::Singular(format!("{e:?}")))?;
    let s = e.S().column_vector();
    let vals: Vec<f64> = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_summed() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn saddle_solve_matches_dense() {
        let k = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 4.0), (1, 1, 3.0), (2, 2, 2.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let c = CsrMatrix::from_triplets(1, 3, vec![(0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0)]);
        let s = saddle_matrix(&k, &c);
        let lu = SparseLu::new(s.clone()).unwrap();
        let b = vec![1.0, 2.0, 3.0, 0.0];
        let (x, res) = lu.solve(&b, 1e-14).unwrap();
        assert!(res <= 1e-14);
        assert!((x[0] + x[1] + x[2]).abs() < 1e-14);
        let r = sub(&s.mul_vec(&x), &b);
        assert!(norm(&r) < 1e-13);
    }
}
