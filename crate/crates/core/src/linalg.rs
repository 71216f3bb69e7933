//! Dense symmetric matrices, rank-one factor sets and a cyclic Jacobi
//! eigensolver.
//!
//! Everything here is immutable once constructed; all operations are pure.

use crate::error::{check_dim, Error, Result};

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim(cols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// `a bᵀ`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        let data = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect();
        Matrix {
            rows: a.len(),
            cols: b.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Dense real symmetric `dim × dim` matrix.
///
/// Construction symmetrizes the input as `(X + Xᵀ)/2`, so
/// `get(i, j) == get(j, i)` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    values: Vec<f64>,
}

/// Relative asymmetry above which construction logs a warning.
pub const ASYMMETRY_WARN_TOL: f64 = 1e-6;

impl SymmetricMatrix {
    /// Builds from row-major values, symmetrizing.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        check_dim(dim * dim, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut values = values;
        let mut max_asym = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = values[i * dim + j];
                let b = values[j * dim + i];
                max_asym = max_asym.max((a - b).abs());
                let m = 0.5 * (a + b);
                values[i * dim + j] = m;
                values[j * dim + i] = m;
            }
        }
        let m = SymmetricMatrix { dim, values };
        if max_asym > ASYMMETRY_WARN_TOL * m.frobenius_norm() {
            log::warn!(
                "input matrix asymmetric (max |x_ij - x_ji| = {max_asym:e}); symmetrized as (X + X^T)/2"
            );
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut values = Vec::with_capacity(dim * dim);
        for row in rows {
            check_dim(dim, row.len())?;
            values.extend_from_slice(row);
        }
        Self::new(dim, values)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut values = vec![0.0; dim * dim];
        for (i, d) in diag.iter().enumerate() {
            values[i * dim + i] = *d;
        }
        Self::new(dim, values)
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Result<Self> {
        let dim = v.len();
        let mut values = Vec::with_capacity(dim * dim);
        for a in v {
            values.extend(v.iter().map(|b| a * b));
        }
        Self::new(dim, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.dim, self.values.iter().map(|v| v * s).collect())
    }

    /// Simultaneous row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.dim, perm.len())?;
        let n = self.dim;
        let mut values = Vec::with_capacity(n * n);
        for &pi in perm {
            values.extend(perm.iter().map(|&pj| self.get(pi, pj)));
        }
        Self::new(n, values)
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.values.clone(),
        }
    }
}

/// R vectors `a_r` of length `dim` standing for `Σ_r a_r a_rᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    canonical_sign: bool,
}

impl FactorSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("a factor set needs at least one vector"))?;
        if dim == 0 {
            return Err(Error::invalid("factor vectors must have length at least 1"));
        }
        let mut offset = 0;
        for v in &vectors {
            check_dim(dim, v.len())?;
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index: offset + i });
            }
            offset += dim;
        }
        Ok(FactorSet {
            dim,
            vectors,
            canonical_sign: false,
        })
    }

    pub fn zeros(dim: usize, rank: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; dim]; rank])
    }

    /// Columns of an `I × R` matrix become the factor vectors.
    pub fn from_columns(a: &Matrix) -> Result<Self> {
        Self::new((0..a.cols()).map(|j| a.column(j)).collect())
    }

    /// `I × R` matrix with the factor vectors as columns.
    pub fn to_columns(&self) -> Matrix {
        let mut a = Matrix::zeros(self.dim, self.rank());
        for (r, v) in self.vectors.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                a.set(i, r, *x);
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn vector(&self, r: usize) -> &[f64] {
        &self.vectors[r]
    }

    pub fn canonical_sign(&self) -> bool {
        self.canonical_sign
    }

    pub(crate) fn with_canonical_flag(mut self, flag: bool) -> Self {
        self.canonical_sign = flag;
        self
    }

    /// `Σ_r ‖a_r‖_1`.
    pub fn l1_norm(&self) -> f64 {
        self.vectors.iter().flatten().map(|x| x.abs()).sum()
    }

    /// Reorders the factor vectors; the sign flag is kept.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim(self.rank(), perm.len())?;
        let vectors = perm.iter().map(|&p| self.vectors[p].clone()).collect();
        Ok(FactorSet::new(vectors)?.with_canonical_flag(self.canonical_sign))
    }
}

/// Spectral decomposition `X = V diag(λ) Vᵀ`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector paired with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Result<SymmetricMatrix> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = (0..n)
                    .map(|k| v.get(i, k) * self.eigenvalues[k] * v.get(j, k))
                    .sum();
            }
        }
        SymmetricMatrix::new(n, values)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_ij a_ij b_ij`.
pub fn matrix_inner(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(dot(a.as_slice(), b.as_slice()))
}

/// `Σ_ij a_ij b_ij` for general rectangular matrices.
pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> Result<f64> {
    check_dim(a.rows(), b.rows())?;
    check_dim(a.cols(), b.cols())?;
    Ok(dot(a.as_slice(), b.as_slice()))
}

/// `⟨a ⊗ b, u ⊗ v⟩` evaluated as `⟨a, u⟩·⟨b, v⟩`.
pub fn rank_one_inner(a: &[f64], b: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(a.len(), u.len())?;
    check_dim(b.len(), v.len())?;
    Ok(dot(a, u) * dot(b, v))
}

/// `Σ_r a_r a_rᵀ`, positive semidefinite by construction.
pub fn reconstruct(f: &FactorSet) -> SymmetricMatrix {
    let n = f.dim();
    let mut values = vec![0.0; n * n];
    for a in f.vectors() {
        for i in 0..n {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..n {
                values[i * n + j] += ai * a[j];
            }
        }
    }
    // entries are finite and the sum is symmetric term by term
    SymmetricMatrix { dim: n, values }
}

/// `‖X − Σ_r a_r a_rᵀ‖_F`.
pub fn frobenius_residual(x: &SymmetricMatrix, f: &FactorSet) -> Result<f64> {
    Ok(squared_residual(x, f)?.sqrt())
}

pub(crate) fn squared_residual(x: &SymmetricMatrix, f: &FactorSet) -> Result<f64> {
    check_dim(x.dim(), f.dim())?;
    let m = reconstruct(f);
    Ok(x.as_slice()
        .iter()
        .zip(m.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Sweep cap for [`symmetric_eig`].
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Target off-diagonal norm relative to `‖X‖_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order; equal eigenvalues keep the
/// order of the diagonal positions they converged to.
pub fn symmetric_eig(x: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = x.dim();
    let mut a = x.to_matrix();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let target = JACOBI_REL_TOL * x.frobenius_norm();

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps,
                off_norm: off,
                target,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }

    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep index order
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors.set(k, col, v.get(k, src));
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}
