//! Base kernels, the structure-preserving symmetric graph kernel (SSGK) and
//! Gram-matrix assembly.
//!
//! For two graphs given by factor sets `{x_p}` and `{y_q}`,
//!
//! ```text
//! κ(X, Y) = Σ_p Σ_q k(x_p, y_q)²
//! ```
//!
//! which is the inner product of `Σ φ(x_p)⊗φ(x_p)` and `Σ φ(y_q)⊗φ(y_q)` in
//! the feature space of the base kernel `k`, hence positive semidefinite.
//! The factor sets may have different ranks; each sum runs over its own.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{symmetric_eig, FactorSet, Matrix, SymmetricMatrix};
use crate::textio::{push_row, write_file, Lines};

/// A positive definite kernel on real vectors.
pub trait BaseKernel: Sync {
    /// Callers guarantee equal lengths.
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
}

/// Gaussian RBF kernel `exp(−γ‖x − y‖²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfParams {
    gamma: f64,
}

impl RbfParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(RbfParams { gamma })
        } else {
            Err(Error::invalid(format!(
                "RBF gamma must be finite and positive, got {gamma}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl BaseKernel for RbfParams {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-self.gamma * d2).exp()
    }
}

pub fn rbf(x: &[f64], y: &[f64], p: &RbfParams) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    Ok(p.eval(x, y))
}

/// SSGK with an arbitrary base kernel.
pub fn ssgk_with<K: BaseKernel + ?Sized>(fx: &FactorSet, fy: &FactorSet, k: &K) -> Result<f64> {
    check_dim(fx.dim(), fy.dim())?;
    Ok(ssgk_unchecked(fx, fy, k))
}

/// Lexicographic order on the flattened factor vectors.
fn factor_order(a: &FactorSet, b: &FactorSet) -> std::cmp::Ordering {
    a.rank().cmp(&b.rank()).then_with(|| {
        a.vectors()
            .iter()
            .flatten()
            .zip(b.vectors().iter().flatten())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn ssgk_unchecked<K: BaseKernel + ?Sized>(fx: &FactorSet, fy: &FactorSet, k: &K) -> f64 {
    // fixed argument order makes κ(X, Y) and κ(Y, X) bit-identical
    let (fx, fy) = if factor_order(fx, fy).is_gt() {
        (fy, fx)
    } else {
        (fx, fy)
    };
    let mut total = 0.0;
    for xp in fx.vectors() {
        for yq in fy.vectors() {
            let v = k.eval(xp, yq);
            total += v * v;
        }
    }
    total
}

/// SSGK with the RBF base kernel.
pub fn ssgk(fx: &FactorSet, fy: &FactorSet, p: &RbfParams) -> Result<f64> {
    ssgk_with(fx, fy, p)
}

/// Square kernel matrix over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Matrix,
    row_ids: Vec<String>,
}

impl GramMatrix {
    /// Validates symmetry (1e-12), finiteness and a non-negative diagonal.
    pub fn new(values: Matrix, row_ids: Vec<String>) -> Result<Self> {
        let n = values.rows();
        check_dim(n, values.cols())?;
        check_dim(n, row_ids.len())?;
        if let Some(index) = values.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        for i in 0..n {
            if values.get(i, i) < 0.0 {
                return Err(Error::invalid(format!(
                    "Gram diagonal entry {i} is negative ({})",
                    values.get(i, i)
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (values.get(i, j), values.get(j, i));
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid(format!(
                        "Gram matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(GramMatrix { values, row_ids })
    }

    /// Row ids default to the decimal row index.
    pub fn from_matrix(values: Matrix) -> Result<Self> {
        let ids = (0..values.rows()).map(|i| i.to_string()).collect();
        Self::new(values, ids)
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn with_row_ids(self, row_ids: Vec<String>) -> Result<Self> {
        Self::new(self.values, row_ids)
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> GramMatrix {
        let m = indices.len();
        let mut values = Matrix::zeros(m, m);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                values.set(a, b, self.values.get(i, j));
            }
        }
        GramMatrix {
            values,
            row_ids: indices.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    /// Rectangular block `rows × cols`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.values.get(i, j));
            }
        }
        out
    }

    /// Every entry multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let mut values = self.values.clone();
        for v in values.as_mut_slice() {
            *v *= s;
        }
        Self::new(values, self.row_ids.clone())
    }

    /// `G_ij / sqrt(G_ii G_jj)`; rows with a zero diagonal are left as is.
    pub fn normalized(&self) -> GramMatrix {
        let n = self.n();
        let d: Vec<f64> = (0..n).map(|i| self.values.get(i, i).sqrt()).collect();
        let mut values = self.values.clone();
        for i in 0..n {
            for j in 0..n {
                if d[i] > 0.0 && d[j] > 0.0 {
                    values.set(i, j, self.values.get(i, j) / (d[i] * d[j]));
                }
            }
        }
        GramMatrix {
            values,
            row_ids: self.row_ids.clone(),
        }
    }

    pub fn to_symmetric(&self) -> Result<SymmetricMatrix> {
        SymmetricMatrix::new(self.n(), self.values.as_slice().to_vec())
    }

    /// Text form: `n`, then `n` rows of `n` values.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for i in 0..self.n() {
            push_row(&mut out, self.values.row(i));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_text())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut lines = Lines::open(path)?;
        let (line, toks) = lines.next_tokens("header 'n'")?;
        if toks.len() != 1 {
            return Err(lines.err(line, "Gram header must be a single count 'n'"));
        }
        let n = lines.parse_usize(line, &toks[0], "sample count")?;
        let data = lines.read_block(n, n, "Gram row")?;
        lines.expect_end()?;
        Self::from_matrix(Matrix::from_row_major(n, n, data)?)
            .map_err(|e| e.context(path.display().to_string()))
    }
}

fn gram_from_fn(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> Matrix {
    // each unordered pair evaluated once; rows gathered by index
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| entry(i, j)).collect())
        .collect();
    let mut m = Matrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            m.set(i, i + off, *v);
            m.set(i + off, i, *v);
        }
    }
    m
}

fn check_common_dim(dims: impl Iterator<Item = usize>) -> Result<Option<usize>> {
    let mut first = None;
    for (i, d) in dims.enumerate() {
        match first {
            None => first = Some(d),
            Some(f) if f != d => {
                return Err(Error::DimensionMismatch {
                    expected: f,
                    found: d,
                }
                .context(format!("sample {i}")))
            }
            _ => {}
        }
    }
    Ok(first)
}

/// Gram matrix of SSGK values over `factors` with base kernel `k`.
pub fn build_gram_with<K: BaseKernel + ?Sized>(factors: &[FactorSet], k: &K) -> Result<GramMatrix> {
    check_common_dim(factors.iter().map(FactorSet::dim))?;
    let m = gram_from_fn(factors.len(), |i, j| {
        ssgk_unchecked(&factors[i], &factors[j], k)
    });
    GramMatrix::from_matrix(m)
}

pub fn build_gram(factors: &[FactorSet], p: &RbfParams) -> Result<GramMatrix> {
    build_gram_with(factors, p)
}

/// `M[i][j] = κ(test_i, train_j)`.
pub fn build_cross_gram(test: &[FactorSet], train: &[FactorSet], p: &RbfParams) -> Result<Matrix> {
    check_common_dim(test.iter().chain(train).map(FactorSet::dim))?;
    let rows: Vec<Vec<f64>> = test
        .par_iter()
        .map(|t| train.iter().map(|s| ssgk_unchecked(t, s, p)).collect())
        .collect();
    cross_from_rows(rows, train.len())
}

fn cross_from_rows(rows: Vec<Vec<f64>>, cols: usize) -> Result<Matrix> {
    let r = rows.len();
    Matrix::from_row_major(r, cols, rows.into_iter().flatten().collect())
}

/// Cross-kernel rows normalized with the self-kernel values of both sides.
pub fn normalize_cross(cross: &Matrix, test_diag: &[f64], train_diag: &[f64]) -> Result<Matrix> {
    check_dim(cross.rows(), test_diag.len())?;
    check_dim(cross.cols(), train_diag.len())?;
    let mut out = cross.clone();
    for (i, &ti) in test_diag.iter().enumerate() {
        for (j, &tj) in train_diag.iter().enumerate() {
            let d = (ti * tj).sqrt();
            if d > 0.0 {
                out.set(i, j, cross.get(i, j) / d);
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue and PSD verdict for a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub is_psd: bool,
}

/// `is_psd ⇔ min_eig ≥ −tol·max(1, max_eig)`.
pub fn psd_report(g: &GramMatrix, tol: f64) -> Result<PsdReport> {
    let eig = symmetric_eig(&g.to_symmetric()?)?;
    let (min_eig, max_eig) = (eig.min(), eig.max());
    Ok(PsdReport {
        min_eig,
        max_eig,
        is_psd: min_eig >= -tol * max_eig.max(1.0),
    })
}

/// RBF Gram matrix over plain feature vectors.
pub fn vector_gram(features: &[Vec<f64>], p: &RbfParams) -> Result<GramMatrix> {
    check_common_dim(features.iter().map(Vec::len))?;
    let m = gram_from_fn(features.len(), |i, j| p.eval(&features[i], &features[j]));
    GramMatrix::from_matrix(m)
}

/// RBF cross-kernel between two feature-vector sets.
pub fn vector_cross_gram(test: &[Vec<f64>], train: &[Vec<f64>], p: &RbfParams) -> Result<Matrix> {
    check_common_dim(test.iter().chain(train).map(Vec::len))?;
    let rows: Vec<Vec<f64>> = test
        .par_iter()
        .map(|t| train.iter().map(|s| p.eval(t, s)).collect())
        .collect();
    cross_from_rows(rows, train.len())
}
