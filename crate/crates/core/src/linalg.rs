//! Dense symmetric matrices and their eigendecomposition by cyclic Jacobi rotations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
const UNIT_DRIFT_TOL: f64 = 1e-12;

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        Self { dim: d, data }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_dim(self.dim, other.dim)?;
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(DenseMatrix { dim: d, data })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.data.chunks_exact(self.dim).map(|row| dot(row, x)).collect())
    }

    /// `Mᵀ x`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = vec![0.0; self.dim];
        for (row, &xi) in self.data.chunks_exact(self.dim).zip(x) {
            for (o, &m) in out.iter_mut().zip(row) {
                *o += m * xi;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Real symmetric `d × d` matrix.
///
/// Construction symmetrizes the input as `(M + Mᵀ) / 2`; the quadratic form
/// `xᵀMx` only sees the symmetric part, so nothing is lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    inner: DenseMatrix,
}

impl SymmetricMatrix {
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        let mut inner = DenseMatrix::from_row_major(dim, data)?;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = inner.data[i * dim + j];
                let b = inner.data[j * dim + i];
                if a != b {
                    let s = 0.5 * (a + b);
                    inner.data[i * dim + j] = s;
                    inner.data[j * dim + i] = s;
                }
            }
        }
        Ok(Self { inner })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        let mut data = vec![0.0; d * d];
        for (i, &v) in diag.iter().enumerate() {
            data[i * d + i] = v;
        }
        Self::from_row_major(d, data)
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DenseMatrix::identity(dim) }
    }

    /// `U · diag(values) · Uᵀ`.
    pub fn from_spectrum(basis: &DenseMatrix, values: &[f64]) -> Result<Self> {
        let d = basis.dim();
        check_dim(d, values.len())?;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let s: f64 = (0..d).map(|k| basis.get(i, k) * values[k] * basis.get(j, k)).sum();
                data[i * d + j] = s;
                data[j * d + i] = s;
            }
        }
        Self::from_row_major(d, data)
    }

    /// True when `data` (row-major) already equals its transpose.
    pub fn is_exactly_symmetric(dim: usize, data: &[f64]) -> bool {
        (0..dim).all(|i| ((i + 1)..dim).all(|j| data[i * dim + j] == data[j * dim + i]))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner.get(row, col)
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.data.chunks_exact(self.dim()).map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        for i in 0..d {
            out.inner.data[i * d + i] += c;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.inner.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `U · self · Uᵀ`.
    pub fn conjugate(&self, u: &DenseMatrix) -> Result<Self> {
        let prod = u.matmul(&self.inner)?.matmul(&u.transpose())?;
        Self::from_row_major(prod.dim, prod.data)
    }
}

/// Eigenvectors (as columns of `vectors`) and ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

impl EigenDecomposition {
    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn reconstruct(&self) -> Result<SymmetricMatrix> {
        SymmetricMatrix::from_spectrum(&self.vectors, &self.values)
    }
}

/// Diagonalizes `a` with cyclic Jacobi sweeps.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls to `1e-13 · ‖A‖_F`.
/// Eigenvalues come back ascending with ties kept in their original index order,
/// and the eigenvector columns are permuted to match.
pub fn eigendecompose(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let d = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut v = DenseMatrix::identity(d);
    let tol = JACOBI_REL_TOL * a.frobenius_norm();

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                s += m[p * d + q] * m[p * d + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                m[p * d + q] = 0.0;
                m[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v.data[k * d + p];
                    let vkq = v.data[k * d + q];
                    v.data[k * d + p] = c * vkp - s * vkq;
                    v.data[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_norm(&m) > tol {
        return Err(Error::NoConvergence("Jacobi eigenvalue iteration"));
    }

    let mut order: Vec<usize> = (0..d).collect();
    // stable sort keeps equal eigenvalues in index order
    order.sort_by(|&i, &j| m[i * d + i].total_cmp(&m[j * d + j]));

    let values = order.iter().map(|&i| m[i * d + i]).collect();
    let mut data = vec![0.0; d * d];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..d {
            data[r * d + new_col] = v.data[r * d + old_col];
        }
    }
    Ok(EigenDecomposition { vectors: DenseMatrix { dim: d, data }, values })
}

/// `xᵀ M x`.
pub fn quadratic_form(m: &SymmetricMatrix, x: &[f64]) -> Result<f64> {
    check_dim(m.dim(), x.len())?;
    Ok(m.as_slice().chunks_exact(m.dim()).zip(x).map(|(row, &xi)| xi * dot(row, x)).sum())
}

/// `xᵀ diag(d) x`.
pub fn quadratic_form_diag(diag: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(diag.len(), x.len())?;
    Ok(diag.iter().zip(x).map(|(d, xi)| d * xi * xi).sum())
}

/// Maps `z` to `V z`, renormalizing if the result drifted off the sphere.
pub fn rotate(v: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.mul_vec(z)?;
    let norm = norm2(&out);
    if (norm - 1.0).abs() > UNIT_DRIFT_TOL && norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(out)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
