use serde::{Deserialize, Serialize};

use super::{sample_gamma, RngStream};
use crate::error::{Error, Result};

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `self · selfᵀ`.
    pub fn mul_transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| {
            self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum()
        })
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        (0..m.dim).map(|i| m.row(i).to_vec()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Lower Cholesky factor `L` with `L·Lᵀ = A + jitter_used·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    lower: Matrix,
    jitter_used: f64,
}

const JITTER_START: f64 = 1e-12;
const JITTER_GROWTH: f64 = 10.0;
const SYMMETRY_TOL: f64 = 1e-10;

impl CholeskyFactor {
    /// Factor of the zero matrix. Sampling with it returns the mean exactly.
    pub fn zero(dim: usize) -> Self {
        Self {
            lower: Matrix::zeros(dim),
            jitter_used: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// `L·v`, exploiting the triangular structure.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower.row(i)[..=i].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Solves `L·x = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        for i in 0..n {
            let row = self.lower.row(i);
            let s: f64 = row[..i].iter().zip(&x).map(|(a, b)| a * b).sum();
            x[i] = (b[i] - s) / row[i];
        }
        x
    }

    /// `ln det(L·Lᵀ)`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.lower[(i, i)].ln()).sum::<f64>()
    }
}

fn try_factor(a: &Matrix, jitter: f64) -> std::result::Result<Matrix, usize> {
    let n = a.dim;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(j);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Cholesky factorization with geometric diagonal jitter.
///
/// A plain factorization is attempted first; on failure the jitter is set
/// to 1e-12 and multiplied by 10 until the factorization succeeds or the
/// jitter would exceed `max_jitter`.
pub fn cholesky(matrix: &Matrix, max_jitter: f64) -> Result<CholeskyFactor> {
    if max_jitter.is_nan() || max_jitter < 0.0 {
        return Err(Error::Parameter(format!(
            "max_jitter must be non-negative, got {max_jitter}"
        )));
    }
    if matrix.dim == 0 {
        return Ok(CholeskyFactor::zero(0));
    }
    let asym = matrix.max_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Parameter(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }
    let mut jitter = 0.0;
    loop {
        match try_factor(matrix, jitter) {
            Ok(lower) => {
                return Ok(CholeskyFactor {
                    lower,
                    jitter_used: jitter,
                })
            }
            Err(pivot) => {
                let next = if jitter == 0.0 {
                    JITTER_START
                } else {
                    jitter * JITTER_GROWTH
                };
                if next > max_jitter * (1.0 + 1e-9) {
                    return Err(Error::NotPositiveDefinite { pivot, max_jitter });
                }
                jitter = next;
            }
        }
    }
}

/// Multivariate normal draw `mean + L·g`.
pub fn sample_mvn(rng: &mut RngStream, mean: &[f64], factor: &CholeskyFactor) -> Result<Vec<f64>> {
    if mean.len() != factor.dim() {
        return Err(Error::DimensionMismatch {
            expected: factor.dim(),
            got: mean.len(),
        });
    }
    let g: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    Ok(factor.mul_vec(&g).iter().zip(mean).map(|(a, m)| m + a).collect())
}

/// Multivariate Student draw `location + L·g·√(dof/S)` with `S ~ χ²(dof)`.
pub fn sample_mvt(rng: &mut RngStream, dof: f64, location: &[f64], scale_factor: &CholeskyFactor) -> Result<Vec<f64>> {
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::Parameter(format!(
            "degrees of freedom must be positive, got {dof}"
        )));
    }
    if location.len() != scale_factor.dim() {
        return Err(Error::DimensionMismatch {
            expected: scale_factor.dim(),
            got: location.len(),
        });
    }
    let g: Vec<f64> = (0..location.len()).map(|_| rng.standard_normal()).collect();
    let s = sample_gamma(rng, dof / 2.0, 0.5)?;
    let w = (dof / s).sqrt();
    Ok(scale_factor
        .mul_vec(&g)
        .iter()
        .zip(location)
        .map(|(a, m)| m + a * w)
        .collect())
}
