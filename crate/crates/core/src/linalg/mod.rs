//! Dense linear algebra for dimensions up to a few dozen.

mod eigen;
mod lu;
mod matrix;

pub use eigen::{psd_sqrt, sym_inv_sqrt, sym_sqrt, symmetric_eigen, SymmetricEigen};
pub use lu::{condition_estimate, invert, Lu, MAX_CONDITION};
pub use matrix::Matrix;

use crate::error::{Error, Result};

/// Lower bound on the smallest singular value,
/// min_i |m_ii| - (row_i + col_i off-diagonal absolute sums)/2.
/// Negative values mean the bound says nothing.
pub fn johnson_smin_bound(m: &Matrix) -> f64 {
    assert!(m.is_square(), "johnson_smin_bound needs a square matrix");
    let n = m.rows();
    (0..n)
        .map(|i| {
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].abs()).sum();
            m[(i, i)].abs() - 0.5 * (r + c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest singular value via the eigenvalues of MᵀM.
pub fn smallest_singular_value(m: &Matrix) -> Result<f64> {
    let g = m.transpose().matmul(m);
    Ok(symmetric_eigen(&g)?.min_value().max(0.0).sqrt())
}

/// A validated correlation matrix: symmetric, unit diagonal, positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(Matrix);

impl CorrelationMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::Model("correlation matrix must be square and non-empty".into()));
        }
        if !m.is_symmetric(1e-12) {
            return Err(Error::Model("correlation matrix is not symmetric".into()));
        }
        let n = m.rows();
        for i in 0..n {
            if (m[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Model(format!(
                    "diagonal entry {i} is {}, expected 1",
                    m[(i, i)]
                )));
            }
            for j in 0..n {
                if !(m[(i, j)].abs() <= 1.0) {
                    return Err(Error::Model(format!("entry ({i},{j}) has magnitude above 1")));
                }
            }
        }
        let eig = symmetric_eigen(&m)?;
        if eig.min_value() <= 1e-10 {
            return Err(Error::NotPositiveDefinite {
                eigenvalue: eig.min_value(),
            });
        }
        Ok(CorrelationMatrix(m))
    }

    pub fn identity(d: usize) -> Self {
        CorrelationMatrix(Matrix::identity(d))
    }

    /// Unit diagonal, every off-diagonal entry equal to `r`.
    pub fn equicorrelated(d: usize, r: f64) -> Result<Self> {
        let mut m = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m[(i, j)] = r;
                }
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Matrix::identity(self.dim())
    }
}

impl AsRef<Matrix> for CorrelationMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}
