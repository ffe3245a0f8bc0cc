use super::Matrix;
use crate::error::{Error, Result};

/// Eigendecomposition A = V diag(values) Vᵀ of a symmetric matrix,
/// eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// V diag(f(λ)) Vᵀ
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let g = f(lam);
            for i in 0..n {
                let vik = self.vectors[(i, k)] * g;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }
}

/// Cyclic Jacobi sweeps.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    if !a.is_symmetric(1e-12 * a.norm1().max(1.0)) {
        return Err(Error::domain("symmetric_eigen", "matrix is not symmetric"));
    }
    if !a.is_finite() {
        return Err(Error::domain("symmetric_eigen", "matrix has non-finite entries"));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
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
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

const PD_FLOOR: f64 = 1e-10;

fn positive_definite_eigen(m: &Matrix) -> Result<SymmetricEigen> {
    let eig = symmetric_eigen(m)?;
    if eig.min_value() <= PD_FLOOR {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: eig.min_value(),
        });
    }
    Ok(eig)
}

/// Symmetric square root M^{1/2}.
pub fn sym_sqrt(m: &Matrix) -> Result<Matrix> {
    Ok(positive_definite_eigen(m)?.map(f64::sqrt))
}

/// Symmetric inverse square root M^{-1/2}.
pub fn sym_inv_sqrt(m: &Matrix) -> Result<Matrix> {
    Ok(positive_definite_eigen(m)?.map(|l| 1.0 / l.sqrt()))
}

/// Square root of a positive semidefinite matrix. Eigenvalues down to
/// `-tol * ||M||` are treated as rounding noise and clamped to zero.
pub fn psd_sqrt(m: &Matrix, tol: f64) -> Result<Matrix> {
    let eig = symmetric_eigen(m)?;
    let floor = -tol * m.norm1().max(1.0);
    if eig.min_value() < floor {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: eig.min_value(),
        });
    }
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}
