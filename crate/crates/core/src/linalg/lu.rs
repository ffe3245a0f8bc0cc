use super::Matrix;
use crate::error::{Error, Result};

/// Largest condition estimate accepted by [`invert`].
pub const MAX_CONDITION: f64 = 1e12;

/// PA = LU with partial pivoting, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Matrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::domain("lu", "matrix is not square"));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, big) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if big == 0.0 || !big.is_finite() {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solves Aᵀ x = b.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        // Aᵀ = Uᵀ Lᵀ P
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(j, i)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(j, i)] * y[j];
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Hager's estimate of ||A^{-1}||_1.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.lu.rows();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.abs()).sum();
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if new_est <= est || zmax <= zx {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        est
    }
}

/// 1-norm condition estimate of a square matrix.
pub fn condition_estimate(a: &Matrix) -> Result<f64> {
    let lu = Lu::new(a)?;
    Ok(a.norm1() * lu.inverse_norm1_estimate())
}

/// Inverse by LU with one step of iterative refinement per column.
/// Matrices with condition estimate above [`MAX_CONDITION`] are rejected.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    let lu = Lu::new(a)?;
    let cond = a.norm1() * lu.inverse_norm1_estimate();
    if !(cond <= MAX_CONDITION) {
        return Err(Error::Singular { condition: cond });
    }
    let n = a.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let mut x = lu.solve(&e);
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = e.iter().zip(&ax).map(|(b, v)| b - v).collect();
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        for i in 0..n {
            inv[(i, j)] = x[i];
        }
    }
    Ok(inv)
}
