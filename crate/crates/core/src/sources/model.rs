use crate::error::{Error, Result};
use crate::linalg::{invert, CorrelationMatrix, Matrix};

use super::law::MarginalLaw;

/// A joint law of (X, Y) with known correlation parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum JointModel {
    /// Standard bivariate normal with correlation `rho`.
    GaussianScalar { rho: f64 },
    /// Scalar X, vector Y with Y = Ρ X + Σ^{1/2} Z and Σ = Σ_Y - ΡΡᵀ.
    GaussianYVec {
        rho: Vec<f64>,
        sigma_y: CorrelationMatrix,
    },
    /// Vector X ~ N(0, Σ_X), scalar Y with Cov(X_ℓ, Y) = ρ_ℓ.
    GaussianXVec {
        rho: Vec<f64>,
        sigma_x: CorrelationMatrix,
    },
    /// Y = ρX + sqrt(1-ρ²) Z with X, Z independent.
    AdditiveNoise {
        rho: f64,
        x_law: MarginalLaw,
        z_law: MarginalLaw,
    },
    /// X uniform on ±1, Y = X flipped with probability `p`; correlation 1 - 2p.
    DoublySymmetricBinary { p: f64 },
    /// Block sums of `m` inner pairs scaled by 1/sqrt(m).
    BlockAveraged { inner: Box<JointModel>, m: usize },
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.abs() <= 1.0) {
        return Err(Error::Model(format!("correlation {rho} is outside [-1, 1]")));
    }
    Ok(())
}

impl JointModel {
    pub fn gaussian_scalar(rho: f64) -> Result<Self> {
        let m = JointModel::GaussianScalar { rho };
        m.validate()?;
        Ok(m)
    }

    /// Y-vector model with conditionally independent noise:
    /// Σ_Y = ΡΡᵀ + diag(1 - ρ_ℓ²).
    pub fn yvec_independent_noise(rho: &[f64]) -> Result<Self> {
        let d = rho.len();
        let mut s = Matrix::outer(rho, rho);
        for i in 0..d {
            s[(i, i)] = 1.0;
        }
        let m = JointModel::GaussianYVec {
            rho: rho.to_vec(),
            sigma_y: CorrelationMatrix::new(s)?,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JointModel::GaussianScalar { rho } => check_rho(*rho),
            JointModel::GaussianYVec { rho, sigma_y } => {
                if rho.is_empty() || rho.len() != sigma_y.dim() {
                    return Err(Error::Model("Ρ length must match Σ_Y".into()));
                }
                rho.iter().try_for_each(|&r| check_rho(r))?;
                let cond = sigma_y
                    .matrix()
                    .sub(&Matrix::outer(rho, rho));
                let eig = crate::linalg::symmetric_eigen(&cond)?;
                if eig.min_value() < -1e-12 {
                    return Err(Error::Model(format!(
                        "Σ_Y - ΡΡᵀ is not positive semidefinite (eigenvalue {:e})",
                        eig.min_value()
                    )));
                }
                Ok(())
            }
            JointModel::GaussianXVec { rho, sigma_x } => {
                if rho.is_empty() || rho.len() != sigma_x.dim() {
                    return Err(Error::Model("Ρ length must match Σ_X".into()));
                }
                rho.iter().try_for_each(|&r| check_rho(r))?;
                let s2 = xvec_sigma2(rho, sigma_x)?;
                if s2 < -1e-12 {
                    return Err(Error::Model(format!(
                        "residual variance 1 - ΡΣ⁻¹Ρᵀ = {s2} is negative"
                    )));
                }
                Ok(())
            }
            JointModel::AdditiveNoise { rho, x_law, z_law } => {
                check_rho(*rho)?;
                x_law.validate()?;
                z_law.validate()
            }
            JointModel::DoublySymmetricBinary { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Model(format!("flip probability {p} outside [0, 1]")));
                }
                Ok(())
            }
            JointModel::BlockAveraged { inner, m } => {
                if *m == 0 {
                    return Err(Error::Model("block size must be at least 1".into()));
                }
                inner.validate()
            }
        }
    }

    /// ρ for scalar models, Ρ for vector models.
    pub fn true_correlations(&self) -> Vec<f64> {
        match self {
            JointModel::GaussianScalar { rho } | JointModel::AdditiveNoise { rho, .. } => {
                vec![*rho]
            }
            JointModel::GaussianYVec { rho, .. } | JointModel::GaussianXVec { rho, .. } => {
                rho.clone()
            }
            JointModel::DoublySymmetricBinary { p } => vec![1.0 - 2.0 * p],
            JointModel::BlockAveraged { inner, .. } => inner.true_correlations(),
        }
    }

    /// (dim X, dim Y).
    pub fn dims(&self) -> (usize, usize) {
        match self {
            JointModel::GaussianYVec { rho, .. } => (1, rho.len()),
            JointModel::GaussianXVec { rho, .. } => (rho.len(), 1),
            JointModel::BlockAveraged { inner, .. } => inner.dims(),
            _ => (1, 1),
        }
    }

    /// Bound on |X| for a single (unaveraged) sample, if the law is bounded.
    pub fn x_support_bound(&self) -> Option<f64> {
        match self {
            JointModel::AdditiveNoise { x_law, .. } => x_law.support_bound(),
            JointModel::DoublySymmetricBinary { .. } => Some(1.0),
            JointModel::BlockAveraged { inner, m } => {
                inner.x_support_bound().map(|b| b * (*m as f64).sqrt())
            }
            _ => None,
        }
    }

    /// True when X is exactly standard normal (block averaging included).
    pub fn x_is_gaussian(&self) -> bool {
        match self {
            JointModel::GaussianScalar { .. }
            | JointModel::GaussianYVec { .. }
            | JointModel::GaussianXVec { .. } => true,
            JointModel::AdditiveNoise { x_law, .. } => *x_law == MarginalLaw::StdNormal,
            JointModel::BlockAveraged { inner, .. } => inner.x_is_gaussian(),
            JointModel::DoublySymmetricBinary { .. } => false,
        }
    }
}

/// σ² = 1 - Ρ Σ_X⁻¹ Ρᵀ, the residual variance of Y given X.
pub fn xvec_sigma2(rho: &[f64], sigma_x: &CorrelationMatrix) -> Result<f64> {
    let inv = invert(sigma_x.matrix())?;
    let u = inv.mul_vec(rho);
    Ok(1.0 - rho.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
}
