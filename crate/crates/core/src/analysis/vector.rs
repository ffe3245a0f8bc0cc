use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{invert, CorrelationMatrix, Matrix};
use crate::protocol::StoppingSetParams;
use crate::statmath::{inverse_mills, phi, q};

/// A Fisher information matrix with its inverse.
#[derive(Debug, Clone)]
pub struct FisherPair {
    pub fisher: Matrix,
    pub inverse: Matrix,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fisher matrix of Ρ given (X_J, Y_J) for Y = ΡX + Σ^{1/2}Z, Σ = Σ_Y - ΡΡᵀ:
/// Σ⁻¹(E X² + q) + uuᵀ with u = Σ⁻¹Ρ, q = Ρᵀu. The inverse comes from
/// Sherman–Morrison: (Σ - ΡΡᵀ/(E X² + 2q)) / (E X² + q).
pub fn fisher_yvec(rho: &[f64], sigma_y: &CorrelationMatrix, ex2: f64) -> Result<FisherPair> {
    let d = rho.len();
    if d != sigma_y.dim() {
        return Err(Error::Config("Ρ length must match Σ_Y".into()));
    }
    let sigma = sigma_y.matrix().sub(&Matrix::outer(rho, rho));
    let sigma_inv = invert(&sigma)?;
    let u = sigma_inv.mul_vec(rho);
    let qf = dot(rho, &u);
    let fisher = sigma_inv.scale(ex2 + qf).add(&Matrix::outer(&u, &u));
    let inverse = sigma
        .sub(&Matrix::outer(rho, rho).scale(1.0 / (ex2 + 2.0 * qf)))
        .scale(1.0 / (ex2 + qf));
    Ok(FisherPair { fisher, inverse })
}

/// tr Cov of Y_J / s(t) in the Y-vector model:
/// (‖Ρ‖² Var X_J + tr Σ)/s², tr Σ = d - ‖Ρ‖².
pub fn exact_yvec_trace(rho: &[f64], t: f64) -> f64 {
    let s = inverse_mills(t);
    let var_x = 1.0 - s * (s - t);
    let n2 = dot(rho, rho);
    (n2 * var_x + rho.len() as f64 - n2) / (s * s)
}

/// Fisher matrix of Ρ given (W_J, Y_J):
/// (α/σ²)Σ⁻¹ + (2d/σ⁴)Σ⁻¹ΡᵀΡΣ⁻¹, with inverse
/// (σ²/α)(Σ - 2dΡᵀΡ/(ασ² + 2dq)), q = ΡΣ⁻¹Ρᵀ. At the model's own σ² the
/// quadratic form is 1 - σ².
pub fn fisher_xvec(
    rho: &[f64],
    sigma_x: &CorrelationMatrix,
    alpha: f64,
    sigma2: f64,
) -> Result<FisherPair> {
    let d = rho.len();
    if d != sigma_x.dim() {
        return Err(Error::Config("Ρ length must match Σ_X".into()));
    }
    if !(sigma2 > 0.0) || !(alpha > 0.0) {
        return Err(Error::domain("fisher_xvec", "need σ² > 0 and α > 0"));
    }
    let df = d as f64;
    let sigma = sigma_x.matrix();
    let sigma_inv = invert(sigma)?;
    let u = sigma_inv.mul_vec(rho);
    let fisher = sigma_inv
        .scale(alpha / sigma2)
        .add(&Matrix::outer(&u, &u).scale(2.0 * df / (sigma2 * sigma2)));
    let denom = alpha * sigma2 + 2.0 * df * dot(rho, &u);
    let inverse = sigma
        .sub(&Matrix::outer(rho, rho).scale(2.0 * df / denom))
        .scale(sigma2 / alpha);
    Ok(FisherPair { fisher, inverse })
}

/// α = tr E W_J W_Jᵀ / d = 1 + a s(a) + (d-1) E(W² | |W| < b).
pub fn stopping_set_alpha(a: f64, b: f64, d: usize) -> f64 {
    let inner = 1.0 - 2.0 * b * phi(b) / (1.0 - 2.0 * q(b));
    1.0 + a * inverse_mills(a) + (d as f64 - 1.0) * inner
}

/// ((a²+d+1)⁻¹, (a-(d-1)b)⁻²), the outer ends of the bracket
/// lower ≤ 1/α ≤ β ≤ upper.
pub fn stopping_set_bracket(a: f64, b: f64, d: usize) -> Result<(f64, f64)> {
    let df = d as f64;
    let gap = a - (df - 1.0) * b;
    if !(gap > 0.0) {
        return Err(Error::domain("stopping_set_bracket", format!("need a > (d-1)b; a = {a}, b = {b}")));
    }
    Ok((1.0 / (a * a + df + 1.0), 1.0 / (gap * gap)))
}

/// d² min(1-ρ²)/(2k ln 2).
pub fn xvec_bound(rho: &[f64], d: usize, k: f64) -> f64 {
    let m = rho.iter().map(|r| 1.0 - r * r).fold(f64::INFINITY, f64::min);
    (d * d) as f64 * m / (2.0 * k * LN_2)
}

/// First-order sum-variance of d scalar runs with k/d bits each:
/// d Σ(1-ρ²)/(2k ln 2).
pub fn naive_scalar_bound(rho: &[f64], k: f64) -> f64 {
    let s: f64 = rho.iter().map(|r| 1.0 - r * r).sum();
    rho.len() as f64 * s / (2.0 * k * LN_2)
}

/// (2d)⁶ (e^{-a²/2} + 2^{-k_q})
pub fn quantization_loss_bound(a: f64, k_q: f64, d: usize) -> f64 {
    (2.0 * d as f64).powi(6) * ((-0.5 * a * a).exp() + 2f64.powf(-k_q))
}

/// 8 d c² e^{-(c²-a²)/2} + d² (ε₁ + ε₂)², the mean squared Frobenius
/// error of the W quantizer.
pub fn w_quantization_error_bound(p: &StoppingSetParams) -> f64 {
    let d = p.d as f64;
    let c = p.c();
    let levels = 2f64.powi(p.k_q as i32);
    let e1 = 2.0 * (c - p.a) / levels;
    let e2 = 2.0 * p.b / levels;
    8.0 * d * c * c * (-(c * c - p.a * p.a) / 2.0).exp() + d * d * (e1 + e2).powi(2)
}

/// tr M⁻¹ diag(v1, v2) M⁻ᵀ for M = [[a1, b1], [b2, a2]]:
/// ((a2²+b2²) v1 + (a1²+b1²) v2)/(a1 a2 - b1 b2)².
pub fn linear_transform_trace(m: &Matrix, v1: f64, v2: f64) -> Result<f64> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::Config("linear transform baseline is two-dimensional".into()));
    }
    let (a1, b1, b2, a2) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let det = a1 * a2 - b1 * b2;
    if det.abs() < 1e-12 {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    Ok(((a2 * a2 + b2 * b2) * v1 + (a1 * a1 + b1 * b1) * v2) / (det * det))
}
