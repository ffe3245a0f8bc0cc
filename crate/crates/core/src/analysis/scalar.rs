use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::sources::MarginalLaw;
use crate::statmath::{
    geometric_entropy_inv_ln, inverse_mills, max_normal_moments_pow2, q_inv_ln,
    truncated_normal_moments,
};

/// Reference variance (R/k)(1 + ρ² + (1-ρ²)/(2^{2R} - 1)) at rate R bits
/// per sample, without its o(1) term.
pub fn zhang_berger_variance(rho: f64, k: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) || !(k > 0.0) {
        return Err(Error::domain("zhang_berger_variance", "rate and k must be positive"));
    }
    let r2 = rho * rho;
    Ok(rate / k * (1.0 + r2 + (1.0 - r2) / (2.0 * rate * LN_2).exp_m1()))
}

/// Zero-rate limit (1-ρ²)/(2k ln 2).
pub fn zhang_berger_optimal(rho: f64, k: f64) -> f64 {
    (1.0 - rho * rho) / (2.0 * k * LN_2)
}

/// Same expression viewed as the first-order variance of the scalar schemes.
pub fn asymptotic_scalar_variance(rho: f64, k: f64) -> f64 {
    zhang_berger_optimal(rho, k)
}

/// Fisher information about ρ in (x, Y) with Y | x ~ N(ρx, 1-ρ²).
pub fn fisher_scalar_given_x(rho: f64, x: f64) -> f64 {
    fisher_from_second_moment(rho, x * x)
}

/// ((1-ρ²) E X² + 2ρ²)/(1-ρ²)²
pub fn fisher_from_second_moment(rho: f64, ex2: f64) -> f64 {
    let c = 1.0 - rho * rho;
    (c * ex2 + 2.0 * rho * rho) / (c * c)
}

pub fn fisher_threshold(rho: f64, t: f64) -> f64 {
    fisher_from_second_moment(rho, truncated_normal_moments(t).second_moment)
}

pub fn fisher_max(rho: f64, k: u32) -> Result<f64> {
    Ok(fisher_from_second_moment(rho, max_normal_moments_pow2(k)?.second_moment))
}

/// Threshold t for a k-bit index: Q(t) = h_g⁻¹(k).
pub fn threshold_for_bits(k: f64) -> Result<f64> {
    q_inv_ln(geometric_entropy_inv_ln(k)?)
}

/// Variance of Y_J/s(t): (1 - ρ²(s - t)s)/s².
pub fn exact_threshold_variance(rho: f64, t: f64) -> f64 {
    let s = inverse_mills(t);
    (1.0 - rho * rho * (s - t) * s) / (s * s)
}

/// Variance of ρ̂ = Y_J / E X_J given the moments of the selected X:
/// (ρ² Var X_J + 1 - ρ²)/(E X_J)².
pub fn selected_sample_variance(rho: f64, mean: f64, var: f64) -> f64 {
    let r2 = rho * rho;
    (r2 * var + 1.0 - r2) / (mean * mean)
}

pub fn exact_max_variance(rho: f64, k: u32) -> Result<f64> {
    let m = max_normal_moments_pow2(k)?;
    Ok(selected_sample_variance(rho, m.mean, m.variance))
}

/// Additive-noise threshold variance with the law's conditional moments.
pub fn additive_exact(law: MarginalLaw, rho: f64, t: f64) -> Result<f64> {
    let (mean, var) = law.conditional_moments(t)?;
    Ok(selected_sample_variance(rho, mean, var))
}

/// Threshold for a k-bit index under an arbitrary continuous law.
pub fn law_threshold_for_bits(law: MarginalLaw, k: f64) -> Result<f64> {
    law.inverse_survival_ln(geometric_entropy_inv_ln(k)?)
}

/// Asymptotic Laplace variance (2 - ρ²)/((ln 2)² k²).
pub fn laplace_theory(rho: f64, k: f64) -> f64 {
    (2.0 - rho * rho) / (LN_2 * LN_2 * k * k)
}

/// Variance floor of the unquantized threshold estimator on Pareto data.
pub fn pareto_unquantized_floor(alpha: f64, rho: f64) -> f64 {
    rho * rho / (alpha * (alpha - 2.0))
}

/// (Gaussianized variance p(1-p)/(2k ln 2), naive variance p(1-p)/k) for the
/// flip probability of the binary example.
pub fn binary_example_theory(p: f64, k: f64) -> (f64, f64) {
    let v = p * (1.0 - p);
    (v / (2.0 * k * LN_2), v / k)
}
