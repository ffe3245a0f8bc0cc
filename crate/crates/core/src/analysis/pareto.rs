use std::f64::consts::LN_2;

use crate::error::Result;
use crate::protocol::allocate_bits_pareto;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoTheory {
    /// (1+ρ²) 2^{-e k} with the o(1) dropped
    pub mse_bound: f64,
    /// e = (2/α)(α-2)/(α-1)
    pub exponent: f64,
    /// (1 - ρ² + ρ²Δ² + cρ²)/t² at the allocated t and u
    pub finite_bound: f64,
}

pub fn pareto_exponent(alpha: f64) -> f64 {
    2.0 / alpha * (alpha - 2.0) / (alpha - 1.0)
}

pub fn pareto_theory(alpha: f64, rho: f64, k: f64) -> Result<ParetoTheory> {
    let e = pareto_exponent(alpha);
    let alloc = allocate_bits_pareto(k, alpha)?;
    let r2 = rho * rho;
    let delta = 2f64.powi(-(alloc.k_q as i32)) * (alloc.u - alloc.t);
    let c = 2.0 / ((alpha - 1.0).powi(2) * (alpha - 2.0));
    Ok(ParetoTheory {
        mse_bound: (1.0 + r2) * (-e * k * LN_2).exp(),
        exponent: e,
        finite_bound: (1.0 - r2 + r2 * delta * delta + c * r2) / (alloc.t * alloc.t),
    })
}
