use crate::error::{Error, Result};
use crate::statmath::{geometric_entropy_ln, inverse_mills};

/// Exact behaviour of the block-averaged threshold estimator on the doubly
/// symmetric binary source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryBlockTheory {
    pub mse: f64,
    pub bias: f64,
    /// Pr(X̄ > t)
    pub crossing_probability: f64,
    /// h_g of the crossing probability
    pub bits: f64,
}

/// Given B of the m X-entries equal to +1, Ȳ√m is a sum of independent ±1
/// with mean (2B - m)ρ and variance m(1 - ρ²), so
/// MSE = (1-ρ²)/s² + ρ² E[(X̄/s - 1)² | X̄ > t], summed over the binomial tail.
pub fn clt_binary_exact(flip: f64, m: usize, t: f64) -> Result<BinaryBlockTheory> {
    if m == 0 || !(0.0..=1.0).contains(&flip) {
        return Err(Error::Config("need m >= 1 and flip in [0, 1]".into()));
    }
    let rho = 1.0 - 2.0 * flip;
    let mf = m as f64;
    let root = mf.sqrt();
    let s = inverse_mills(t);
    let lg = |n: f64| libm::lgamma(n + 1.0);
    let mut ln_terms = Vec::new();
    for b in 0..=m {
        let x = (2.0 * b as f64 - mf) / root;
        if x > t {
            let lp = lg(mf) - lg(b as f64) - lg((m - b) as f64) - mf * std::f64::consts::LN_2;
            ln_terms.push((lp, x));
        }
    }
    if ln_terms.is_empty() {
        return Err(Error::Config(format!(
            "block mean of {m} binary samples never exceeds t = {t}"
        )));
    }
    let top = ln_terms.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut e1, mut e2) = (0.0, 0.0, 0.0);
    for &(lp, x) in &ln_terms {
        let w = (lp - top).exp();
        let r = x / s - 1.0;
        z += w;
        e1 += w * r;
        e2 += w * r * r;
    }
    let ln_p = top + z.ln();
    Ok(BinaryBlockTheory {
        mse: (1.0 - rho * rho) / (s * s) + rho * rho * e2 / z,
        bias: rho * e1 / z,
        crossing_probability: ln_p.exp(),
        bits: geometric_entropy_ln(ln_p),
    })
}
