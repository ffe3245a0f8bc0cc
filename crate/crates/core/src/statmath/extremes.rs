use super::normal::{ln_q, phi, q_inv_ln};
use super::quad::integrate;
use crate::error::{Error, Result};

/// Moments of the maximum of `n` i.i.d. standard normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMoments {
    pub n: f64,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Exact order-statistic moments by quadrature of n x phi(x) Phi(x)^(n-1).
/// `n` is a real count so that n = 2^k stays representable for large k.
pub fn max_normal_moments(n: f64) -> Result<MaxMoments> {
    if !(n >= 2.0) || !n.is_finite() {
        return Err(Error::Config(format!(
            "maximum of n = {n} normals is degenerate; need n >= 2"
        )));
    }
    let ln_n = n.ln();
    // Phi(x) = Q(-x)
    let density = move |x: f64| {
        if x < -40.0 {
            return 0.0;
        }
        let ln_f = ln_n + phi(x).ln() + (n - 1.0) * ln_q(-x);
        ln_f.exp()
    };
    let center = q_inv_ln(-ln_n)?;
    let (a, b) = (center - 12.0, center + 12.0);
    let mean = integrate(|x| x * density(x), a, b, 1e-15, 1e-14)?.value;
    let variance = integrate(
        |x| {
            let d = x - mean;
            d * d * density(x)
        },
        a,
        b,
        1e-16,
        1e-13,
    )?
    .value;
    Ok(MaxMoments {
        n,
        mean,
        second_moment: variance + mean * mean,
        variance,
    })
}

/// Convenience for n = 2^k.
pub fn max_normal_moments_pow2(k: u32) -> Result<MaxMoments> {
    max_normal_moments(2f64.powi(k as i32))
}
