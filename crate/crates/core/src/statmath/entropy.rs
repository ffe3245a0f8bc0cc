use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Geometric entropy h_g(p) = h(p)/p in bits: the entropy of the index of
/// the first success in Bernoulli(p) trials.
pub fn geometric_entropy(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(
            "geometric_entropy",
            format!("p = {p} is outside (0, 1]"),
        ));
    }
    Ok(geometric_entropy_ln(p.ln()))
}

/// h_g evaluated from ln p. Stays finite when p underflows.
pub fn geometric_entropy_ln(ln_p: f64) -> f64 {
    let p = ln_p.exp();
    let comp = -ln_p.exp_m1();
    // ((1-p)/p) * (-ln(1-p)); tends to 1 as p -> 0 and to 0 as p -> 1
    let tail = if comp == 0.0 {
        0.0
    } else if p < 0.5 {
        if p == 0.0 {
            1.0
        } else {
            comp * -(-p).ln_1p() / p
        }
    } else {
        comp * -comp.ln() / p
    };
    (-ln_p + tail) / LN_2
}

// d h_g / d(ln p) = ln(1-p) / (p ln 2)
fn slope_ln(ln_p: f64) -> f64 {
    let p = ln_p.exp();
    let r = if p == 0.0 {
        -1.0
    } else if p < 0.5 {
        (-p).ln_1p() / p
    } else {
        (-ln_p.exp_m1()).ln() / p
    };
    r / LN_2
}

/// ln of the p with h_g(p) = k. h_g is strictly decreasing on (0, 1), so
/// every k > 0 has exactly one solution.
pub fn geometric_entropy_inv_ln(k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(
            "geometric_entropy_inv",
            format!("k = {k} bits has no solution; need finite k > 0"),
        ));
    }
    // -log2 p <= h_g(p) <= -log2 p + log2 e
    let (mut lo, mut hi) = if k >= 2.0 {
        (-k * LN_2, (-k * LN_2 + 1.0).min(-LN_2))
    } else {
        (-LN_2, 0.0)
    };
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = geometric_entropy_ln(y) - k;
        if g == 0.0 {
            return Ok(y);
        }
        // decreasing in y
        if g > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let mut next = y - g / slope_ln(y);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - y).abs();
        y = next;
        if moved <= 1e-15 * y.abs().max(1.0) || hi - lo <= 1e-15 * y.abs().max(1.0) {
            break;
        }
    }
    Ok(y)
}

/// The p with h_g(p) = k. Fails when p underflows f64 (k beyond ~1070 bits);
/// use [`geometric_entropy_inv_ln`] there.
pub fn geometric_entropy_inv(k: f64) -> Result<f64> {
    let ln_p = geometric_entropy_inv_ln(k)?;
    let p = ln_p.exp();
    if p == 0.0 || !p.is_normal() {
        return Err(Error::domain(
            "geometric_entropy_inv",
            format!("p for k = {k} underflows; use the log-domain inverse"),
        ));
    }
    Ok(p)
}
