use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

// Above this argument the tail is taken from the Mills-ratio continued fraction;
// erfc keeps full relative accuracy below it.
const CF_FROM: f64 = 10.0;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Mills ratio Q(x)/phi(x) for x > 0, Lentz evaluation of
/// 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
fn mills_ratio(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..1000 {
        let a = n as f64;
        d = x + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Upper tail of the standard normal, Q(x) = Pr(Z > x).
pub fn q(x: f64) -> f64 {
    if x >= CF_FROM {
        phi(x) * mills_ratio(x)
    } else if x <= -CF_FROM {
        1.0 - phi(x) * mills_ratio(-x)
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// ln Q(x), finite far beyond the point where Q itself underflows.
pub fn ln_q(x: f64) -> f64 {
    if x >= CF_FROM {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    } else if x < 0.0 {
        (-q(-x)).ln_1p()
    } else {
        q(x).ln()
    }
}

/// Inverse Mills ratio s(t) = phi(t)/Q(t) = E(Z | Z > t).
pub fn inverse_mills(t: f64) -> f64 {
    if t >= CF_FROM {
        1.0 / mills_ratio(t)
    } else {
        phi(t) / q(t)
    }
}

/// Inverse of the upper tail: the x with Q(x) = p.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("q_inv", format!("p = {p} is outside (0, 1)")));
    }
    if p > 0.5 {
        return Ok(-upper_root((1.0 - p).ln()));
    }
    Ok(upper_root(p.ln()))
}

/// Q_inv taking ln p, for crossing probabilities far below f64 range.
pub fn q_inv_ln(ln_p: f64) -> Result<f64> {
    if !(ln_p < 0.0) || ln_p.is_infinite() {
        return Err(Error::domain("q_inv_ln", format!("ln p = {ln_p} is not in (-inf, 0)")));
    }
    if ln_p > -LN_2 {
        let ln_comp = (-ln_p.exp_m1()).ln();
        return Ok(-upper_root(ln_comp));
    }
    Ok(upper_root(ln_p))
}

// Acklam's rational approximation, used only as a starting point.
fn acklam_guess(ln_p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    if ln_p < (0.02425f64).ln() {
        let u = (-2.0 * ln_p).sqrt();
        let num = ((((C[0] * u + C[1]) * u + C[2]) * u + C[3]) * u + C[4]) * u + C[5];
        let den = (((D[0] * u + D[1]) * u + D[2]) * u + D[3]) * u + 1.0;
        -num / den
    } else {
        let r = ln_p.exp() - 0.5;
        let r2 = r * r;
        let num = (((((A[0] * r2 + A[1]) * r2 + A[2]) * r2 + A[3]) * r2 + A[4]) * r2 + A[5]) * r;
        let den = ((((B[0] * r2 + B[1]) * r2 + B[2]) * r2 + B[3]) * r2 + B[4]) * r2 + 1.0;
        -num / den
    }
}

// Root of ln Q(x) = ln_p for p <= 1/2. Bracket [0, sqrt(-2 ln p)] from the
// Chernoff bound Q(x) <= exp(-x^2/2)/2; Newton steps that leave it are
// replaced by bisection.
fn upper_root(ln_p: f64) -> f64 {
    if ln_p >= -LN_2 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = (-2.0 * ln_p).sqrt();
    let mut x = acklam_guess(ln_p);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let f = ln_q(x) - ln_p;
        if f == 0.0 {
            return x;
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x + f / inverse_mills(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 1e-15 * x.max(1.0) || hi - lo <= 1e-15 * x.max(1.0) {
            break;
        }
    }
    x
}

/// Moments of Z conditioned on Z > t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdMoments {
    pub t: f64,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

pub fn truncated_normal_moments(t: f64) -> ThresholdMoments {
    let s = inverse_mills(t);
    ThresholdMoments {
        t,
        mean: s,
        second_moment: 1.0 + t * s,
        variance: 1.0 - s * (s - t),
    }
}
