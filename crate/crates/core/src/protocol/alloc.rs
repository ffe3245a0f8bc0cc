use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::sources::MarginalLaw;
use crate::statmath::{geometric_entropy_inv_ln, geometric_entropy_ln, ln_q, q, q_inv_ln};

/// Thresholds and bit split of the stopping-set scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingSetParams {
    pub a: f64,
    pub b: f64,
    pub d: usize,
    /// expected bits per index
    pub k_l: f64,
    /// bits per quantized entry of W
    pub k_q: u32,
}

impl StoppingSetParams {
    /// Parameters from the thresholds; k_l follows from the crossing
    /// probability.
    pub fn from_thresholds(a: f64, b: f64, d: usize, k_q: u32) -> Result<Self> {
        let mut p = StoppingSetParams {
            a,
            b,
            d,
            k_l: 0.0,
            k_q,
        };
        p.validate()?;
        p.k_l = geometric_entropy_ln(p.ln_crossing_probability());
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, d) = (self.a, self.b, self.d as f64);
        if self.d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(b > 0.0) || !(a > 0.0) {
            return Err(Error::Config(format!("thresholds a = {a}, b = {b} must be positive")));
        }
        if !(a > d * (b + 1.0)) {
            return Err(Error::Config(format!(
                "need a > d(b+1) = {}; got a = {a}",
                d * (b + 1.0)
            )));
        }
        if !(a > (d - 1.0) * b) {
            return Err(Error::Config(format!("need a > (d-1)b; got a = {a}")));
        }
        if self.k_q == 0 {
            return Err(Error::Config("k_q must be at least 1 bit".into()));
        }
        Ok(())
    }

    /// ln of 2Q(a)(1-2Q(b))^(d-1).
    pub fn ln_crossing_probability(&self) -> f64 {
        LN_2 + ln_q(self.a) + (self.d as f64 - 1.0) * (1.0 - 2.0 * q(self.b)).ln()
    }

    pub fn crossing_probability(&self) -> f64 {
        self.ln_crossing_probability().exp()
    }

    /// Diagonal clamp c = √3 a.
    pub fn c(&self) -> f64 {
        3f64.sqrt() * self.a
    }

    pub fn budget(&self) -> f64 {
        let d = self.d as f64;
        d * self.k_l + d * d * self.k_q as f64
    }
}

fn try_allocate_xvec(k: f64, d: usize, b0: f64) -> Result<StoppingSetParams> {
    let df = d as f64;
    let k_l0 = ((k + 1.0).sqrt() - 1.0).powi(2) / df;
    let k_q = ((4.0 * k_l0 / df.powi(3)).sqrt().floor() as u32).max(1);
    let k_l = (k - df * df * k_q as f64) / df;
    if !(k_l > 0.0) {
        return Err(Error::Config(format!("budget {k} leaves no bits for the indices")));
    }
    let ln_p = geometric_entropy_inv_ln(k_l)?;
    let ln_weak = (df - 1.0) * (1.0 - 2.0 * q(b0)).ln();
    let ln_tail = ln_p - LN_2 - ln_weak;
    if !(ln_tail < -LN_2) {
        return Err(Error::Config(format!("budget {k} too small for a positive threshold")));
    }
    let a = q_inv_ln(ln_tail)?;
    let p = StoppingSetParams {
        a,
        b: b0,
        d,
        k_l,
        k_q,
    };
    p.validate()?;
    Ok(p)
}

/// Bit split and thresholds for total budget `k`.
///
/// k_q = floor(sqrt(4 k_l⁰ / d³)) with k_l⁰ = (sqrt(k+1) - 1)²/d, at least 1;
/// the rest goes to the indices, so d k_l + d² k_q = k exactly.
pub fn allocate_bits_xvec(k: f64, d: usize, b0: f64) -> Result<StoppingSetParams> {
    if d == 0 || !(b0 > 0.0) || !k.is_finite() {
        return Err(Error::Config(format!("bad allocation request k = {k}, d = {d}, b0 = {b0}")));
    }
    match try_allocate_xvec(k, d, b0) {
        Ok(p) => Ok(p),
        Err(e) => {
            let min = minimal_feasible_k(d, b0);
            Err(Error::Config(format!(
                "{e}; smallest feasible budget for d = {d}, b0 = {b0} is k = {min}"
            )))
        }
    }
}

fn minimal_feasible_k(d: usize, b0: f64) -> f64 {
    let feasible = |k: f64| try_allocate_xvec(k, d, b0).is_ok();
    let mut hi = 8.0;
    while !feasible(hi) {
        hi *= 2.0;
        if hi > 1e7 {
            return f64::INFINITY;
        }
    }
    // feasibility is not monotone at k_q steps, so scan down from hi
    let mut best = hi;
    let mut k = hi;
    while k >= 1.0 {
        if feasible(k) {
            best = k;
        }
        k -= 1.0;
    }
    best
}

/// Bit split for the quantized Pareto scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoAllocation {
    pub k_l: f64,
    pub k_q: u32,
    pub t: f64,
    pub u: f64,
}

/// k_q = floor(k/(α-1)), k_l = k - k_q, t from h_g(Pr(X > t)) = k_l,
/// u = t^(α/(α-2)).
pub fn allocate_bits_pareto(k: f64, alpha: f64) -> Result<ParetoAllocation> {
    if !(alpha > 2.0) {
        return Err(Error::Config(format!("Pareto index {alpha} must exceed 2")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Config(format!("budget {k} must be positive")));
    }
    let k_q = (k / (alpha - 1.0)).floor() as u32;
    let k_l = k - k_q as f64;
    let ln_p = geometric_entropy_inv_ln(k_l)?;
    let law = MarginalLaw::ParetoTwoSided { alpha };
    if !(ln_p < -LN_2) {
        return Err(Error::Config(format!("budget {k} puts the threshold inside the Pareto gap")));
    }
    let t = law.inverse_survival_ln(ln_p)?;
    let u = t.powf(alpha / (alpha - 2.0));
    if !(t > 1.0 && u > t) {
        return Err(Error::Config(format!(
            "budget {k} gives t = {t} and u = {u}; need u > t > 1"
        )));
    }
    Ok(ParetoAllocation { k_l, k_q, t, u })
}
