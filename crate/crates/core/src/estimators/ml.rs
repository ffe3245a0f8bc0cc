use crate::error::{Error, Result};
use crate::linalg::{invert, CorrelationMatrix, Matrix};

/// Approximate maximum-likelihood estimate from one selected sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxMl {
    pub estimate: Vec<f64>,
    pub c: f64,
    /// Another real root lies within twice the chosen root's distance to 1/X_J.
    pub ambiguous: bool,
}

/// Real roots of c3 x³ + c2 x² + c1 x + c0, polished by Newton steps.
pub fn real_cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c3 == 0.0 {
        if c2 == 0.0 {
            return if c1 == 0.0 { vec![] } else { vec![-c0 / c1] };
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            return vec![];
        }
        let sign = if c1 >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (c1 + sign * disc.sqrt());
        let mut r = vec![q / c2];
        if q != 0.0 {
            r.push(c0 / q);
        }
        return r;
    }
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    // x = y - a/3, y³ + p y + q = 0
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|j| m * (theta - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos() + shift)
            .collect()
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((c3 * *r + c2) * *r + c1) * *r + c0;
            let df = (3.0 * c3 * *r + 2.0 * c2) * *r + c1;
            if df == 0.0 {
                break;
            }
            *r -= f / df;
        }
    }
    roots
}

/// C solving a C²(X - C) - (X² - 1 + a) C + X = 0 with a = Yᵀ Σ_Y⁻¹ Y; the
/// estimate is C·Y_J. Among real roots the one nearest 1/X_J is taken.
/// Only a scalar selected X (1×1 `x_j`) is supported.
pub fn approx_ml_estimate(x_j: &Matrix, y_j: &[f64], sigma_y: &CorrelationMatrix) -> Result<ApproxMl> {
    if x_j.rows() != 1 || x_j.cols() != 1 {
        return Err(Error::Config(format!(
            "approximate ML is defined for a scalar selected X; got {}x{}",
            x_j.rows(),
            x_j.cols()
        )));
    }
    if y_j.len() != sigma_y.dim() {
        return Err(Error::Config("Y_J length must match Σ_Y".into()));
    }
    let x = x_j[(0, 0)];
    let inv = invert(sigma_y.matrix())?;
    let a: f64 = inv.mul_vec(y_j).iter().zip(y_j).map(|(u, v)| u * v).sum();
    let roots = if a == 0.0 {
        let den = x * x - 1.0;
        if den == 0.0 {
            vec![]
        } else {
            vec![x / den]
        }
    } else {
        real_cubic_roots(-a, a * x, -(x * x - 1.0 + a), x)
    };
    let target = 1.0 / x;
    let mut by_distance: Vec<f64> = roots.into_iter().filter(|r| r.is_finite()).collect();
    by_distance.sort_by(|p, q| (p - target).abs().total_cmp(&(q - target).abs()));
    let Some(&c) = by_distance.first() else {
        return Err(Error::NoRoot(format!("no real root for X_J = {x}, a = {a}")));
    };
    let best = (c - target).abs();
    let ambiguous = by_distance
        .get(1)
        .is_some_and(|r| (r - target).abs() <= 2.0 * best && (r - c).abs() > 1e-12 * c.abs().max(1.0));
    Ok(ApproxMl {
        estimate: y_j.iter().map(|y| c * y).collect(),
        c,
        ambiguous,
    })
}
