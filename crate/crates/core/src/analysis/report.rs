use crate::error::Result;
use crate::linalg::{CorrelationMatrix, Matrix};
use crate::protocol::StoppingSetParams;
use crate::sources::{xvec_sigma2, MarginalLaw};
use crate::statmath::{max_normal_moments_pow2, truncated_normal_moments};

use super::pareto::pareto_theory;
use super::scalar::*;
use super::vector::*;

/// Closed-form values for one scheme at one parameter point.
#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub scheme: String,
    pub k: f64,
    pub exact_variance: Option<f64>,
    /// first-order expression with o(1) set to zero
    pub asymptotic_variance: f64,
    pub fisher: Matrix,
    /// trace of the inverse Fisher matrix
    pub crlb_trace: f64,
    pub bounds: Vec<(String, f64)>,
}

impl TheoryReport {
    pub fn bound(&self, label: &str) -> Option<f64> {
        self.bounds.iter().find(|(l, _)| l == label).map(|b| b.1)
    }
}

impl std::fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "scheme              {}", self.scheme)?;
        writeln!(f, "k                   {}", self.k)?;
        match self.exact_variance {
            Some(v) => writeln!(f, "exact_variance      {v:.10e}")?,
            None => writeln!(f, "exact_variance      NA")?,
        }
        writeln!(f, "asymptotic_variance {:.10e}", self.asymptotic_variance)?;
        writeln!(f, "crlb_trace          {:.10e}", self.crlb_trace)?;
        for (l, v) in &self.bounds {
            writeln!(f, "{l:<19} {v:.10e}")?;
        }
        Ok(())
    }
}

fn scalar_report(scheme: &str, k: f64, rho: f64, exact: f64, fisher: f64) -> TheoryReport {
    TheoryReport {
        scheme: scheme.into(),
        k,
        exact_variance: Some(exact),
        asymptotic_variance: asymptotic_scalar_variance(rho, k),
        fisher: Matrix::from_diag(&[fisher]),
        crlb_trace: 1.0 / fisher,
        bounds: vec![("crlb".into(), 1.0 / fisher)],
    }
}

pub fn theory_threshold(rho: f64, k: f64) -> Result<TheoryReport> {
    let t = threshold_for_bits(k)?;
    let mut r = scalar_report(
        "threshold",
        k,
        rho,
        exact_threshold_variance(rho, t),
        fisher_threshold(rho, t),
    );
    r.bounds.push(("t".into(), t));
    Ok(r)
}

pub fn theory_max(rho: f64, k: u32) -> Result<TheoryReport> {
    let m = max_normal_moments_pow2(k)?;
    Ok(scalar_report(
        "max",
        k as f64,
        rho,
        selected_sample_variance(rho, m.mean, m.variance),
        fisher_from_second_moment(rho, m.second_moment),
    ))
}

/// Y-vector scheme; exact value is the trace of the covariance of Y_J/s(t).
pub fn theory_yvec(rho: &[f64], sigma_y: &CorrelationMatrix, k: f64) -> Result<TheoryReport> {
    let t = threshold_for_bits(k)?;
    let ex2 = truncated_normal_moments(t).second_moment;
    let f = fisher_yvec(rho, sigma_y, ex2)?;
    let naive = naive_scalar_bound(rho, k);
    Ok(TheoryReport {
        scheme: "yvec".into(),
        k,
        exact_variance: Some(exact_yvec_trace(rho, t)),
        asymptotic_variance: rho.iter().map(|r| 1.0 - r * r).sum::<f64>()
            / (2.0 * k * std::f64::consts::LN_2),
        crlb_trace: f.inverse.trace(),
        fisher: f.fisher,
        bounds: vec![("naive_scalar".into(), naive), ("t".into(), t)],
    })
}

/// X-vector scheme at explicit stopping-set parameters. The Fisher matrix is
/// evaluated at the analytic α.
pub fn theory_xvec(
    rho: &[f64],
    sigma_x: &CorrelationMatrix,
    params: &StoppingSetParams,
) -> Result<TheoryReport> {
    let d = rho.len();
    let sigma2 = xvec_sigma2(rho, sigma_x)?;
    let alpha = stopping_set_alpha(params.a, params.b, d);
    let f = fisher_xvec(rho, sigma_x, alpha, sigma2)?;
    let (_, upper) = stopping_set_bracket(params.a, params.b, d)?;
    let tr = sigma_x.matrix().trace();
    let k = params.budget();
    let quant = quantization_loss_bound(params.a, params.k_q as f64, d);
    Ok(TheoryReport {
        scheme: "xvec".into(),
        k,
        exact_variance: None,
        asymptotic_variance: xvec_bound(rho, d, k),
        crlb_trace: f.inverse.trace(),
        fisher: f.fisher,
        bounds: vec![
            ("alpha".into(), alpha),
            ("sigma2".into(), sigma2),
            ("unquantized_lower".into(), sigma2 * tr / alpha),
            ("unquantized_upper".into(), sigma2 * tr * upper),
            ("quantization_loss".into(), quant),
            ("w_error".into(), w_quantization_error_bound(params)),
            ("naive_scalar".into(), naive_scalar_bound(rho, k)),
        ],
    })
}

/// Threshold scheme on an additive-noise model.
pub fn theory_additive(law: MarginalLaw, rho: f64, k: f64) -> Result<TheoryReport> {
    let t = law_threshold_for_bits(law, k)?;
    let exact = additive_exact(law, rho, t)?;
    let asym = match law {
        MarginalLaw::Laplace => laplace_theory(rho, k),
        MarginalLaw::ParetoTwoSided { alpha } => pareto_unquantized_floor(alpha, rho),
        _ => asymptotic_scalar_variance(rho, k),
    };
    Ok(TheoryReport {
        scheme: "additive".into(),
        k,
        exact_variance: Some(exact),
        asymptotic_variance: asym,
        fisher: Matrix::zeros(0, 0),
        crlb_trace: f64::NAN,
        bounds: vec![("t".into(), t)],
    })
}

pub fn theory_pareto(alpha: f64, rho: f64, k: f64) -> Result<TheoryReport> {
    let p = pareto_theory(alpha, rho, k)?;
    Ok(TheoryReport {
        scheme: "pareto".into(),
        k,
        exact_variance: None,
        asymptotic_variance: p.mse_bound,
        fisher: Matrix::zeros(0, 0),
        crlb_trace: f64::NAN,
        bounds: vec![
            ("finite_bound".into(), p.finite_bound),
            ("exponent".into(), p.exponent),
            ("unquantized_floor".into(), pareto_unquantized_floor(alpha, rho)),
        ],
    })
}
