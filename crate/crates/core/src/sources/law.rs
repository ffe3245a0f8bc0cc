use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use super::rng::{std_normal, uniform_open};
use crate::error::{Error, Result};
use crate::statmath::{ln_q, q, q_inv_ln, truncated_normal_moments};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Zero-mean unit-variance marginal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalLaw {
    StdNormal,
    /// Pr(X > x) = exp(-√2 x)/2 for x ≥ 0.
    Laplace,
    /// Pr(X > x) = Pr(X < -x) = (x0/x)^α / 2 for x ≥ x0, with x0 set by unit variance.
    ParetoTwoSided { alpha: f64 },
    /// Uniform on (-√3, √3).
    Uniform,
    Rademacher,
}

impl MarginalLaw {
    pub fn validate(&self) -> Result<()> {
        if let MarginalLaw::ParetoTwoSided { alpha } = *self {
            if !(alpha > 2.0) || !alpha.is_finite() {
                return Err(Error::Model(format!(
                    "Pareto tail index {alpha} must exceed 2 for finite variance"
                )));
            }
        }
        Ok(())
    }

    /// Pareto scale x0 = sqrt((α-2)/α).
    pub fn pareto_x0(alpha: f64) -> f64 {
        ((alpha - 2.0) / alpha).sqrt()
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, MarginalLaw::Rademacher)
    }

    /// Largest |X|, if bounded.
    pub fn support_bound(&self) -> Option<f64> {
        match self {
            MarginalLaw::Uniform => Some(SQRT_3),
            MarginalLaw::Rademacher => Some(1.0),
            _ => None,
        }
    }

    /// ln Pr(X > x).
    pub fn ln_survival(&self, x: f64) -> f64 {
        match *self {
            MarginalLaw::StdNormal => ln_q(x),
            MarginalLaw::Laplace => {
                if x >= 0.0 {
                    -LN_2 - SQRT_2 * x
                } else {
                    (-0.5 * (SQRT_2 * x).exp()).ln_1p()
                }
            }
            MarginalLaw::ParetoTwoSided { alpha } => {
                let x0 = Self::pareto_x0(alpha);
                if x >= x0 {
                    -LN_2 + alpha * (x0 / x).ln()
                } else if x >= -x0 {
                    -LN_2
                } else {
                    (-0.5 * (x0 / -x).powf(alpha)).ln_1p()
                }
            }
            MarginalLaw::Uniform => {
                if x >= SQRT_3 {
                    f64::NEG_INFINITY
                } else if x <= -SQRT_3 {
                    0.0
                } else {
                    ((SQRT_3 - x) / (2.0 * SQRT_3)).ln()
                }
            }
            MarginalLaw::Rademacher => {
                if x >= 1.0 {
                    f64::NEG_INFINITY
                } else if x >= -1.0 {
                    -LN_2
                } else {
                    0.0
                }
            }
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match self {
            MarginalLaw::StdNormal => q(x),
            _ => self.ln_survival(x).exp(),
        }
    }

    /// The x with Pr(X > x) = exp(ln_p). Continuous laws only.
    pub fn inverse_survival_ln(&self, ln_p: f64) -> Result<f64> {
        if !(ln_p < 0.0) {
            return Err(Error::domain(
                "inverse_survival",
                format!("ln p = {ln_p} must be negative"),
            ));
        }
        let upper = ln_p <= -LN_2;
        // ln of the lower-tail mass when p > 1/2
        let ln_comp = if upper { 0.0 } else { (-ln_p.exp_m1()).ln() };
        Ok(match *self {
            MarginalLaw::StdNormal => q_inv_ln(ln_p)?,
            MarginalLaw::Laplace => {
                if upper {
                    -(LN_2 + ln_p) / SQRT_2
                } else {
                    (LN_2 + ln_comp) / SQRT_2
                }
            }
            MarginalLaw::ParetoTwoSided { alpha } => {
                let x0 = Self::pareto_x0(alpha);
                if upper {
                    x0 * (-(LN_2 + ln_p) / alpha).exp()
                } else {
                    -x0 * (-(LN_2 + ln_comp) / alpha).exp()
                }
            }
            MarginalLaw::Uniform => SQRT_3 - 2.0 * SQRT_3 * ln_p.exp(),
            MarginalLaw::Rademacher => {
                return Err(Error::domain(
                    "inverse_survival",
                    "Rademacher law has no continuous quantile",
                ))
            }
        })
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MarginalLaw::StdNormal => std_normal(rng),
            MarginalLaw::Rademacher => {
                if rng.next_u32() & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            _ => self
                .inverse_survival_ln(uniform_open(rng).ln())
                .expect("continuous law"),
        }
    }

    /// Draw from X conditioned on X > t.
    pub fn sample_above<R: RngCore + ?Sized>(&self, rng: &mut R, t: f64) -> Result<f64> {
        let ln_s = self.ln_survival(t);
        if ln_s == f64::NEG_INFINITY {
            return Err(Error::Config(format!("Pr(X > {t}) = 0 under {self}")));
        }
        match *self {
            MarginalLaw::Rademacher => {
                if t < -1.0 {
                    Ok(self.sample(rng))
                } else {
                    Ok(1.0)
                }
            }
            MarginalLaw::Laplace if t >= 0.0 => Ok(t - uniform_open(rng).ln() / SQRT_2),
            _ => {
                let ln_p = ln_s + uniform_open(rng).ln();
                let x = self.inverse_survival_ln(ln_p)?;
                Ok(x.max(t))
            }
        }
    }

    /// (E(X | X > t), Var(X | X > t)).
    pub fn conditional_moments(&self, t: f64) -> Result<(f64, f64)> {
        match *self {
            MarginalLaw::StdNormal => {
                let m = truncated_normal_moments(t);
                Ok((m.mean, m.variance))
            }
            MarginalLaw::Laplace if t >= 0.0 => Ok((t + 1.0 / SQRT_2, 0.5)),
            MarginalLaw::ParetoTwoSided { alpha } if t >= Self::pareto_x0(alpha) => {
                let a1 = alpha - 1.0;
                Ok((alpha * t / a1, alpha * t * t / (a1 * a1 * (alpha - 2.0))))
            }
            MarginalLaw::Uniform if t > -SQRT_3 && t < SQRT_3 => {
                let w = SQRT_3 - t;
                Ok((0.5 * (t + SQRT_3), w * w / 12.0))
            }
            MarginalLaw::Rademacher if (-1.0..1.0).contains(&t) => Ok((1.0, 0.0)),
            _ => Err(Error::domain(
                "conditional_moments",
                format!("no closed form for {self} above t = {t}"),
            )),
        }
    }
}

impl fmt::Display for MarginalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginalLaw::StdNormal => write!(f, "normal"),
            MarginalLaw::Laplace => write!(f, "laplace"),
            MarginalLaw::ParetoTwoSided { alpha } => write!(f, "pareto:{alpha}"),
            MarginalLaw::Uniform => write!(f, "uniform"),
            MarginalLaw::Rademacher => write!(f, "rademacher"),
        }
    }
}

impl FromStr for MarginalLaw {
    type Err = Error;

    /// `normal`, `laplace`, `pareto:<alpha>`, `uniform`, `rademacher`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let law = match s.as_str() {
            "normal" | "gaussian" => MarginalLaw::StdNormal,
            "laplace" => MarginalLaw::Laplace,
            "uniform" => MarginalLaw::Uniform,
            "rademacher" => MarginalLaw::Rademacher,
            other => match other.strip_prefix("pareto:") {
                Some(a) => MarginalLaw::ParetoTwoSided {
                    alpha: a
                        .parse()
                        .map_err(|_| Error::Config(format!("bad Pareto index '{a}'")))?,
                },
                None => return Err(Error::Config(format!("unknown marginal law '{other}'"))),
            },
        };
        law.validate()?;
        Ok(law)
    }
}
