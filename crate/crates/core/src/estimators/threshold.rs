use super::report::{EstimateReport, Estimator, ProtocolOptions};
use crate::analysis::{law_threshold_for_bits, threshold_for_bits};
use crate::error::{Error, Result};
use crate::protocol::{select_max_index, select_threshold_index, Transcript};
use crate::sources::{JointModel, MaxPlan, Source, Statistic, ThresholdPlan};
use crate::statmath::{inverse_mills, ln_q, max_normal_moments_pow2};

/// Maximum of 2^k samples; Bob returns Y_J / E X_J.
#[derive(Debug, Clone)]
pub struct MaxEstimator {
    source: Source,
    plan: MaxPlan,
    k: u32,
    mean: f64,
    opts: ProtocolOptions,
}

impl MaxEstimator {
    pub fn new(model: &JointModel, k: u32, opts: ProtocolOptions) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("max scheme needs k >= 1: with one sample E X_J = 0".into()));
        }
        if !matches!(model, JointModel::GaussianScalar { .. } | JointModel::GaussianYVec { .. }) {
            return Err(Error::Config("max scheme needs a scalar Gaussian X".into()));
        }
        let source = opts.source(model)?;
        let plan = source.max_plan(Statistic::Coordinate(0))?;
        let mean = max_normal_moments_pow2(k)?.mean;
        Ok(MaxEstimator {
            source,
            plan,
            k,
            mean,
            opts,
        })
    }
}

impl Estimator for MaxEstimator {
    fn label(&self) -> &'static str {
        "max"
    }

    fn truth(&self) -> Vec<f64> {
        self.source.model().true_correlations()
    }

    fn budget(&self) -> f64 {
        self.k as f64
    }

    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport> {
        let mut stream = self.source.stream(seed, trial);
        let mut tr = Transcript::new("max", self.opts.ledger);
        let hit = select_max_index(&mut stream, &self.plan, 2f64.powi(self.k as i32), &mut tr)?;
        let est = stream
            .bob_sample(hit.index)?
            .iter()
            .map(|y| y / self.mean)
            .collect();
        Ok(EstimateReport::from_transcript(est, tr, seed, trial))
    }
}

/// First exceedance of t; Bob returns Y_J divided by a fixed normalizer.
#[derive(Debug, Clone)]
pub struct ThresholdEstimator {
    label: &'static str,
    source: Source,
    plan: ThresholdPlan,
    design_ln_p: f64,
    normalizer: f64,
    opts: ProtocolOptions,
}

impl ThresholdEstimator {
    fn build(
        label: &'static str,
        model: &JointModel,
        t: f64,
        normalizer: f64,
        design_ln_p: Option<f64>,
        opts: ProtocolOptions,
    ) -> Result<Self> {
        let source = opts.source(model)?;
        let plan = source.threshold_plan(Statistic::Coordinate(0), t)?;
        let design_ln_p = design_ln_p
            .or(plan.ln_p)
            .ok_or_else(|| Error::Config("crossing probability unknown".into()))?;
        Ok(ThresholdEstimator {
            label,
            source,
            plan,
            design_ln_p,
            normalizer,
            opts,
        })
    }

    /// Gaussian scalar X (scalar or vector Y); ρ̂ = Y_J/s(t).
    pub fn gaussian(model: &JointModel, k: f64, opts: ProtocolOptions) -> Result<Self> {
        let label = match model {
            JointModel::GaussianScalar { .. } => "threshold",
            JointModel::GaussianYVec { .. } => "yvec",
            _ => return Err(Error::Config("threshold scheme needs a scalar Gaussian X".into())),
        };
        let t = threshold_for_bits(k)?;
        Self::build(label, model, t, inverse_mills(t), None, opts)
    }

    /// Additive-noise model; the normalizer is E(X | X > t) under the law of X.
    pub fn additive(model: &JointModel, k: f64, opts: ProtocolOptions) -> Result<Self> {
        let JointModel::AdditiveNoise { x_law, .. } = model else {
            return Err(Error::Config("additive scheme needs an additive-noise model".into()));
        };
        if !x_law.is_continuous() {
            return Err(Error::Config(format!("{x_law} has no invertible tail")));
        }
        let t = law_threshold_for_bits(*x_law, k)?;
        let (mean, _) = x_law.conditional_moments(t)?;
        Self::build("additive", model, t, mean, None, opts)
    }

    /// Threshold on block means of m inner pairs, t from the Gaussian design,
    /// normalized by s(t). The index is coded for the block mean's actual
    /// crossing probability when the source knows it, so the expected bits
    /// are k^(m) rather than k.
    pub fn clt(inner: &JointModel, m: usize, k: f64, opts: ProtocolOptions) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("block size m must be at least 1".into()));
        }
        if matches!(inner, JointModel::GaussianXVec { .. } | JointModel::GaussianYVec { .. }) {
            return Err(Error::Config("block averaging is implemented for scalar pairs".into()));
        }
        let t = threshold_for_bits(k)?;
        let model = JointModel::BlockAveraged {
            inner: Box::new(inner.clone()),
            m,
        };
        if let Some(xb) = model.x_support_bound() {
            if !(xb > t) {
                let need = (t / inner.x_support_bound().unwrap()).powi(2).floor() + 1.0;
                return Err(Error::Config(format!(
                    "block mean is bounded by {xb} < t = {t}; need m >= {need}"
                )));
            }
        }
        let source = opts.source(&model)?;
        let exact = source
            .threshold_plan(Statistic::Coordinate(0), t)?
            .ln_p;
        let design = exact.unwrap_or_else(|| ln_q(t));
        Self::build("clt", &model, t, inverse_mills(t), Some(design), opts)
    }

    pub fn threshold(&self) -> f64 {
        self.plan.t
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn design_ln_p(&self) -> f64 {
        self.design_ln_p
    }

    pub fn source(&self) -> &Source {
        &self.source
    }
}

impl Estimator for ThresholdEstimator {
    fn label(&self) -> &'static str {
        self.label
    }

    fn truth(&self) -> Vec<f64> {
        self.source.model().true_correlations()
    }

    fn budget(&self) -> f64 {
        crate::statmath::geometric_entropy_ln(self.design_ln_p)
    }

    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport> {
        let mut stream = self.source.stream(seed, trial);
        let mut tr = Transcript::new(self.label, self.opts.ledger);
        let hit = select_threshold_index(
            &mut stream,
            &self.plan,
            self.design_ln_p,
            &self.opts.wait_cap,
            &mut tr,
        )?;
        let est = stream
            .bob_sample(hit.index)?
            .iter()
            .map(|y| y / self.normalizer)
            .collect();
        let mut r = EstimateReport::from_transcript(est, tr, seed, trial);
        r.crossing_ln_p = self.plan.ln_p;
        Ok(r)
    }
}

pub fn estimate_max(
    model: &JointModel,
    k: u32,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    MaxEstimator::new(model, k, opts)?.run(seed, trial)
}

pub fn estimate_threshold(
    model: &JointModel,
    k: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    if !matches!(model, JointModel::GaussianScalar { .. }) {
        return Err(Error::Config("estimate_threshold takes a scalar Gaussian model".into()));
    }
    ThresholdEstimator::gaussian(model, k, opts)?.run(seed, trial)
}

pub fn estimate_yvec(
    model: &JointModel,
    k: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    if !matches!(model, JointModel::GaussianYVec { .. }) {
        return Err(Error::Config("estimate_yvec takes a Y-vector model".into()));
    }
    ThresholdEstimator::gaussian(model, k, opts)?.run(seed, trial)
}

pub fn estimate_additive_threshold(
    model: &JointModel,
    k: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    ThresholdEstimator::additive(model, k, opts)?.run(seed, trial)
}

pub fn estimate_clt(
    inner: &JointModel,
    k: f64,
    m: usize,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    ThresholdEstimator::clt(inner, m, k, opts)?.run(seed, trial)
}

