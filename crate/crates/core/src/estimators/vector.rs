use super::report::{EstimateReport, Estimator, ProtocolOptions};
use crate::analysis::threshold_for_bits;
use crate::error::{Error, Result};
use crate::linalg::{invert, sym_inv_sqrt, sym_sqrt, CorrelationMatrix, Matrix};
use crate::protocol::{
    allocate_bits_xvec, quantize_correlation_matrix, quantize_w_matrix,
    select_stopping_set_indices, select_threshold_index, StoppingSetParams, Transcript,
};
use crate::sources::{JointModel, Source, Statistic, StoppingPlan, ThresholdPlan};
use crate::statmath::{geometric_entropy_ln, inverse_mills};

fn xvec_parts(model: &JointModel) -> Result<(&[f64], &CorrelationMatrix)> {
    match model {
        JointModel::GaussianXVec { rho, sigma_x } => Ok((rho, sigma_x)),
        _ => Err(Error::Config("scheme needs a vector-X Gaussian model".into())),
    }
}

/// Stopping-set scheme: d indices into whitened samples plus a quantized
/// d×d matrix; Bob returns Ρ̂ = Y_J Ŵ⁻¹ Σ_X^{1/2}.
#[derive(Debug, Clone)]
pub struct XVecEstimator {
    source: Source,
    params: StoppingSetParams,
    plan: StoppingPlan,
    /// Σ_X^{1/2} as Bob knows it
    bob_sqrt: Matrix,
    sigma_bits: Option<u32>,
    opts: ProtocolOptions,
}

impl XVecEstimator {
    /// Budget k split by `allocate_bits_xvec`.
    pub fn new(model: &JointModel, k: f64, b0: f64, opts: ProtocolOptions) -> Result<Self> {
        let d = xvec_parts(model)?.0.len();
        let params = allocate_bits_xvec(k, d, b0)?;
        Self::with_params(model, params, opts)
    }

    pub fn with_params(
        model: &JointModel,
        params: StoppingSetParams,
        opts: ProtocolOptions,
    ) -> Result<Self> {
        let (rho, sigma_x) = xvec_parts(model)?;
        if params.d != rho.len() {
            return Err(Error::Config("stopping-set dimension must match Ρ".into()));
        }
        params.validate()?;
        let source = opts.source(model)?;
        let whitener = sym_inv_sqrt(sigma_x.matrix())?;
        let plan = source.stopping_plan(&whitener, params.a, params.b)?;
        let (bob_sqrt, sigma_bits) = if opts.charge_sigma_x {
            let bits = params.budget().sqrt().ceil() as u32;
            let q = quantize_correlation_matrix(sigma_x, bits)?;
            (sym_sqrt(q.matrix())?, Some(bits))
        } else {
            (sym_sqrt(sigma_x.matrix())?, None)
        };
        Ok(XVecEstimator {
            source,
            params,
            plan,
            bob_sqrt,
            sigma_bits,
            opts,
        })
    }

    pub fn params(&self) -> &StoppingSetParams {
        &self.params
    }

    fn solve(&self, y: &[f64], w: &Matrix) -> Result<Vec<f64>> {
        let v = invert(w)?.vec_mul(y);
        Ok(self.bob_sqrt.vec_mul(&v))
    }
}

impl Estimator for XVecEstimator {
    fn label(&self) -> &'static str {
        "xvec"
    }

    fn truth(&self) -> Vec<f64> {
        self.source.model().true_correlations()
    }

    fn budget(&self) -> f64 {
        let d = self.params.d as f64;
        self.params.budget() + self.sigma_bits.map_or(0.0, |b| d * d * b as f64)
    }

    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport> {
        let d = self.params.d;
        let mut stream = self.source.stream(seed, trial);
        let mut tr = Transcript::new("xvec", self.opts.ledger);
        if let Some(bits) = self.sigma_bits {
            tr.ledger.charge_fixed("sigma_x", (d * d) as u64 * bits as u64);
        }
        let hits = select_stopping_set_indices(&mut stream, &self.plan, &self.opts.wait_cap, &mut tr)?;
        let mut w = Matrix::zeros(d, d);
        let mut y = Vec::with_capacity(d);
        for (l, h) in hits.iter().enumerate() {
            let col = self.plan.whitener.mul_vec(&h.x);
            for (i, v) in col.into_iter().enumerate() {
                w[(i, l)] = v;
            }
            y.push(stream.bob_sample(h.index)?[0]);
        }
        let (w_hat, bits) = quantize_w_matrix(&w, &self.params);
        tr.ledger.charge_fixed("w_matrix", bits);
        tr.quantized_values.extend_from_slice(w_hat.as_slice());
        let est = self.solve(&y, &w_hat)?;
        let unq = self.solve(&y, &w)?;
        let mut r = EstimateReport::from_transcript(est, tr, seed, trial);
        r.unquantized = Some(unq);
        r.crossing_ln_p = Some(self.plan.ln_p);
        Ok(r)
    }
}

#[derive(Debug, Clone)]
struct ScalarRun {
    plan: ThresholdPlan,
    design_ln_p: f64,
    s: f64,
    y_coord: usize,
}

/// Independent scalar threshold runs, one after another on the same stream,
/// optionally mapped back through M⁻¹.
#[derive(Debug, Clone)]
pub struct ScalarRunsEstimator {
    label: &'static str,
    source: Source,
    runs: Vec<ScalarRun>,
    post: Option<Matrix>,
    opts: ProtocolOptions,
}

impl ScalarRunsEstimator {
    fn run_for(source: &Source, stat: Statistic, k: f64, y_coord: usize) -> Result<ScalarRun> {
        let t = threshold_for_bits(k)?;
        let plan = source.threshold_plan(stat, t)?;
        let design_ln_p = plan.ln_p.expect("Gaussian plans know their crossing probability");
        Ok(ScalarRun {
            plan,
            design_ln_p,
            s: inverse_mills(t),
            y_coord,
        })
    }

    /// d scalar runs with k/d bits each: on X_ℓ for vector X, or on X against
    /// Y_ℓ for vector Y.
    pub fn naive(model: &JointModel, k: f64, opts: ProtocolOptions) -> Result<Self> {
        let source = opts.source(model)?;
        let runs = match model {
            JointModel::GaussianXVec { rho, .. } => {
                let d = rho.len();
                (0..d)
                    .map(|l| Self::run_for(&source, Statistic::Coordinate(l), k / d as f64, 0))
                    .collect::<Result<Vec<_>>>()?
            }
            JointModel::GaussianYVec { rho, .. } => {
                let d = rho.len();
                (0..d)
                    .map(|l| Self::run_for(&source, Statistic::Coordinate(0), k / d as f64, l))
                    .collect::<Result<Vec<_>>>()?
            }
            _ => return Err(Error::Config("naive baseline needs a vector Gaussian model".into())),
        };
        Ok(ScalarRunsEstimator {
            label: "naive",
            source,
            runs,
            post: None,
            opts,
        })
    }

    /// Two scalar runs on U = m₁ᵀX and V = m₂ᵀX with budgets k₁, k₂, then
    /// M⁻¹(α̂₁, α̂₂). Rows of M are rescaled so U and V have unit variance.
    pub fn linear_transform(
        model: &JointModel,
        m: &Matrix,
        k1: f64,
        k2: f64,
        opts: ProtocolOptions,
    ) -> Result<Self> {
        let (rho, sigma_x) = xvec_parts(model)?;
        if rho.len() != 2 || m.rows() != 2 || m.cols() != 2 {
            return Err(Error::Config("linear transform baseline is two-dimensional".into()));
        }
        let m = normalize_rows(m, sigma_x)?;
        let inv = invert(&m).map_err(|e| Error::Config(format!("transform M is not invertible: {e}")))?;
        let source = opts.source(model)?;
        let runs = vec![
            Self::run_for(&source, Statistic::Linear(m.row(0).to_vec()), k1, 0)?,
            Self::run_for(&source, Statistic::Linear(m.row(1).to_vec()), k2, 0)?,
        ];
        Ok(ScalarRunsEstimator {
            label: "linear",
            source,
            runs,
            post: Some(inv),
            opts,
        })
    }
}

/// Rows scaled to unit variance under Σ.
pub fn normalize_rows(m: &Matrix, sigma: &CorrelationMatrix) -> Result<Matrix> {
    let mut out = m.clone();
    for i in 0..m.rows() {
        let r = m.row(i);
        let v: f64 = sigma.matrix().mul_vec(r).iter().zip(r).map(|(a, b)| a * b).sum();
        if !(v > 0.0) {
            return Err(Error::Config(format!("row {i} of M has zero variance")));
        }
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)] / v.sqrt();
        }
    }
    Ok(out)
}

impl Estimator for ScalarRunsEstimator {
    fn label(&self) -> &'static str {
        self.label
    }

    fn truth(&self) -> Vec<f64> {
        self.source.model().true_correlations()
    }

    fn budget(&self) -> f64 {
        self.runs.iter().map(|r| geometric_entropy_ln(r.design_ln_p)).sum()
    }

    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport> {
        let mut stream = self.source.stream(seed, trial);
        let mut tr = Transcript::new(self.label, self.opts.ledger);
        let mut est = Vec::with_capacity(self.runs.len());
        for run in &self.runs {
            let hit = select_threshold_index(
                &mut stream,
                &run.plan,
                run.design_ln_p,
                &self.opts.wait_cap,
                &mut tr,
            )?;
            est.push(stream.bob_sample(hit.index)?[run.y_coord] / run.s);
        }
        if let Some(inv) = &self.post {
            est = inv.mul_vec(&est);
        }
        Ok(EstimateReport::from_transcript(est, tr, seed, trial))
    }
}

pub fn estimate_xvec(
    model: &JointModel,
    k: f64,
    b0: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    XVecEstimator::new(model, k, b0, opts)?.run(seed, trial)
}

/// The unquantized Ρ̂₀ = Y_J W_J⁻¹ Σ_X^{1/2} at explicit thresholds; only the
/// index bits are charged.
pub fn estimate_xvec_unquantized(
    model: &JointModel,
    a: f64,
    b: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    let d = xvec_parts(model)?.0.len();
    let params = StoppingSetParams::from_thresholds(a, b, d, 1)?;
    let mut r = XVecEstimator::with_params(model, params, opts)?.run(seed, trial)?;
    let unq = r.unquantized.take().expect("xvec reports the unquantized estimate");
    r.transcript.ledger.entries.retain(|e| e.label != "w_matrix");
    r.transcript.quantized_values.clear();
    r.bits_expected = r.transcript.ledger.total_expected();
    r.bits_realized = r.transcript.ledger.total_realized();
    r.estimate = unq;
    Ok(r)
}

pub fn estimate_linear_transform_baseline(
    model: &JointModel,
    k1: f64,
    k2: f64,
    m: &Matrix,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    ScalarRunsEstimator::linear_transform(model, m, k1, k2, opts)?.run(seed, trial)
}

pub fn estimate_naive_scalar(
    model: &JointModel,
    k: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    ScalarRunsEstimator::naive(model, k, opts)?.run(seed, trial)
}
