use super::report::{EstimateReport, Estimator, ProtocolOptions};
use crate::error::{Error, Result};
use crate::protocol::{
    allocate_bits_pareto, quantize_pareto_value, select_threshold_index, ParetoAllocation,
    Transcript,
};
use crate::sources::{JointModel, MarginalLaw, Source, Statistic, ThresholdPlan};

/// Pareto X: k_l bits for the index, k_q bits for the value of X_J on
/// [t, u]; Bob returns Y_J / X̂_J.
#[derive(Debug, Clone)]
pub struct ParetoQuantizedEstimator {
    source: Source,
    plan: ThresholdPlan,
    alloc: ParetoAllocation,
    design_ln_p: f64,
    opts: ProtocolOptions,
}

impl ParetoQuantizedEstimator {
    pub fn new(model: &JointModel, k: f64, opts: ProtocolOptions) -> Result<Self> {
        let JointModel::AdditiveNoise {
            x_law: MarginalLaw::ParetoTwoSided { alpha },
            ..
        } = model
        else {
            return Err(Error::Config("quantized Pareto scheme needs Pareto X".into()));
        };
        if !(*alpha > 3.0) {
            return Err(Error::Config(format!("quantized Pareto scheme needs α > 3; got {alpha}")));
        }
        let alloc = allocate_bits_pareto(k, *alpha)?;
        let source = opts.source(model)?;
        let plan = source.threshold_plan(Statistic::Coordinate(0), alloc.t)?;
        let design_ln_p = MarginalLaw::ParetoTwoSided { alpha: *alpha }.ln_survival(alloc.t);
        Ok(ParetoQuantizedEstimator {
            source,
            plan,
            alloc,
            design_ln_p,
            opts,
        })
    }

    pub fn allocation(&self) -> &ParetoAllocation {
        &self.alloc
    }
}

impl Estimator for ParetoQuantizedEstimator {
    fn label(&self) -> &'static str {
        "pareto"
    }

    fn truth(&self) -> Vec<f64> {
        self.source.model().true_correlations()
    }

    fn budget(&self) -> f64 {
        self.alloc.k_l + self.alloc.k_q as f64
    }

    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport> {
        let mut stream = self.source.stream(seed, trial);
        let mut tr = Transcript::new("pareto", self.opts.ledger);
        let hit = select_threshold_index(
            &mut stream,
            &self.plan,
            self.design_ln_p,
            &self.opts.wait_cap,
            &mut tr,
        )?;
        let x = hit.x[0];
        let (x_hat, bits) = quantize_pareto_value(x, self.alloc.t, self.alloc.u, self.alloc.k_q)?;
        tr.ledger.charge_fixed("pareto_value", bits as u64);
        tr.quantized_values.push(x_hat);
        let y = stream.bob_sample(hit.index)?[0];
        let mut r = EstimateReport::from_transcript(vec![y / x_hat], tr, seed, trial);
        r.unquantized = Some(vec![y / x]);
        r.crossing_ln_p = Some(self.design_ln_p);
        Ok(r)
    }
}

pub fn estimate_pareto_quantized(
    model: &JointModel,
    k: f64,
    seed: u64,
    trial: u64,
    opts: ProtocolOptions,
) -> Result<EstimateReport> {
    ParetoQuantizedEstimator::new(model, k, opts)?.run(seed, trial)
}
