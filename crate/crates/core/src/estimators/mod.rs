//! Every estimator, compiled once per parameter point and run per trial.

mod ml;
mod pareto;
mod report;
mod stopping;
mod threshold;
mod vector;

pub use ml::{approx_ml_estimate, real_cubic_roots, ApproxMl};
pub use pareto::{estimate_pareto_quantized, ParetoQuantizedEstimator};
pub use report::{EstimateReport, Estimator, ProtocolOptions};
pub use stopping::{stopping_set_statistics, StoppingSetStats};
pub use threshold::{
    estimate_additive_threshold, estimate_clt, estimate_max, estimate_threshold, estimate_yvec,
    MaxEstimator, ThresholdEstimator,
};
pub use vector::{
    estimate_linear_transform_baseline, estimate_naive_scalar, estimate_xvec,
    estimate_xvec_unquantized, normalize_rows, ScalarRunsEstimator, XVecEstimator,
};
