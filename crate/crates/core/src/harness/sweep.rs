use rayon::prelude::*;

use super::config::{ExperimentConfig, GridPoint, Scheme};
use super::moments::Moments;
use crate::analysis::{
    additive_exact, asymptotic_scalar_variance, clt_binary_exact, exact_max_variance,
    exact_threshold_variance, fisher_max, fisher_threshold, law_threshold_for_bits,
    laplace_theory, naive_scalar_bound, pareto_theory, pareto_unquantized_floor, threshold_for_bits,
    theory_xvec, theory_yvec,
};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, XVecEstimator};
use crate::sources::{JointModel, MarginalLaw};

const CHUNK: u64 = 256;

/// Closed-form companions of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TheoryValues {
    /// exact variance (or trace, or MSE) of the estimator
    pub exact: Option<f64>,
    /// first-order expression with o(1) = 0
    pub asymptotic: Option<f64>,
    /// scheme-specific bound: the CRLB for the scalar and Y-vector schemes,
    /// the upper end of the stopping-set bracket on the unquantized X-vector error, the finite
    /// bound for quantized Pareto
    pub bound: Option<f64>,
}

pub fn theory_at(cfg: &ExperimentConfig, p: &GridPoint) -> Result<TheoryValues> {
    let model = cfg.model_at(p)?;
    let rho0 = p.rho[0];
    let k = p.k;
    Ok(match cfg.scheme {
        Scheme::Threshold => {
            let t = threshold_for_bits(k)?;
            TheoryValues {
                exact: Some(exact_threshold_variance(rho0, t)),
                asymptotic: Some(asymptotic_scalar_variance(rho0, k)),
                bound: Some(1.0 / fisher_threshold(rho0, t)),
            }
        }
        Scheme::Max => TheoryValues {
            exact: Some(exact_max_variance(rho0, k as u32)?),
            asymptotic: Some(asymptotic_scalar_variance(rho0, k)),
            bound: Some(1.0 / fisher_max(rho0, k as u32)?),
        },
        Scheme::YVec => {
            let JointModel::GaussianYVec { rho, sigma_y } = &model else {
                unreachable!("validated")
            };
            let r = theory_yvec(rho, sigma_y, k)?;
            TheoryValues {
                exact: r.exact_variance,
                asymptotic: Some(r.asymptotic_variance),
                bound: Some(r.crlb_trace),
            }
        }
        Scheme::Naive => {
            let d = p.rho.len() as f64;
            let t = threshold_for_bits(k / d)?;
            TheoryValues {
                exact: Some(p.rho.iter().map(|r| exact_threshold_variance(*r, t)).sum()),
                asymptotic: Some(naive_scalar_bound(&p.rho, k)),
                bound: None,
            }
        }
        Scheme::XVec => {
            let JointModel::GaussianXVec { rho, sigma_x } = &model else {
                unreachable!("validated")
            };
            let est = XVecEstimator::new(&model, k, p.b0.unwrap_or(0.3), cfg.options())?;
            let r = theory_xvec(rho, sigma_x, est.params())?;
            TheoryValues {
                exact: None,
                asymptotic: Some(r.asymptotic_variance),
                bound: r.bound("unquantized_upper"),
            }
        }
        Scheme::Clt => {
            let t = threshold_for_bits(k)?;
            let m = p.m.unwrap_or(1);
            let exact = match &model {
                JointModel::DoublySymmetricBinary { p: flip } => Some(clt_binary_exact(*flip, m, t)?.mse),
                JointModel::GaussianScalar { rho } => Some(exact_threshold_variance(*rho, t)),
                _ => None,
            };
            TheoryValues {
                exact,
                asymptotic: Some(asymptotic_scalar_variance(rho0, k)),
                bound: None,
            }
        }
        Scheme::Additive => {
            let JointModel::AdditiveNoise { x_law, .. } = model else {
                unreachable!("validated")
            };
            let t = law_threshold_for_bits(x_law, k)?;
            let asymptotic = match x_law {
                MarginalLaw::Laplace => Some(laplace_theory(rho0, k)),
                MarginalLaw::StdNormal => Some(asymptotic_scalar_variance(rho0, k)),
                MarginalLaw::ParetoTwoSided { alpha } => Some(pareto_unquantized_floor(alpha, rho0)),
                _ => None,
            };
            TheoryValues {
                exact: Some(additive_exact(x_law, rho0, t)?),
                asymptotic,
                bound: None,
            }
        }
        Scheme::Pareto => {
            let pt = pareto_theory(p.alpha.unwrap_or(4.0), rho0, k)?;
            TheoryValues {
                exact: None,
                asymptotic: Some(pt.mse_bound),
                bound: Some(pt.finite_bound),
            }
        }
    })
}

/// Monte Carlo summary of one grid point next to its theory.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub point: GridPoint,
    pub d: usize,
    pub trials: u64,
    pub failures: u64,
    /// bias of the coordinate with the largest |bias|/SE
    pub bias: f64,
    pub bias_se: f64,
    /// summed over coordinates
    pub variance: f64,
    pub variance_se: f64,
    /// mean of ‖estimate - truth‖²
    pub mse: f64,
    pub mse_se: f64,
    pub coord_bias: Vec<f64>,
    pub coord_bias_se: Vec<f64>,
    pub coord_variance: Vec<f64>,
    /// mean squared error of the unquantized estimate, when reported
    pub unquantized_mse: Option<f64>,
    pub theory: TheoryValues,
    pub bits_expected_mean: f64,
    pub bits_realized_mean: Option<f64>,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    coords: Vec<Moments>,
    sq: Moments,
    unq: Moments,
    bits: Moments,
    realized: Moments,
    missing_realized: bool,
    failures: u64,
}

impl Acc {
    fn new(d: usize) -> Self {
        Acc {
            coords: vec![Moments::new(); d],
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &Acc) {
        for (a, b) in self.coords.iter_mut().zip(&o.coords) {
            a.merge(b);
        }
        self.sq.merge(&o.sq);
        self.unq.merge(&o.unq);
        self.bits.merge(&o.bits);
        self.realized.merge(&o.realized);
        self.missing_realized |= o.missing_realized;
        self.failures += o.failures;
    }
}

/// Raw per-point accumulators.
#[derive(Debug, Clone)]
pub struct PointStats {
    /// estimate - truth, per coordinate
    pub coords: Vec<Moments>,
    pub squared_error: Moments,
    pub unquantized: Option<Moments>,
    pub bits: Moments,
    pub realized: Option<Moments>,
    pub failures: u64,
}

fn run_chunk(est: &dyn Estimator, truth: &[f64], seed: u64, lo: u64, hi: u64) -> Result<Acc> {
    let mut acc = Acc::new(truth.len());
    for trial in lo..hi {
        match est.run(seed, trial) {
            Ok(r) => {
                for ((m, e), t) in acc.coords.iter_mut().zip(&r.estimate).zip(truth) {
                    m.push(e - t);
                }
                acc.sq.push(r.squared_error(truth));
                if let Some(u) = &r.unquantized {
                    acc.unq.push(u.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum());
                }
                acc.bits.push(r.bits_expected);
                match r.bits_realized {
                    Some(b) => acc.realized.push(b as f64),
                    None => acc.missing_realized = true,
                }
            }
            Err(e) if e.is_trial_failure() => acc.failures += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

/// Trials of one estimator. Trial i always uses substream (seed, i) and
/// chunks are merged in index order, so the result does not depend on the
/// thread count.
pub fn run_point(est: &dyn Estimator, seed: u64, trials: u64) -> Result<PointStats> {
    let truth = est.truth();
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Result<Acc>> = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(est, &truth, seed, c * CHUNK, ((c + 1) * CHUNK).min(trials)))
        .collect();
    let mut acc = Acc::new(truth.len());
    for p in parts {
        acc.merge(&p?);
    }
    Ok(PointStats {
        unquantized: (acc.unq.count() > 0).then_some(acc.unq),
        realized: (!acc.missing_realized && acc.realized.count() > 0).then_some(acc.realized),
        coords: acc.coords,
        squared_error: acc.sq,
        bits: acc.bits,
        failures: acc.failures,
    })
}

fn summarize(cfg: &ExperimentConfig, p: &GridPoint, est: &dyn Estimator) -> Result<SweepRow> {
    let PointStats {
        coords,
        squared_error: sq,
        unquantized: unq,
        bits,
        realized,
        failures,
    } = run_point(est, cfg.seed, cfg.trials)?;
    if failures * 10 > cfg.trials {
        return Err(Error::FailureRate {
            failures,
            trials: cfg.trials,
        });
    }
    let worst = coords
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let za = (a.1.mean() / a.1.mean_se()).abs();
            let zb = (b.1.mean() / b.1.mean_se()).abs();
            za.total_cmp(&zb)
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(SweepRow {
        scheme: cfg.scheme,
        point: p.clone(),
        d: coords.len(),
        trials: cfg.trials,
        failures,
        bias: coords[worst].mean(),
        bias_se: coords[worst].mean_se(),
        variance: coords.iter().map(|m| m.variance()).sum(),
        variance_se: coords.iter().map(|m| m.variance_se().powi(2)).sum::<f64>().sqrt(),
        mse: sq.mean(),
        mse_se: sq.mean_se(),
        coord_bias: coords.iter().map(|m| m.mean()).collect(),
        coord_bias_se: coords.iter().map(|m| m.mean_se()).collect(),
        coord_variance: coords.iter().map(|m| m.variance()).collect(),
        unquantized_mse: unq.map(|m| m.mean()),
        theory: theory_at(cfg, p)?,
        bits_expected_mean: bits.mean(),
        bits_realized_mean: realized.map(|m| m.mean()),
    })
}

/// Thread count from CORRLINK_THREADS, if set.
pub fn env_threads() -> Option<usize> {
    std::env::var("CORRLINK_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Every grid point in order, on `threads` workers (CORRLINK_THREADS or the
/// rayon default when None).
pub fn run_sweep_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(env_threads) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("threads: {e}")))?;
    pool.install(|| {
        cfg.points()
            .iter()
            .map(|p| summarize(cfg, p, cfg.estimator(p)?.as_ref()))
            .collect()
    })
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_threads(cfg, None)
}

