use rand::RngCore;

use super::kernel::{BinaryBlockTail, GaussianKernel, Kernel};
use super::law::MarginalLaw;
use super::model::JointModel;
use super::rng::{geometric_gap, std_normal, substream, uniform_open, TrialRng};
use crate::error::{Error, Result};
use crate::linalg::{invert, psd_sqrt, Matrix};
use crate::statmath::{ln_q, q, q_inv, q_inv_ln};

/// 1-based position in a sample stream. Kept as f64: waits for stopping
/// sets at large budgets run far past u64.
pub type SampleIndex = f64;

/// What Alice thresholds or maximizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Statistic {
    Coordinate(usize),
    /// cᵀX; c need not be normalized.
    Linear(Vec<f64>),
}

impl Statistic {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Statistic::Coordinate(i) => x[*i],
            Statistic::Linear(c) => c.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    fn vector(&self, dx: usize) -> Vec<f64> {
        match self {
            Statistic::Coordinate(i) => {
                let mut c = vec![0.0; dx];
                c[*i] = 1.0;
                c
            }
            Statistic::Linear(c) => c.clone(),
        }
    }
}

/// A selected sample as seen by Alice.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub index: SampleIndex,
    pub x: Vec<f64>,
}

/// A compiled model. Cheap to share across threads; each trial opens its own
/// [`PairStream`].
#[derive(Debug, Clone)]
pub struct Source {
    model: JointModel,
    kernel: Kernel,
    literal_only: bool,
}

#[derive(Debug, Clone)]
enum ThresholdKind {
    Literal,
    Gaussian {
        t_std: f64,
        ln_q_t: f64,
        gain: Vec<f64>,
        cond_sqrt: Matrix,
    },
    Additive,
    Binary,
    BinaryBlock(BinaryBlockTail),
}

/// Precomputed first-exceedance search for one statistic and threshold.
#[derive(Debug, Clone)]
pub struct ThresholdPlan {
    pub stat: Statistic,
    pub t: f64,
    /// ln Pr(stat > t) when the source knows it exactly.
    pub ln_p: Option<f64>,
    kind: ThresholdKind,
}

#[derive(Debug, Clone)]
enum MaxKind {
    Literal,
    Gaussian { gain: Vec<f64>, cond_sqrt: Matrix },
}

/// Precomputed argmax-of-n search.
#[derive(Debug, Clone)]
pub struct MaxPlan {
    pub stat: Statistic,
    kind: MaxKind,
}

/// Stopping sets in whitened coordinates W = H X:
/// A_ℓ = { |W_ℓ| > a, |W_j| < b for j ≠ ℓ }.
#[derive(Debug, Clone)]
pub struct StoppingPlan {
    pub a: f64,
    pub b: f64,
    pub whitener: Matrix,
    /// ln Pr(W ∈ A_ℓ), the same for every ℓ.
    pub ln_p: f64,
    unwhiten: Matrix,
    fast: bool,
}

// Gain and residual square root of X given cᵀX = v, for unit-variance cᵀX.
fn conditional_on_statistic(g: &GaussianKernel, c: &[f64]) -> Result<(f64, Vec<f64>, Matrix)> {
    let sc = g.cov_x.mul_vec(c);
    let var: f64 = c.iter().zip(&sc).map(|(a, b)| a * b).sum();
    if !(var > 0.0) {
        return Err(Error::Config("statistic has zero variance".into()));
    }
    let sd = var.sqrt();
    let gain: Vec<f64> = sc.iter().map(|v| v / sd).collect();
    let resid = g.cov_x.sub(&Matrix::outer(&gain, &gain));
    Ok((sd, gain.clone(), psd_sqrt(&resid, 1e-10)?))
}

impl Source {
    pub fn new(model: &JointModel) -> Result<Source> {
        Ok(Source {
            model: model.clone(),
            kernel: Kernel::compile(model)?,
            literal_only: false,
        })
    }

    /// Disable every skip-ahead sampler: streams are scanned sample by sample.
    pub fn literal(mut self) -> Source {
        self.literal_only = true;
        self
    }

    pub fn is_literal(&self) -> bool {
        self.literal_only
    }

    pub fn model(&self) -> &JointModel {
        &self.model
    }

    pub fn dims(&self) -> (usize, usize) {
        self.kernel.dims()
    }

    pub fn stream(&self, seed: u64, trial: u64) -> PairStream<'_> {
        PairStream::new(self, substream(seed, trial))
    }

    /// Covariance of X when the model is Gaussian.
    pub fn gaussian_cov_x(&self) -> Option<&Matrix> {
        self.kernel.gaussian().map(|g| &g.cov_x)
    }

    pub fn threshold_plan(&self, stat: Statistic, t: f64) -> Result<ThresholdPlan> {
        let dx = self.dims().0;
        if let Statistic::Coordinate(i) = stat {
            if i >= dx {
                return Err(Error::Config(format!("coordinate {i} out of range for dim {dx}")));
            }
        }
        let (ln_p, kind) = if let Some(g) = self.kernel.gaussian() {
            let (sd, gain, cond_sqrt) = conditional_on_statistic(g, &stat.vector(dx))?;
            let t_std = t / sd;
            let ln_q_t = ln_q(t_std);
            (
                Some(ln_q_t),
                ThresholdKind::Gaussian {
                    t_std,
                    ln_q_t,
                    gain,
                    cond_sqrt,
                },
            )
        } else {
            if stat != Statistic::Coordinate(0) {
                return Err(Error::Config(
                    "non-Gaussian sources support only the first coordinate as statistic".into(),
                ));
            }
            match &self.kernel {
                Kernel::Additive { x_law, .. } => {
                    (Some(x_law.ln_survival(t)), ThresholdKind::Additive)
                }
                Kernel::Binary { .. } => (
                    Some(MarginalLaw::Rademacher.ln_survival(t)),
                    ThresholdKind::Binary,
                ),
                Kernel::Block { inner, m } => match **inner {
                    Kernel::Binary { p } => {
                        let tail = BinaryBlockTail::new(*m, p, t)?;
                        (Some(tail.ln_p), ThresholdKind::BinaryBlock(tail))
                    }
                    _ => (None, ThresholdKind::Literal),
                },
                Kernel::Gaussian(_) => unreachable!(),
            }
        };
        if ln_p == Some(f64::NEG_INFINITY) {
            return Err(Error::Config(format!("Pr(X > {t}) = 0: the wait never ends")));
        }
        let kind = if self.literal_only {
            ThresholdKind::Literal
        } else {
            kind
        };
        Ok(ThresholdPlan { stat, t, ln_p, kind })
    }

    pub fn max_plan(&self, stat: Statistic) -> Result<MaxPlan> {
        let dx = self.dims().0;
        let kind = match (self.kernel.gaussian(), self.literal_only) {
            (Some(g), false) => {
                let c = stat.vector(dx);
                let (sd, gain, cond_sqrt) = conditional_on_statistic(g, &c)?;
                if (sd - 1.0).abs() > 1e-12 {
                    return Err(Error::Config("max statistic must have unit variance".into()));
                }
                MaxKind::Gaussian { gain, cond_sqrt }
            }
            _ => MaxKind::Literal,
        };
        Ok(MaxPlan { stat, kind })
    }

    /// `whitener` must map X to i.i.d. standard normals.
    pub fn stopping_plan(&self, whitener: &Matrix, a: f64, b: f64) -> Result<StoppingPlan> {
        let dx = self.dims().0;
        if whitener.rows() != dx || whitener.cols() != dx {
            return Err(Error::Config("whitener dimension mismatch".into()));
        }
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::Config(format!("stopping thresholds a = {a}, b = {b} must be positive")));
        }
        let ln_p = std::f64::consts::LN_2 + ln_q(a) + (dx as f64 - 1.0) * (1.0 - 2.0 * q(b)).ln();
        let fast = !self.literal_only && self.kernel.gaussian().is_some();
        Ok(StoppingPlan {
            a,
            b,
            whitener: whitener.clone(),
            ln_p,
            unwhiten: invert(whitener)?,
            fast,
        })
    }
}

/// One trial's view of the pair stream. Alice reads X; the Y values of
/// selected samples go on a tape that only Bob reads.
pub struct PairStream<'a> {
    source: &'a Source,
    rng: TrialRng,
    position: SampleIndex,
    tape: Vec<(SampleIndex, Vec<f64>)>,
    x_buf: Vec<f64>,
    y_buf: Vec<f64>,
}

impl<'a> PairStream<'a> {
    fn new(source: &'a Source, rng: TrialRng) -> Self {
        let (dx, dy) = source.dims();
        PairStream {
            source,
            rng,
            position: 0.0,
            tape: Vec::new(),
            x_buf: vec![0.0; dx],
            y_buf: vec![0.0; dy],
        }
    }

    /// Number of samples consumed so far, i.e. the last index read.
    pub fn position(&self) -> SampleIndex {
        self.position
    }

    pub fn rng(&mut self) -> &mut TrialRng {
        &mut self.rng
    }

    /// Next literal pair.
    pub fn next_pair(&mut self) -> (Vec<f64>, Vec<f64>) {
        self.advance_literal();
        (self.x_buf.clone(), self.y_buf.clone())
    }

    fn advance_literal(&mut self) {
        self.position += 1.0;
        self.source
            .kernel
            .sample(&mut self.rng, &mut self.x_buf, &mut self.y_buf);
    }

    fn record(&mut self, x: Vec<f64>, y: Vec<f64>) -> Hit {
        self.tape.push((self.position, y));
        Hit {
            index: self.position,
            x,
        }
    }

    /// Bob's sample at a transmitted index.
    pub fn bob_sample(&self, index: SampleIndex) -> Result<&[f64]> {
        self.tape
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, y)| y.as_slice())
            .ok_or_else(|| Error::Contract(format!("index {index} was never selected")))
    }

    /// First sample after the current position with stat > t. `cap` bounds
    /// the number of samples read by this call.
    pub fn scan_threshold(&mut self, plan: &ThresholdPlan, cap: f64) -> Result<Hit> {
        let start = self.position;
        match &plan.kind {
            ThresholdKind::Literal => loop {
                if self.position - start >= cap {
                    return Err(Error::WaitCapExceeded { cap });
                }
                self.advance_literal();
                if plan.stat.eval(&self.x_buf) > plan.t {
                    let (x, y) = (self.x_buf.clone(), self.y_buf.clone());
                    return Ok(self.record(x, y));
                }
            },
            kind => {
                let ln_p = plan.ln_p.expect("fast plans know the crossing probability");
                let gap = geometric_gap(&mut self.rng, ln_p);
                if !(gap <= cap) {
                    return Err(Error::WaitCapExceeded { cap });
                }
                self.position += gap;
                let (x, y) = self.draw_crossing(kind, plan.t)?;
                Ok(self.record(x, y))
            }
        }
    }

    fn draw_crossing(&mut self, kind: &ThresholdKind, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (dx, dy) = self.source.dims();
        let mut y = vec![0.0; dy];
        match kind {
            ThresholdKind::Gaussian {
                t_std,
                ln_q_t,
                gain,
                cond_sqrt,
            } => {
                let g = self.source.kernel.gaussian().unwrap();
                let ln_u = uniform_open(&mut self.rng).ln();
                let v = q_inv_ln(ln_q_t + ln_u)?.max(*t_std);
                let x = conditional_x(&mut self.rng, v, gain, cond_sqrt, dx);
                g.sample_y(&mut self.rng, &x, &mut y);
                Ok((x, y))
            }
            ThresholdKind::Additive => {
                let Kernel::Additive { rho, x_law, z_law } = &self.source.kernel else {
                    unreachable!()
                };
                let x = x_law.sample_above(&mut self.rng, t)?;
                y[0] = rho * x + (1.0 - rho * rho).max(0.0).sqrt() * z_law.sample(&mut self.rng);
                Ok((vec![x], y))
            }
            ThresholdKind::Binary => {
                let Kernel::Binary { p } = self.source.kernel else {
                    unreachable!()
                };
                let x = MarginalLaw::Rademacher.sample_above(&mut self.rng, t)?;
                y[0] = if uniform_open(&mut self.rng) < p { -x } else { x };
                Ok((vec![x], y))
            }
            ThresholdKind::BinaryBlock(tail) => {
                let (x, yv) = tail.sample(&mut self.rng);
                y[0] = yv;
                Ok((vec![x], y))
            }
            ThresholdKind::Literal => unreachable!(),
        }
    }

    /// Index of the largest statistic among the next `n` samples.
    pub fn scan_max(&mut self, plan: &MaxPlan, n: f64) -> Result<Hit> {
        if !(n >= 1.0) || n.fract() != 0.0 {
            return Err(Error::Config(format!("cannot take the maximum of {n} samples")));
        }
        let start = self.position;
        match &plan.kind {
            MaxKind::Literal => {
                if n > 2f64.powi(40) {
                    return Err(Error::Config("literal max scans are limited to 2^40 samples".into()));
                }
                let mut best: Option<(f64, SampleIndex, Vec<f64>, Vec<f64>)> = None;
                for _ in 0..n as u64 {
                    self.advance_literal();
                    let v = plan.stat.eval(&self.x_buf);
                    if best.as_ref().is_none_or(|b| v > b.0) {
                        best = Some((v, self.position, self.x_buf.clone(), self.y_buf.clone()));
                    }
                }
                let (_, idx, x, y) = best.unwrap();
                self.tape.push((idx, y));
                Ok(Hit { index: idx, x })
            }
            MaxKind::Gaussian { gain, cond_sqrt } => {
                let (dx, dy) = self.source.dims();
                let g = self.source.kernel.gaussian().unwrap();
                // Phi(M)^n = U
                let ln_u = uniform_open(&mut self.rng).ln();
                let tail = -(ln_u / n).exp_m1();
                let v = q_inv(tail).or_else(|_| q_inv_ln(tail.ln()))?;
                let offset = (uniform_open(&mut self.rng) * n).floor().min(n - 1.0) + 1.0;
                let x = conditional_x(&mut self.rng, v, gain, cond_sqrt, dx);
                let mut y = vec![0.0; dy];
                g.sample_y(&mut self.rng, &x, &mut y);
                let idx = start + offset;
                self.position = start + n;
                self.tape.push((idx, y));
                Ok(Hit { index: idx, x })
            }
        }
    }

    /// One hit per stopping set, in order ℓ = 0..d, each strictly after the
    /// previous. `cap` bounds each individual wait.
    pub fn scan_stopping(&mut self, plan: &StoppingPlan, cap: f64) -> Result<Vec<Hit>> {
        let d = plan.whitener.rows();
        let mut hits = Vec::with_capacity(d);
        for l in 0..d {
            let start = self.position;
            if plan.fast {
                let gap = geometric_gap(&mut self.rng, plan.ln_p);
                if !(gap <= cap) {
                    return Err(Error::WaitCapExceeded { cap });
                }
                self.position += gap;
                let w = self.draw_stopping_w(plan, l, d)?;
                let x = plan.unwhiten.mul_vec(&w);
                let g = self.source.kernel.gaussian().unwrap();
                let mut y = vec![0.0; g.dy()];
                g.sample_y(&mut self.rng, &x, &mut y);
                hits.push(self.record(x, y));
            } else {
                loop {
                    if self.position - start >= cap {
                        return Err(Error::WaitCapExceeded { cap });
                    }
                    self.advance_literal();
                    let w = plan.whitener.mul_vec(&self.x_buf);
                    if in_stopping_set(&w, l, plan.a, plan.b) {
                        let (x, y) = (self.x_buf.clone(), self.y_buf.clone());
                        hits.push(self.record(x, y));
                        break;
                    }
                }
            }
        }
        Ok(hits)
    }

    fn draw_stopping_w(&mut self, plan: &StoppingPlan, l: usize, d: usize) -> Result<Vec<f64>> {
        let mut w = vec![0.0; d];
        let ln_u = uniform_open(&mut self.rng).ln();
        let strong = q_inv_ln(ln_q(plan.a) + ln_u)?.max(plan.a);
        w[l] = if self.rng.next_u32() & 1 == 1 { strong } else { -strong };
        let qb = q(plan.b);
        for (j, wj) in w.iter_mut().enumerate() {
            if j != l {
                // inner-truncated normal on (-b, b) by inversion
                let u = uniform_open(&mut self.rng);
                *wj = q_inv(qb + u * (1.0 - 2.0 * qb))?.clamp(-plan.b, plan.b);
            }
        }
        Ok(w)
    }
}

/// Membership in A_ℓ.
pub fn in_stopping_set(w: &[f64], l: usize, a: f64, b: f64) -> bool {
    w[l].abs() > a
        && w
            .iter()
            .enumerate()
            .all(|(j, v)| j == l || v.abs() < b)
}

fn conditional_x(
    rng: &mut TrialRng,
    v: f64,
    gain: &[f64],
    cond_sqrt: &Matrix,
    dx: usize,
) -> Vec<f64> {
    if dx == 1 {
        return vec![gain[0] * v];
    }
    let z: Vec<f64> = (0..dx).map(|_| std_normal(rng)).collect();
    let r = cond_sqrt.mul_vec(&z);
    gain.iter().zip(&r).map(|(g, e)| g * v + e).collect()
}
