use rand::RngCore;
use rand_distr::{Binomial, Distribution};

use super::law::MarginalLaw;
use super::model::{xvec_sigma2, JointModel};
use super::rng::{std_normal, uniform_open};
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, sym_sqrt, Matrix};

/// Any jointly Gaussian model: X = C^{1/2} z, Y = B X + N w.
#[derive(Debug, Clone)]
pub(crate) struct GaussianKernel {
    pub cov_x: Matrix,
    pub x_sqrt: Matrix,
    pub regression: Matrix,
    pub noise_sqrt: Matrix,
}

impl GaussianKernel {
    pub fn dx(&self) -> usize {
        self.cov_x.rows()
    }

    pub fn dy(&self) -> usize {
        self.regression.rows()
    }

    fn scalar(rho: f64) -> Self {
        GaussianKernel {
            cov_x: Matrix::identity(1),
            x_sqrt: Matrix::identity(1),
            regression: Matrix::from_vec(1, 1, vec![rho]),
            noise_sqrt: Matrix::from_vec(1, 1, vec![(1.0 - rho * rho).max(0.0).sqrt()]),
        }
    }

    /// Y given X; `x` already drawn.
    pub fn sample_y<R: RngCore + ?Sized>(&self, rng: &mut R, x: &[f64], y: &mut [f64]) {
        let mean = self.regression.mul_vec(x);
        let dy = self.dy();
        if dy == 1 {
            y[0] = mean[0] + self.noise_sqrt[(0, 0)] * std_normal(rng);
            return;
        }
        let w: Vec<f64> = (0..dy).map(|_| std_normal(rng)).collect();
        let n = self.noise_sqrt.mul_vec(&w);
        for i in 0..dy {
            y[i] = mean[i] + n[i];
        }
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
        let dx = self.dx();
        if dx == 1 {
            x[0] = self.x_sqrt[(0, 0)] * std_normal(rng);
        } else {
            let z: Vec<f64> = (0..dx).map(|_| std_normal(rng)).collect();
            x.copy_from_slice(&self.x_sqrt.mul_vec(&z));
        }
        self.sample_y(rng, x, y);
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    Gaussian(GaussianKernel),
    Additive {
        rho: f64,
        x_law: MarginalLaw,
        z_law: MarginalLaw,
    },
    Binary {
        p: f64,
    },
    Block {
        inner: Box<Kernel>,
        m: usize,
    },
}

impl Kernel {
    pub fn compile(model: &JointModel) -> Result<Kernel> {
        model.validate()?;
        Ok(match model {
            JointModel::GaussianScalar { rho } => Kernel::Gaussian(GaussianKernel::scalar(*rho)),
            JointModel::AdditiveNoise {
                rho,
                x_law: MarginalLaw::StdNormal,
                z_law: MarginalLaw::StdNormal,
            } => Kernel::Gaussian(GaussianKernel::scalar(*rho)),
            JointModel::GaussianYVec { rho, sigma_y } => {
                let cond = sigma_y.matrix().sub(&Matrix::outer(rho, rho));
                Kernel::Gaussian(GaussianKernel {
                    cov_x: Matrix::identity(1),
                    x_sqrt: Matrix::identity(1),
                    regression: Matrix::column(rho),
                    noise_sqrt: psd_sqrt(&cond, 1e-12)?,
                })
            }
            JointModel::GaussianXVec { rho, sigma_x } => {
                let s2 = xvec_sigma2(rho, sigma_x)?.max(0.0);
                let inv = crate::linalg::invert(sigma_x.matrix())?;
                let b = inv.vec_mul(rho);
                Kernel::Gaussian(GaussianKernel {
                    cov_x: sigma_x.matrix().clone(),
                    x_sqrt: sym_sqrt(sigma_x.matrix())?,
                    regression: Matrix::from_vec(1, rho.len(), b),
                    noise_sqrt: Matrix::from_vec(1, 1, vec![s2.sqrt()]),
                })
            }
            JointModel::AdditiveNoise { rho, x_law, z_law } => Kernel::Additive {
                rho: *rho,
                x_law: *x_law,
                z_law: *z_law,
            },
            JointModel::DoublySymmetricBinary { p } => Kernel::Binary { p: *p },
            JointModel::BlockAveraged { inner, m } => Kernel::Block {
                inner: Box::new(Kernel::compile(inner)?),
                m: *m,
            },
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Kernel::Gaussian(g) => (g.dx(), g.dy()),
            Kernel::Block { inner, .. } => inner.dims(),
            _ => (1, 1),
        }
    }

    /// The Gaussian kernel with the same joint law, when there is one.
    /// Block averaging leaves a Gaussian law unchanged.
    pub fn gaussian(&self) -> Option<&GaussianKernel> {
        match self {
            Kernel::Gaussian(g) => Some(g),
            Kernel::Block { inner, .. } => inner.gaussian(),
            _ => None,
        }
    }

    /// One literal pair.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
        match self {
            Kernel::Gaussian(g) => g.sample(rng, x, y),
            Kernel::Additive { rho, x_law, z_law } => {
                x[0] = x_law.sample(rng);
                y[0] = rho * x[0] + (1.0 - rho * rho).max(0.0).sqrt() * z_law.sample(rng);
            }
            Kernel::Binary { p } => {
                x[0] = if rng.next_u32() & 1 == 1 { 1.0 } else { -1.0 };
                y[0] = if uniform_open(rng) < *p { -x[0] } else { x[0] };
            }
            Kernel::Block { inner, m } => {
                let (dx, dy) = inner.dims();
                let mut xi = vec![0.0; dx];
                let mut yi = vec![0.0; dy];
                x.iter_mut().for_each(|v| *v = 0.0);
                y.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..*m {
                    inner.sample(rng, &mut xi, &mut yi);
                    x.iter_mut().zip(&xi).for_each(|(a, b)| *a += b);
                    y.iter_mut().zip(&yi).for_each(|(a, b)| *a += b);
                }
                let s = 1.0 / (*m as f64).sqrt();
                x.iter_mut().for_each(|v| *v *= s);
                y.iter_mut().for_each(|v| *v *= s);
            }
        }
    }
}

/// Exact law of a block of `m` binary pairs conditioned on the block mean
/// of X exceeding a threshold.
#[derive(Debug, Clone)]
pub(crate) struct BinaryBlockTail {
    pub m: usize,
    pub flip: f64,
    /// smallest count of +1 entries that crosses
    pub first: usize,
    /// cumulative conditional probabilities for counts first..=m
    pub cdf: Vec<f64>,
    pub ln_p: f64,
}

impl BinaryBlockTail {
    pub fn new(m: usize, flip: f64, t: f64) -> Result<Self> {
        let mf = m as f64;
        let root = mf.sqrt();
        // X̄ = (2B - m)/sqrt(m) > t
        let mut first = ((mf + t * root) / 2.0).floor().max(-1.0) + 1.0;
        while first > 0.0 && (2.0 * (first - 1.0) - mf) / root > t {
            first -= 1.0;
        }
        while first <= mf && (2.0 * first - mf) / root <= t {
            first += 1.0;
        }
        if first > mf {
            return Err(Error::Config(format!(
                "block mean of {m} binary samples never exceeds t = {t}"
            )));
        }
        let first = first as usize;
        let ln_pmf: Vec<f64> = (first..=m)
            .map(|b| {
                libm::lgamma(mf + 1.0) - libm::lgamma(b as f64 + 1.0) - libm::lgamma((m - b) as f64 + 1.0)
                    - mf * std::f64::consts::LN_2
            })
            .collect();
        let top = ln_pmf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ln_pmf.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let cdf = w
            .iter()
            .map(|v| {
                acc += v / total;
                acc
            })
            .collect();
        Ok(BinaryBlockTail {
            m,
            flip,
            first,
            cdf,
            ln_p: top + total.ln(),
        })
    }

    /// (X̄, Ȳ) conditioned on crossing.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u = uniform_open(rng);
        let idx = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        let b = (self.first + idx) as u64;
        let m = self.m as u64;
        let f1 = draw_binomial(rng, b, self.flip);
        let f2 = draw_binomial(rng, m - b, self.flip);
        let sum_y = (b as f64 - 2.0 * f1 as f64) - ((m - b) as f64 - 2.0 * f2 as f64);
        let root = (self.m as f64).sqrt();
        ((2.0 * b as f64 - self.m as f64) / root, sum_y / root)
    }
}

fn draw_binomial<R: RngCore + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}
