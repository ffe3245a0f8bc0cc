use crate::error::Result;
use crate::linalg::{invert, CorrelationMatrix, Matrix};
use crate::protocol::{StoppingSetParams, WaitCap};
use crate::sources::{JointModel, Source};

/// Monte Carlo moments of W_J (columns W at J_1..J_d) for i.i.d. standard
/// normal X.
#[derive(Debug, Clone)]
pub struct StoppingSetStats {
    pub draws: usize,
    /// tr E[W Wᵀ] / d
    pub alpha_hat: f64,
    pub alpha_se: f64,
    /// tr E[(W Wᵀ)⁻¹] / d
    pub beta_hat: f64,
    pub beta_se: f64,
    /// entrywise mean and standard error of (W Wᵀ)⁻¹
    pub inv_mean: Matrix,
    pub inv_se: Matrix,
    pub min_diag: f64,
    pub max_off_diag: f64,
}

pub fn stopping_set_statistics(a: f64, b: f64, d: usize, draws: usize, seed: u64) -> Result<StoppingSetStats> {
    StoppingSetParams::from_thresholds(a, b, d, 1)?;
    let model = JointModel::GaussianXVec {
        rho: vec![0.0; d],
        sigma_x: CorrelationMatrix::identity(d),
    };
    let source = Source::new(&model)?;
    let plan = source.stopping_plan(&Matrix::identity(d), a, b)?;
    let cap = WaitCap::default().samples(plan.ln_p);
    let (mut sa, mut sa2, mut sb, mut sb2) = (0.0, 0.0, 0.0, 0.0);
    let mut s1 = Matrix::zeros(d, d);
    let mut s2 = Matrix::zeros(d, d);
    let (mut min_diag, mut max_off) = (f64::INFINITY, 0.0f64);
    for i in 0..draws {
        let mut stream = source.stream(seed, i as u64);
        let hits = stream.scan_stopping(&plan, cap)?;
        let mut w = Matrix::zeros(d, d);
        for (l, h) in hits.iter().enumerate() {
            for r in 0..d {
                w[(r, l)] = h.x[r];
                if r == l {
                    min_diag = min_diag.min(h.x[r].abs());
                } else {
                    max_off = max_off.max(h.x[r].abs());
                }
            }
        }
        let wwt = w.matmul(&w.transpose());
        let inv = invert(&wwt)?;
        let av = wwt.trace() / d as f64;
        let bv = inv.trace() / d as f64;
        sa += av;
        sa2 += av * av;
        sb += bv;
        sb2 += bv * bv;
        for r in 0..d {
            for c in 0..d {
                s1[(r, c)] += inv[(r, c)];
                s2[(r, c)] += inv[(r, c)].powi(2);
            }
        }
    }
    let n = draws as f64;
    let se = |s: f64, s2: f64| ((s2 / n - (s / n).powi(2)).max(0.0) / (n - 1.0)).sqrt();
    let mut inv_mean = Matrix::zeros(d, d);
    let mut inv_se = Matrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            inv_mean[(r, c)] = s1[(r, c)] / n;
            inv_se[(r, c)] = se(s1[(r, c)], s2[(r, c)]);
        }
    }
    Ok(StoppingSetStats {
        draws,
        alpha_hat: sa / n,
        alpha_se: se(sa, sa2),
        beta_hat: sb / n,
        beta_se: se(sb, sb2),
        inv_mean,
        inv_se,
        min_diag,
        max_off_diag: max_off,
    })
}
