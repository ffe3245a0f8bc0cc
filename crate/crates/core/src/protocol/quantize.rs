use super::alloc::StoppingSetParams;
use crate::error::{Error, Result};
use crate::linalg::{CorrelationMatrix, Matrix};

/// `levels` equal cells on [lo, hi] with midpoint reconstruction; inputs
/// outside the range land in the end cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer {
    pub lo: f64,
    pub hi: f64,
    pub levels: f64,
}

impl UniformQuantizer {
    pub fn new(lo: f64, hi: f64, levels: f64) -> Self {
        debug_assert!(hi > lo && levels >= 1.0);
        UniformQuantizer { lo, hi, levels }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.levels
    }

    pub fn cell(&self, x: f64) -> f64 {
        ((x - self.lo) / self.width())
            .floor()
            .clamp(0.0, self.levels - 1.0)
    }

    pub fn reconstruct(&self, cell: f64) -> f64 {
        self.lo + (cell + 0.5) * self.width()
    }

    pub fn quantize(&self, x: f64) -> f64 {
        self.reconstruct(self.cell(x))
    }
}

/// Diagonal entries: magnitude clamped to [a, c], the double segment ±[a, c]
/// cut into 2^k_q cells. Off-diagonal entries: [-b, b] into 2^k_q cells.
/// Returns Ŵ and the bits charged, d² k_q.
pub fn quantize_w_matrix(w: &Matrix, params: &StoppingSetParams) -> (Matrix, u64) {
    let d = params.d;
    assert_eq!((w.rows(), w.cols()), (d, d), "W must be d x d");
    let levels = 2f64.powi(params.k_q as i32);
    let c = params.c();
    // one side of the double segment gets half the cells
    let half = UniformQuantizer::new(params.a, c, levels / 2.0);
    let off = UniformQuantizer::new(-params.b, params.b, levels);
    let mut out = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let v = w[(i, j)];
            out[(i, j)] = if i == j {
                let m = v.abs().clamp(params.a, c);
                v.signum() * half.quantize(m)
            } else {
                off.quantize(v.clamp(-params.b, params.b))
            };
        }
    }
    (out, (d * d) as u64 * params.k_q as u64)
}

/// Quantize a crossing value x > t on [t, u] with 2^k_q cells; x > u maps to u.
pub fn quantize_pareto_value(x: f64, t: f64, u: f64, k_q: u32) -> Result<(f64, u32)> {
    if !(x > t) {
        return Err(Error::Contract(format!(
            "value {x} has not crossed the threshold {t}"
        )));
    }
    if !(u > t) {
        return Err(Error::Contract(format!("upper limit {u} must exceed t = {t}")));
    }
    if x > u {
        return Ok((u, k_q));
    }
    let q = UniformQuantizer::new(t, u, 2f64.powi(k_q as i32));
    Ok((q.quantize(x), k_q))
}

/// Off-diagonal entries of Σ quantized on [-1, 1] with 2^bits cells, for the
/// opt-in charge of sending Σ_X. Fails if the result is not a valid
/// correlation matrix.
pub fn quantize_correlation_matrix(sigma: &CorrelationMatrix, bits: u32) -> Result<CorrelationMatrix> {
    let d = sigma.dim();
    let q = UniformQuantizer::new(-1.0, 1.0, 2f64.powi(bits as i32));
    let mut m = sigma.matrix().clone();
    for i in 0..d {
        for j in i + 1..d {
            let v = q.quantize(m[(i, j)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CorrelationMatrix::new(m)
}
