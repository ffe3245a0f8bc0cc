use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::statmath::q_inv;

/// Generator used for every trial.
pub type TrialRng = ChaCha8Rng;

/// Independent stream for `trial` under `seed`. The ChaCha stream id is the
/// trial number, so trials can run in any order on any thread.
pub fn substream(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform on the open interval (0, 1).
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by inversion of the upper tail.
pub fn std_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    q_inv(uniform_open(rng)).expect("uniform_open is inside (0, 1)")
}

/// Geometric waiting time on {1, 2, ...} for success probability exp(ln_p).
/// Infinite when the wait is beyond f64 range.
pub fn geometric_gap<R: RngCore + ?Sized>(rng: &mut R, ln_p: f64) -> f64 {
    let e = -uniform_open(rng).ln();
    if ln_p >= 0.0 {
        return 1.0;
    }
    let p = ln_p.exp();
    // rate = -ln(1 - p)
    let rate = if p == 0.0 {
        0.0
    } else if p < 0.5 {
        -(-p).ln_1p()
    } else {
        -(-ln_p.exp_m1()).ln()
    };
    let gap = if rate > 0.0 {
        (e / rate).ceil()
    } else {
        (e.ln() - ln_p).exp().ceil()
    };
    gap.max(1.0)
}
