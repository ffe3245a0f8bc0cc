//! Normal tail functions, geometric entropy and order-statistic moments.

mod entropy;
mod extremes;
mod normal;
pub mod quad;

pub use entropy::{
    geometric_entropy, geometric_entropy_inv, geometric_entropy_inv_ln, geometric_entropy_ln,
};
pub use extremes::{max_normal_moments, max_normal_moments_pow2, MaxMoments};
pub use normal::{
    inverse_mills, ln_q, phi, q, q_inv, q_inv_ln, truncated_normal_moments, ThresholdMoments,
};
