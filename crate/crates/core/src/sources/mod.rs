//! Seeded samplers for the joint laws, exposed as per-trial pair streams.
//!
//! A stream skips ahead whenever the law of the selected sample is known
//! exactly (geometric waits, truncated normals, binomial block tails).
//! [`Source::literal`] forces a sample-by-sample scan instead.

mod kernel;
mod law;
mod model;
pub mod rng;
mod stream;

pub use law::MarginalLaw;
pub use model::{xvec_sigma2, JointModel};
pub use stream::{
    in_stopping_set, Hit, MaxPlan, PairStream, SampleIndex, Source, Statistic, StoppingPlan,
    ThresholdPlan,
};
