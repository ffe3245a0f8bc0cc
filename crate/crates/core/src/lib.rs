//! Estimating the correlation between two remote Gaussian (or
//! Gaussianized) sources when one party may send the other only a few bits.
//!
//! Alice scans her i.i.d. samples and describes one index (plus, for the
//! vector schemes, a coarsely quantized matrix); Bob reads his sample at that
//! index and forms the estimate. The crate simulates both sides, charges
//! every message on a [`protocol::BitLedger`], evaluates the closed-form
//! variance and Fisher-information theory, and runs seeded parallel Monte
//! Carlo sweeps that compare the two.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod protocol;
pub mod sources;
pub mod statmath;

pub use error::{Error, Result};
