use crate::error::Result;
use crate::protocol::{LedgerMode, Transcript, WaitCap};
use crate::sources::{JointModel, SampleIndex, Source};

/// Knobs shared by every scheme.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProtocolOptions {
    pub ledger: LedgerMode,
    pub wait_cap: WaitCap,
    /// Charge d²⌈√k⌉ bits for sending Σ_X and let Bob use the quantized
    /// matrix (vector-X scheme only).
    pub charge_sigma_x: bool,
    /// Scan streams sample by sample instead of skipping ahead.
    pub literal: bool,
}

impl ProtocolOptions {
    pub(crate) fn source(&self, model: &JointModel) -> Result<Source> {
        let s = Source::new(model)?;
        Ok(if self.literal { s.literal() } else { s })
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: Vec<f64>,
    /// Same estimate without quantizing Alice's payload, when the scheme has one.
    pub unquantized: Option<Vec<f64>>,
    pub bits_expected: f64,
    pub bits_realized: Option<u64>,
    pub samples_consumed: SampleIndex,
    pub seed: u64,
    pub trial: u64,
    /// ln Pr of the selection event under the source, when known.
    pub crossing_ln_p: Option<f64>,
    pub transcript: Transcript,
}

impl EstimateReport {
    pub(crate) fn from_transcript(
        estimate: Vec<f64>,
        transcript: Transcript,
        seed: u64,
        trial: u64,
    ) -> Self {
        EstimateReport {
            estimate,
            unquantized: None,
            bits_expected: transcript.ledger.total_expected(),
            bits_realized: transcript.ledger.total_realized(),
            samples_consumed: transcript.samples_consumed,
            seed,
            trial,
            crossing_ln_p: None,
            transcript,
        }
    }

    /// ‖estimate - truth‖²
    pub fn squared_error(&self, truth: &[f64]) -> f64 {
        self.estimate
            .iter()
            .zip(truth)
            .map(|(e, t)| (e - t).powi(2))
            .sum()
    }
}

/// A scheme compiled for one parameter point. `run` is pure in (seed, trial).
pub trait Estimator: Send + Sync {
    fn label(&self) -> &'static str;
    /// The correlations being estimated.
    fn truth(&self) -> Vec<f64>;
    /// Configured expected bit budget.
    fn budget(&self) -> f64;
    fn run(&self, seed: u64, trial: u64) -> Result<EstimateReport>;
}
