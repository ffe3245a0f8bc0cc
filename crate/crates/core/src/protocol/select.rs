use super::ledger::Transcript;
use crate::error::{Error, Result};
use crate::sources::{Hit, MaxPlan, PairStream, StoppingPlan, ThresholdPlan};

/// Bound on a single wait: `factor * ceil(1/p)` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitCap {
    pub factor: f64,
}

impl Default for WaitCap {
    fn default() -> Self {
        WaitCap { factor: 1024.0 }
    }
}

impl WaitCap {
    pub fn samples(&self, ln_p: f64) -> f64 {
        self.factor * (-ln_p).exp().ceil()
    }
}

/// Alice sends the position of the largest of the next `n = 2^k` samples with
/// a fixed-length k-bit code.
pub fn select_max_index(
    stream: &mut PairStream<'_>,
    plan: &MaxPlan,
    n: f64,
    transcript: &mut Transcript,
) -> Result<Hit> {
    let k = n.log2();
    if !(n >= 2.0) || k.fract() != 0.0 {
        return Err(Error::Config(format!(
            "max selection needs n a power of two, at least 2; got {n}"
        )));
    }
    let hit = stream.scan_max(plan, n)?;
    transcript.indices.push(hit.index);
    transcript.ledger.charge_fixed("max_index", k as u64);
    transcript.samples_consumed = stream.position();
    Ok(hit)
}

/// Alice sends the index of the first sample whose statistic exceeds the
/// plan's threshold. `design_ln_p` is the crossing probability the index code
/// is built for.
pub fn select_threshold_index(
    stream: &mut PairStream<'_>,
    plan: &ThresholdPlan,
    design_ln_p: f64,
    cap: &WaitCap,
    transcript: &mut Transcript,
) -> Result<Hit> {
    let start = stream.position();
    let hit = stream.scan_threshold(plan, cap.samples(design_ln_p))?;
    transcript.indices.push(hit.index);
    transcript
        .ledger
        .charge_index("threshold_index", hit.index - start, design_ln_p)?;
    transcript.samples_consumed = stream.position();
    Ok(hit)
}

/// d successive stopping-set hits; each index is coded relative to the
/// previous one.
pub fn select_stopping_set_indices(
    stream: &mut PairStream<'_>,
    plan: &StoppingPlan,
    cap: &WaitCap,
    transcript: &mut Transcript,
) -> Result<Vec<Hit>> {
    let start = stream.position();
    let hits = stream.scan_stopping(plan, cap.samples(plan.ln_p))?;
    let mut prev = start;
    for h in &hits {
        transcript.indices.push(h.index);
        transcript
            .ledger
            .charge_index("stopping_index", h.index - prev, plan.ln_p)?;
        prev = h.index;
    }
    transcript.samples_consumed = stream.position();
    Ok(hits)
}
