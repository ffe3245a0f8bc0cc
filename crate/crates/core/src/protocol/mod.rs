//! Two-party protocol pieces: index selection, quantizers, bit allocation and
//! the ledger that charges each message.

mod alloc;
pub mod golomb;
mod ledger;
mod quantize;
mod select;

pub use alloc::{allocate_bits_pareto, allocate_bits_xvec, ParetoAllocation, StoppingSetParams};
pub use ledger::{BitLedger, LedgerEntry, LedgerMode, Transcript, TranscriptRecord};
pub use quantize::{
    quantize_correlation_matrix, quantize_pareto_value, quantize_w_matrix, UniformQuantizer,
};
pub use select::{select_max_index, select_stopping_set_indices, select_threshold_index, WaitCap};
