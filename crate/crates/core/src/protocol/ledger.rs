use std::fmt;
use std::str::FromStr;

use super::golomb::{golomb_decode, golomb_encode, golomb_length, golomb_parameter_ln, BitWriter};
use crate::error::{Error, Result};
use crate::sources::SampleIndex;
use crate::statmath::geometric_entropy_ln;

/// How transmitted objects are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LedgerMode {
    /// Entropy accounting: an index with crossing probability p costs h_g(p).
    #[default]
    ExpectedOnly,
    /// Also record the length of an actual Golomb codeword.
    Realized,
}

impl FromStr for LedgerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "expected" | "expected_only" => Ok(LedgerMode::ExpectedOnly),
            "realized" => Ok(LedgerMode::Realized),
            other => Err(Error::Config(format!("unknown ledger mode '{other}'"))),
        }
    }
}

impl fmt::Display for LedgerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LedgerMode::ExpectedOnly => "expected",
            LedgerMode::Realized => "realized",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub label: &'static str,
    pub expected_bits: f64,
    pub realized_bits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BitLedger {
    pub mode: LedgerMode,
    pub entries: Vec<LedgerEntry>,
}

// Gaps up to this size go through the real encoder and decoder.
const CODEC_LIMIT: f64 = 9.0e15;

impl BitLedger {
    pub fn new(mode: LedgerMode) -> Self {
        BitLedger {
            mode,
            entries: Vec::new(),
        }
    }

    /// A fixed-length field of `bits` bits.
    pub fn charge_fixed(&mut self, label: &'static str, bits: u64) {
        let realized = (self.mode == LedgerMode::Realized).then_some(bits);
        self.entries.push(LedgerEntry {
            label,
            expected_bits: bits as f64,
            realized_bits: realized,
        });
    }

    /// An index gap `gap ≥ 1` drawn geometrically with success probability
    /// exp(ln_p). In realized mode the gap is Golomb coded and decoded back.
    pub fn charge_index(&mut self, label: &'static str, gap: f64, ln_p: f64) -> Result<()> {
        if !(gap >= 1.0) {
            return Err(Error::Contract(format!("index gap {gap} must be at least 1")));
        }
        let expected = geometric_entropy_ln(ln_p);
        let realized = match self.mode {
            LedgerMode::ExpectedOnly => None,
            LedgerMode::Realized => {
                let m = golomb_parameter_ln(ln_p);
                let n = gap - 1.0;
                if n <= CODEC_LIMIT && m <= CODEC_LIMIT {
                    let mut w = BitWriter::new();
                    let len = golomb_encode(&mut w, n as u64, m as u64);
                    let back = golomb_decode(&mut w.reader(), m as u64)?;
                    if back != n as u64 {
                        return Err(Error::Contract(format!("Golomb round trip {n} -> {back}")));
                    }
                    Some(len as u64)
                } else {
                    Some(golomb_length(n, m))
                }
            }
        };
        self.entries.push(LedgerEntry {
            label,
            expected_bits: expected,
            realized_bits: realized,
        });
        Ok(())
    }

    pub fn total_expected(&self) -> f64 {
        self.entries.iter().map(|e| e.expected_bits).sum()
    }

    /// None unless every entry carries a realized length.
    pub fn total_realized(&self) -> Option<u64> {
        if self.mode == LedgerMode::ExpectedOnly {
            return None;
        }
        self.entries.iter().map(|e| e.realized_bits).sum()
    }
}

/// Everything Alice sent in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub label: &'static str,
    pub indices: Vec<SampleIndex>,
    pub quantized_values: Vec<f64>,
    pub ledger: BitLedger,
    pub samples_consumed: SampleIndex,
}

impl Transcript {
    pub fn new(label: &'static str, mode: LedgerMode) -> Self {
        Transcript {
            label,
            indices: Vec::new(),
            quantized_values: Vec::new(),
            ledger: BitLedger::new(mode),
            samples_consumed: 0.0,
        }
    }

    /// `label<TAB>J1,J2,...<TAB>expected_bits<TAB>realized_bits|NA`
    pub fn to_record(&self) -> String {
        let idx: Vec<String> = self.indices.iter().map(|j| format!("{j}")).collect();
        let realized = match self.ledger.total_realized() {
            Some(r) => r.to_string(),
            None => "NA".to_string(),
        };
        format!(
            "{}\t{}\t{}\t{}",
            self.label,
            idx.join(","),
            self.ledger.total_expected(),
            realized
        )
    }
}

/// A parsed transcript record.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptRecord {
    pub label: String,
    pub indices: Vec<SampleIndex>,
    pub expected_bits: f64,
    pub realized_bits: Option<u64>,
}

impl FromStr for TranscriptRecord {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            line: 1,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
        if fields.len() != 4 {
            return Err(bad("expected 4 tab-separated fields"));
        }
        let indices = if fields[1].is_empty() {
            Vec::new()
        } else {
            fields[1]
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|_| bad("bad index")))
                .collect::<Result<_>>()?
        };
        let expected_bits = fields[2].parse().map_err(|_| bad("bad expected bits"))?;
        let realized_bits = match fields[3] {
            "NA" => None,
            s => Some(s.parse().map_err(|_| bad("bad realized bits"))?),
        };
        Ok(TranscriptRecord {
            label: fields[0].to_string(),
            indices,
            expected_bits,
            realized_bits,
        })
    }
}
