//! Golomb codes for geometric index gaps.

use crate::error::{Error, Result};

/// Golomb parameter ceil(-1 / log2(1 - p)) for success probability exp(ln_p).
/// Returned as f64 because it reaches ~1/p.
pub fn golomb_parameter_ln(ln_p: f64) -> f64 {
    let p = ln_p.exp();
    let neg_ln_q = if p == 0.0 {
        0.0
    } else if p < 0.5 {
        -(-p).ln_1p()
    } else {
        -(-ln_p.exp_m1()).ln()
    };
    if neg_ln_q == 0.0 {
        // ln2 / p without forming p
        return (std::f64::consts::LN_2.ln() - ln_p).exp().ceil();
    }
    (std::f64::consts::LN_2 / neg_ln_q).ceil().max(1.0)
}

pub fn golomb_parameter(p: f64) -> f64 {
    golomb_parameter_ln(p.ln())
}

/// Codeword length of `n ≥ 0` under parameter `m`: unary quotient plus a
/// truncated-binary remainder.
pub fn golomb_length(n: f64, m: f64) -> u64 {
    debug_assert!(n >= 0.0 && m >= 1.0);
    let quotient = (n / m).floor();
    let rem = n - quotient * m;
    let unary = quotient as u64 + 1;
    if m == 1.0 {
        return unary;
    }
    let b = m.log2().ceil();
    // 2^b - m values of the remainder get b-1 bits
    let short = 2f64.powf(b) - m;
    unary + if rem < short { b as u64 - 1 } else { b as u64 }
}

/// Append-only bit buffer.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Low `width` bits of `v`, most significant first.
    pub fn push_bits(&mut self, v: u64, width: u32) {
        for i in (0..width).rev() {
            self.bits.push((v >> i) & 1 == 1);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader {
            bits: &self.bits,
            pos: 0,
        }
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn read(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| Error::Contract("read past end of bitstream".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read()? as u64;
        }
        Ok(v)
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

fn ceil_log2(m: u64) -> u32 {
    64 - (m - 1).leading_zeros()
}

/// Encode `n` with Golomb parameter `m`; returns the number of bits written.
pub fn golomb_encode(w: &mut BitWriter, n: u64, m: u64) -> usize {
    assert!(m >= 1, "Golomb parameter must be positive");
    let start = w.len();
    let q = n / m;
    let r = n % m;
    for _ in 0..q {
        w.push(true);
    }
    w.push(false);
    if m > 1 {
        let b = ceil_log2(m);
        let short = (1u64 << b) - m;
        if r < short {
            w.push_bits(r, b - 1);
        } else {
            w.push_bits(r + short, b);
        }
    }
    w.len() - start
}

pub fn golomb_decode(r: &mut BitReader<'_>, m: u64) -> Result<u64> {
    let mut q = 0u64;
    while r.read()? {
        q += 1;
    }
    if m == 1 {
        return Ok(q);
    }
    let b = ceil_log2(m);
    let short = (1u64 << b) - m;
    let mut v = r.read_bits(b - 1)?;
    if v >= short {
        v = (v << 1) | r.read()? as u64;
        v -= short;
    }
    Ok(q * m + v)
}
