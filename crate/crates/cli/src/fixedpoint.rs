//! Fixed-point encoding for float workloads: shift by a large positive
//! offset, scale by 2^12, truncate to an unsigned 32-bit word. Words add
//! modulo 2^32 exactly like the aggregate's vector words, so decoding a sum
//! only needs the contributor count to strip the accumulated offsets.

use thiserror::Error;

/// 12 fractional bits.
pub const SCALE: f64 = 4096.0;

#[derive(Debug, Error, PartialEq)]
pub enum FixedPointError {
    #[error("offset must be positive and finite, got {0}")]
    BadOffset(f64),
    #[error("input {x} outside the representable range [{lo}, {hi})")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
}

/// Encoder/decoder around one fixed offset. The offset must cover the most
/// negative input; everything above `hi()` overflows the 32-bit word.
#[derive(Clone, Copy, Debug)]
pub struct FixedPointCodec {
    offset: f64,
}

impl FixedPointCodec {
    pub fn new(offset: f64) -> Result<Self, FixedPointError> {
        if !(offset > 0.0) || !offset.is_finite() {
            return Err(FixedPointError::BadOffset(offset));
        }
        Ok(FixedPointCodec { offset })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Smallest encodable input.
    pub fn lo(&self) -> f64 {
        -self.offset
    }

    /// One past the largest encodable input.
    pub fn hi(&self) -> f64 {
        (u32::MAX as f64 + 1.0) / SCALE - self.offset
    }

    /// `⌊(x + offset)·2^12⌋`; the shifted argument is non-negative for any
    /// in-range input, so truncation only ever rounds down.
    pub fn encode(&self, x: f64) -> Result<u32, FixedPointError> {
        let (lo, hi) = (self.lo(), self.hi());
        if !(x >= lo && x < hi) {
            return Err(FixedPointError::OutOfRange { x, lo, hi });
        }
        Ok(((x + self.offset) * SCALE) as u32)
    }

    pub fn decode(&self, w: u32) -> f64 {
        w as f64 / SCALE - self.offset
    }

    /// Decode an aggregate word holding the mod-2^32 sum of `k` encodings.
    /// Exact whenever the unreduced sum Σ(xᵢ + offset)·2^12 stays below
    /// 2^32; past that the word has genuinely wrapped and the count cannot
    /// recover it.
    pub fn decode_sum(&self, word: u32, k: u32) -> f64 {
        word as f64 / SCALE - k as f64 * self.offset
    }
}
