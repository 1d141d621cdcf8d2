//! Software IEEE-754 binary16 codec.
//!
//! Encoding rounds a double directly to the binary16 grid with
//! round-to-nearest, ties-to-even. There is no intermediate `f32` step, so
//! there is no double rounding. Decoding is an exact widening.
//!
//! The codec is pure integer arithmetic and does not depend on native
//! half-precision support, so every platform produces the same bits.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HalfError {
    #[error("NaN cannot be encoded as a matrix value")]
    NaNInput,
}

/// A raw binary16 bit pattern: 1 sign bit, 5 exponent bits, 10 mantissa bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
#[repr(transparent)]
pub struct HalfBits(pub u16);

impl HalfBits {
    pub const ZERO: HalfBits = HalfBits(0x0000);
    pub const NEG_ZERO: HalfBits = HalfBits(0x8000);
    pub const ONE: HalfBits = HalfBits(0x3C00);
    pub const MAX: HalfBits = HalfBits(0x7BFF);
    pub const INFINITY: HalfBits = HalfBits(0x7C00);
    pub const NEG_INFINITY: HalfBits = HalfBits(0xFC00);
    /// Smallest positive normal value, 2^-14.
    pub const MIN_POSITIVE: HalfBits = HalfBits(0x0400);

    #[inline]
    pub const fn to_bits(self) -> u16 {
        self.0
    }

    #[inline]
    pub const fn is_nan(self) -> bool {
        self.0 & 0x7C00 == 0x7C00 && self.0 & 0x03FF != 0
    }

    #[inline]
    pub const fn is_finite(self) -> bool {
        self.0 & 0x7C00 != 0x7C00
    }

    /// Widen to `f64` through the precomputed lookup table.
    ///
    /// Bit-identical to [`decode_half`]; the table is filled from it.
    #[inline]
    pub fn to_f64(self) -> f64 {
        decode_table()[self.0 as usize]
    }
}

impl fmt::Debug for HalfBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HalfBits({:#06x} = {})", self.0, decode_half(*self))
    }
}

const F64_MANTISSA_BITS: u32 = 52;
const F64_EXP_BIAS: i32 = 1023;
const HALF_MANTISSA_BITS: u32 = 10;
const HALF_EXP_BIAS: i32 = 15;

/// Round `x` to the nearest binary16 value, ties to even.
///
/// Magnitudes at or beyond 65520 (the midpoint between 65504 and the next
/// grid point 65536) become infinity. Values below half the smallest
/// subnormal flush to a signed zero.
pub fn encode_half(x: f64) -> Result<HalfBits, HalfError> {
    if x.is_nan() {
        return Err(HalfError::NaNInput);
    }
    let bits = x.to_bits();
    let sign = ((bits >> 48) & 0x8000) as u16;
    let biased = ((bits >> F64_MANTISSA_BITS) & 0x7FF) as i32;
    let fraction = bits & ((1u64 << F64_MANTISSA_BITS) - 1);

    if biased == 0x7FF {
        return Ok(HalfBits(sign | 0x7C00));
    }
    if biased == 0 {
        // Zero, or an f64 subnormal, which is far below the binary16 range.
        return Ok(HalfBits(sign));
    }

    let exp = biased - F64_EXP_BIAS;
    let significand = fraction | (1u64 << F64_MANTISSA_BITS);

    if exp > HALF_EXP_BIAS {
        return Ok(HalfBits(sign | 0x7C00));
    }

    if exp >= 1 - HALF_EXP_BIAS {
        // Normal range. Rounding may carry into the exponent and, at the top
        // of the range, produce exactly the infinity pattern 0x7C00.
        let shift = F64_MANTISSA_BITS - HALF_MANTISSA_BITS;
        let kept = significand >> shift;
        let rest = significand & ((1u64 << shift) - 1);
        let half_exp = (exp + HALF_EXP_BIAS) as u64;
        let mut out = (half_exp << HALF_MANTISSA_BITS) + (kept & 0x3FF);
        if round_up(kept, rest, shift) {
            out += 1;
        }
        return Ok(HalfBits(sign | out as u16));
    }

    // Subnormal range: count units of 2^-24.
    let shift = (F64_MANTISSA_BITS as i32 - 24 - exp) as u32;
    if shift > 60 {
        return Ok(HalfBits(sign));
    }
    let kept = significand >> shift;
    let rest = significand & ((1u64 << shift) - 1);
    let mut out = kept;
    if round_up(kept, rest, shift) {
        out += 1;
    }
    Ok(HalfBits(sign | out as u16))
}

#[inline]
fn round_up(kept: u64, rest: u64, shift: u32) -> bool {
    let halfway = 1u64 << (shift - 1);
    rest > halfway || (rest == halfway && kept & 1 == 1)
}

/// Exact widening of a binary16 pattern to `f64`. NaN patterns decode to NaN.
pub fn decode_half(h: HalfBits) -> f64 {
    let sign = ((h.0 as u64) & 0x8000) << 48;
    let exp = ((h.0 >> HALF_MANTISSA_BITS) & 0x1F) as i32;
    let mantissa = (h.0 & 0x3FF) as u64;

    let magnitude = match exp {
        0 if mantissa == 0 => 0,
        0 => {
            // Subnormal: normalise so the leading one becomes implicit.
            let lead = 63 - mantissa.leading_zeros() as i32;
            let f64_exp = (lead - 24 + F64_EXP_BIAS) as u64;
            let frac = (mantissa ^ (1 << lead)) << (F64_MANTISSA_BITS as i32 - lead);
            (f64_exp << F64_MANTISSA_BITS) | frac
        }
        0x1F if mantissa == 0 => 0x7FFu64 << F64_MANTISSA_BITS,
        0x1F => (0x7FFu64 << F64_MANTISSA_BITS) | (mantissa << 42) | (1 << 51),
        _ => {
            let f64_exp = (exp - HALF_EXP_BIAS + F64_EXP_BIAS) as u64;
            (f64_exp << F64_MANTISSA_BITS) | (mantissa << (F64_MANTISSA_BITS - HALF_MANTISSA_BITS))
        }
    };
    f64::from_bits(sign | magnitude)
}

fn decode_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=u16::MAX).map(|b| decode_half(HalfBits(b))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc(x: f64) -> u16 {
        encode_half(x).unwrap().0
    }

    #[test]
    fn exact_patterns() {
        assert_eq!(enc(1.0), 0x3C00);
        assert_eq!(enc(0.0), 0x0000);
        assert_eq!(enc(-0.0), 0x8000);
        assert_eq!(enc(65504.0), 0x7BFF);
        assert_eq!(enc(-2.0), 0xC000);
        assert_eq!(enc(6.103515625e-5), 0x0400);
    }

    #[test]
    fn rounds_point_one() {
        assert_eq!(enc(0.1), 0x2E66);
    }

    #[test]
    fn overflow_goes_to_infinity() {
        assert_eq!(enc(65519.99), 0x7BFF);
        // Tie between 65504 and 65536 goes to the even pattern, which is inf.
        assert_eq!(enc(65520.0), 0x7C00);
        assert_eq!(enc(1e10), 0x7C00);
        assert_eq!(enc(-1e10), 0xFC00);
        assert_eq!(enc(f64::INFINITY), 0x7C00);
        assert_eq!(enc(f64::NEG_INFINITY), 0xFC00);
    }

    #[test]
    fn subnormals_and_underflow() {
        let tiny = 2f64.powi(-24);
        assert_eq!(enc(tiny), 0x0001);
        assert_eq!(enc(tiny * 0.5), 0x0000); // tie to even
        assert_eq!(enc(tiny * 0.5000001), 0x0001);
        assert_eq!(enc(tiny * 1.5), 0x0002); // tie to even
        assert_eq!(enc(tiny * 2.5), 0x0002);
        assert_eq!(enc(-tiny * 0.25), 0x8000);
        assert_eq!(enc(f64::MIN_POSITIVE), 0x0000);
        assert_eq!(enc(2f64.powi(-14) - tiny * 0.5), 0x0400); // carries into normal
    }

    #[test]
    fn nan_rejected() {
        assert_eq!(encode_half(f64::NAN), Err(HalfError::NaNInput));
    }

    #[test]
    fn decode_known() {
        assert_eq!(decode_half(HalfBits(0x3C00)), 1.0);
        assert_eq!(decode_half(HalfBits(0x0001)), 2f64.powi(-24));
        assert_eq!(decode_half(HalfBits(0x03FF)), 1023.0 * 2f64.powi(-24));
        assert_eq!(decode_half(HalfBits(0x7BFF)), 65504.0);
        assert_eq!(decode_half(HalfBits(0x7C00)), f64::INFINITY);
        assert!(decode_half(HalfBits(0x7E00)).is_nan());
        assert!(HalfBits(0x7E00).is_nan());
        assert_eq!(decode_half(HalfBits(0x8000)).to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn table_matches_decoder() {
        for b in 0..=u16::MAX {
            let h = HalfBits(b);
            assert_eq!(h.to_f64().to_bits(), decode_half(h).to_bits());
        }
    }
}
