//! 64-bit FNV-1a over raw `f64` bit patterns.
//!
//! Two vectors hash equal only if (barring collisions) every element has the
//! same bits, so `0.0` and `-0.0` differ.

const OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a_bytes(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(OFFSET_BASIS, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn fnv1a_f64(values: &[f64]) -> u64 {
    values.iter().fold(OFFSET_BASIS, |h, v| {
        v.to_le_bytes()
            .iter()
            .fold(h, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
    })
}
