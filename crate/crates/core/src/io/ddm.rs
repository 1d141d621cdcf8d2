//! DDM binary matrix format, version 1.
//!
//! All integers are little-endian.
//!
//! | offset | size | field                                         |
//! |-------:|-----:|-----------------------------------------------|
//! | 0      | 4    | magic `b"DDM1"`                               |
//! | 4      | 1    | version (1)                                   |
//! | 5      | 1    | value precision: 0 half, 1 single, 2 double   |
//! | 6      | 1    | column index width in bytes: 2 or 4           |
//! | 7      | 1    | reserved, 0                                   |
//! | 8      | 8    | rows                                          |
//! | 16     | 8    | cols                                          |
//! | 24     | 8    | nnz                                           |
//! | 32     |      | `rows + 1` row pointers, u64 each             |
//! |        |      | `nnz` column indices, index width each        |
//! |        |      | `nnz` values, IEEE bit patterns               |
//!
//! The file length must equal the size implied by the header.

use std::path::Path;

use thiserror::Error;

use crate::half::HalfBits;
use crate::sparse::{ColIndices, CsrMatrix, IndexWidth, ValidationReport, ValuePrecision, Values};

pub const MAGIC: [u8; 4] = *b"DDM1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Error)]
pub enum DdmError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected \"DDM1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported DDM version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("truncated file: header implies {expected} bytes, found {actual}")]
    TruncatedFile { expected: u128, actual: usize },
    #[error("file has {actual} bytes, header implies {expected}")]
    TrailingBytes { expected: u128, actual: usize },
    #[error("decoded matrix is invalid: {0}")]
    ValidationFailure(ValidationReport),
}

fn precision_code(p: ValuePrecision) -> u8 {
    match p {
        ValuePrecision::Half => 0,
        ValuePrecision::Single => 1,
        ValuePrecision::Double => 2,
    }
}

/// Serialise `m` to DDM bytes.
pub fn encode_ddm(m: &CsrMatrix) -> Vec<u8> {
    let nnz = m.nnz();
    let width = m.index_width();
    let precision = m.precision();
    let size =
        HEADER_LEN + 8 * (m.rows() + 1) + nnz * (width.byte_width() + precision.byte_width());
    let mut out = Vec::with_capacity(size);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&[
        VERSION,
        precision_code(precision),
        width.byte_width() as u8,
        0,
    ]);
    for n in [m.rows() as u64, m.cols() as u64, nnz as u64] {
        out.extend_from_slice(&n.to_le_bytes());
    }
    for p in m.row_ptr() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    match m.col_indices() {
        ColIndices::U16(c) => c
            .iter()
            .for_each(|i| out.extend_from_slice(&i.to_le_bytes())),
        ColIndices::U32(c) => c
            .iter()
            .for_each(|i| out.extend_from_slice(&i.to_le_bytes())),
    }
    match m.values() {
        Values::Half(v) => v
            .iter()
            .for_each(|h| out.extend_from_slice(&h.0.to_le_bytes())),
        Values::Single(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_bits().to_le_bytes())),
        Values::Double(v) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_bits().to_le_bytes())),
    }
    debug_assert_eq!(out.len(), size);
    out
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().expect("8-byte slice"))
}

/// Parse DDM bytes into a validated matrix.
pub fn decode_ddm(bytes: &[u8]) -> Result<CsrMatrix, DdmError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(DdmError::BadMagic(bytes[..4].try_into().unwrap()));
        }
        return Err(DdmError::TruncatedFile {
            expected: HEADER_LEN as u128,
            actual: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(DdmError::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(DdmError::UnsupportedVersion(bytes[4]));
    }
    let precision = match bytes[5] {
        0 => ValuePrecision::Half,
        1 => ValuePrecision::Single,
        2 => ValuePrecision::Double,
        other => {
            return Err(DdmError::InvalidHeader(format!(
                "value precision code {other}"
            )))
        }
    };
    let width = match bytes[6] {
        2 => IndexWidth::U16,
        4 => IndexWidth::U32,
        other => return Err(DdmError::InvalidHeader(format!("index width {other}"))),
    };
    if bytes[7] != 0 {
        return Err(DdmError::InvalidHeader(format!(
            "reserved byte {}",
            bytes[7]
        )));
    }
    let rows = le_u64(&bytes[8..16]);
    let cols = le_u64(&bytes[16..24]);
    let nnz = le_u64(&bytes[24..32]);

    let expected = HEADER_LEN as u128
        + 8 * (rows as u128 + 1)
        + nnz as u128 * (width.byte_width() + precision.byte_width()) as u128;
    if (bytes.len() as u128) < expected {
        return Err(DdmError::TruncatedFile {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() as u128 > expected {
        return Err(DdmError::TrailingBytes {
            expected,
            actual: bytes.len(),
        });
    }
    let (rows, cols, nnz) = (
        usize::try_from(rows).map_err(|_| DdmError::InvalidHeader(format!("{rows} rows")))?,
        usize::try_from(cols).map_err(|_| DdmError::InvalidHeader(format!("{cols} cols")))?,
        nnz as usize,
    );

    let mut at = HEADER_LEN;
    let mut take = |n: usize| {
        let s = &bytes[at..at + n];
        at += n;
        s
    };
    let row_ptr: Vec<u64> = take(8 * (rows + 1)).chunks_exact(8).map(le_u64).collect();
    let col_indices = match width {
        IndexWidth::U16 => ColIndices::U16(
            take(2 * nnz)
                .chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]))
                .collect(),
        ),
        IndexWidth::U32 => ColIndices::U32(
            take(4 * nnz)
                .chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .collect(),
        ),
    };
    let raw = take(nnz * precision.byte_width());
    let values = match precision {
        ValuePrecision::Half => Values::Half(
            raw.chunks_exact(2)
                .map(|b| HalfBits(u16::from_le_bytes([b[0], b[1]])))
                .collect(),
        ),
        ValuePrecision::Single => Values::Single(
            raw.chunks_exact(4)
                .map(|b| f32::from_bits(u32::from_le_bytes(b.try_into().unwrap())))
                .collect(),
        ),
        ValuePrecision::Double => Values::Double(
            raw.chunks_exact(8)
                .map(|b| f64::from_bits(le_u64(b)))
                .collect(),
        ),
    };

    let m = CsrMatrix::from_parts_unchecked(rows, cols, row_ptr, col_indices, values);
    let report = m.validate();
    if !report.is_valid() {
        return Err(DdmError::ValidationFailure(report));
    }
    Ok(m)
}

pub fn write_ddm(m: &CsrMatrix, path: impl AsRef<Path>) -> Result<(), DdmError> {
    std::fs::write(path, encode_ddm(m))?;
    Ok(())
}

pub fn read_ddm(path: impl AsRef<Path>) -> Result<CsrMatrix, DdmError> {
    decode_ddm(&std::fs::read(path)?)
}
