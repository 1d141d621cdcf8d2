//! Plain-text dense vectors: one decimal `f64` per line.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write followed by a read reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::sparse::DenseVector;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },
}

/// Parse vector text. Blank lines are skipped.
pub fn parse_vector(text: &str) -> Result<DenseVector, VectorError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t.parse::<f64>().map_err(|_| VectorError::Parse {
            line: k + 1,
            text: t.to_string(),
        })?;
        out.push(v);
    }
    Ok(DenseVector::from(out))
}

pub fn format_vector(v: &DenseVector) -> String {
    let mut s = String::with_capacity(v.len() * 20);
    for x in v.as_slice() {
        let _ = writeln!(s, "{x:?}");
    }
    s
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<DenseVector, VectorError> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn write_vector(v: &DenseVector, path: impl AsRef<Path>) -> Result<(), VectorError> {
    std::fs::write(path, format_vector(v))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let v = DenseVector::from(vec![0.1, -0.0, 1e-310, 123456789.123, f64::MAX, 1.0 / 3.0]);
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_vector("1\n\n2.5\n").unwrap().as_slice(), &[1.0, 2.5]);
        assert!(matches!(
            parse_vector("1\nabc\n"),
            Err(VectorError::Parse { line: 2, .. })
        ));
    }
}
