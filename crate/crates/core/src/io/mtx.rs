//! Matrix Market coordinate reader.
//!
//! Supports `real`, `double` and `integer` fields with `general`,
//! `symmetric` or `skew-symmetric` symmetry. Symmetric files are expanded
//! to general form by mirroring every off-diagonal entry.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use crate::sparse::{coo_to_csr, CooMatrix, CsrMatrix, IndexWidth, SparseError, ValuePrecision};

#[derive(Debug, Error)]
pub enum MtxError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported Matrix Market feature: {0}")]
    UnsupportedFeature(String),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_banner(line: &str) -> Result<Symmetry, MtxError> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") || tokens.len() != 5 {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(MtxError::UnsupportedFeature(format!(
            "object {:?}",
            tokens[1]
        )));
    }
    if tokens[2] != "coordinate" {
        return Err(MtxError::UnsupportedFeature(format!(
            "format {:?}",
            tokens[2]
        )));
    }
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(MtxError::UnsupportedFeature(format!("field {other:?}"))),
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        "skew-symmetric" => Ok(Symmetry::SkewSymmetric),
        other => Err(MtxError::UnsupportedFeature(format!("symmetry {other:?}"))),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MtxError>
where
    T::Err: std::fmt::Display,
{
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|e| parse_err(line, format!("bad {what} {tok:?}: {e}")))
}

/// Parse a coordinate Matrix Market stream into a coordinate list with
/// 0-based indices, in file order (mirrored entries follow their source).
pub fn parse_matrix_market(reader: impl Read) -> Result<CooMatrix, MtxError> {
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l));

    let symmetry = match lines.next() {
        Some((_, line)) => parse_banner(&line?)?,
        None => return Err(parse_err(1, "empty file")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut read = 0usize;
    let mut last_line = 1;
    for (lineno, line) in lines {
        let line = line?;
        last_line = lineno;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut toks = text.split_whitespace();
        let Some((rows, cols, nnz)) = size else {
            let dims = (
                field(toks.next(), lineno, "row count")?,
                field(toks.next(), lineno, "column count")?,
                field(toks.next(), lineno, "entry count")?,
            );
            if toks.next().is_some() {
                return Err(parse_err(lineno, "size line has extra fields"));
            }
            size = Some(dims);
            entries.reserve(dims.2.min(1 << 20));
            continue;
        };
        if read >= nnz {
            return Err(parse_err(
                lineno,
                format!("more than the declared {nnz} entries"),
            ));
        }
        let i: usize = field(toks.next(), lineno, "row index")?;
        let j: usize = field(toks.next(), lineno, "column index")?;
        let v: f64 = field(toks.next(), lineno, "value")?;
        if toks.next().is_some() {
            return Err(parse_err(lineno, "entry has extra fields"));
        }
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(
                lineno,
                format!("index ({i}, {j}) outside 1..={rows} x 1..={cols}"),
            ));
        }
        let (r, c) = (i - 1, j - 1);
        read += 1;
        entries.push((r, c, v));
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric if r != c => entries.push((c, r, v)),
            Symmetry::SkewSymmetric if r == c => {
                return Err(parse_err(
                    lineno,
                    "skew-symmetric matrix with a diagonal entry",
                ))
            }
            Symmetry::SkewSymmetric => entries.push((c, r, -v)),
            Symmetry::Symmetric => {}
        }
    }

    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if read != nnz {
        return Err(parse_err(
            last_line,
            format!("declared {nnz} entries, found {read}"),
        ));
    }
    Ok(CooMatrix::new(rows, cols, entries)?)
}

/// Read a Matrix Market file straight into canonical CSR.
pub fn read_matrix_market(
    path: impl AsRef<Path>,
    precision: ValuePrecision,
    width: IndexWidth,
) -> Result<CsrMatrix, MtxError> {
    let coo = parse_matrix_market(std::fs::File::open(path)?)?;
    Ok(coo_to_csr(&coo, precision, width)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CooMatrix, MtxError> {
        parse_matrix_market(s.as_bytes())
    }

    #[test]
    fn general_two_entries() {
        let coo =
            parse("%%MatrixMarket matrix coordinate real general\n% c\n2 3 2\n1 1 1.5\n2 3 -2e0\n")
                .unwrap();
        assert_eq!(coo.entries(), &[(0, 0, 1.5), (1, 2, -2.0)]);
        let m = coo_to_csr(&coo, ValuePrecision::Double, IndexWidth::U16).unwrap();
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn symmetric_expands() {
        let coo = parse(
            "%%MatrixMarket matrix coordinate integer symmetric\n3 3 3\n1 1 4\n3 1 2\n3 2 5\n",
        )
        .unwrap();
        let mut e = coo.entries().to_vec();
        e.sort_by_key(|&(r, c, _)| (r, c));
        assert_eq!(
            e,
            vec![
                (0, 0, 4.0),
                (0, 2, 2.0),
                (1, 2, 5.0),
                (2, 0, 2.0),
                (2, 1, 5.0)
            ]
        );
    }

    #[test]
    fn skew_symmetric_negates() {
        let coo =
            parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n").unwrap();
        assert_eq!(coo.entries(), &[(1, 0, 3.0), (0, 1, -3.0)]);
        assert!(matches!(
            parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n1 1 3\n"),
            Err(MtxError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn unsupported_features() {
        for banner in [
            "%%MatrixMarket matrix coordinate complex general",
            "%%MatrixMarket matrix coordinate pattern general",
            "%%MatrixMarket matrix array real general",
            "%%MatrixMarket matrix coordinate real hermitian",
            "%%MatrixMarket vector coordinate real general",
        ] {
            let r = parse(&format!("{banner}\n1 1 1\n1 1 1\n"));
            assert!(
                matches!(r, Err(MtxError::UnsupportedFeature(_))),
                "{banner}"
            );
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("garbage\n", 1),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n",
                3,
            ),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
                3,
            ),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 2\n",
                4,
            ),
            (
                "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
                3,
            ),
            ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
            (
                "%%MatrixMarket matrix coordinate real general\n% only comments\n",
                2,
            ),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(MtxError::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_entries_are_rejected_at_compression() {
        let coo =
            parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n").unwrap();
        assert!(matches!(
            coo_to_csr(&coo, ValuePrecision::Double, IndexWidth::U32),
            Err(SparseError::DuplicateEntry { .. })
        ));
    }
}
