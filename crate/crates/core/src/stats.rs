//! Row-length statistics of a CSR matrix.

use std::collections::BTreeMap;

use crate::sparse::CsrMatrix;

/// Row length below which a lane group of 32 is under-occupied.
pub const SHORT_ROW_THRESHOLD: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct RowStats {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    /// Row length to number of rows with that length, including length 0.
    pub row_length_histogram: BTreeMap<usize, usize>,
    /// `(length, fraction of non-empty rows with length <= length)` at each
    /// distinct non-empty length. Empty when every row is empty.
    pub cumulative: Vec<(usize, f64)>,
    /// `None` when every row is empty.
    pub mean_nnz_per_nonempty_row: Option<f64>,
    /// Fraction of non-empty rows with fewer than 32 entries.
    pub frac_nonempty_below_32: Option<f64>,
    pub empty_row_fraction: f64,
    pub nnz_ratio: f64,
}

impl RowStats {
    pub fn nonempty_rows(&self) -> usize {
        self.rows - self.row_length_histogram.get(&0).copied().unwrap_or(0)
    }
}

pub fn compute_stats(m: &CsrMatrix) -> RowStats {
    let mut histogram = BTreeMap::new();
    for r in 0..m.rows() {
        *histogram.entry(m.row_len(r)).or_insert(0usize) += 1;
    }
    let empty = histogram.get(&0).copied().unwrap_or(0);
    let nonempty = m.rows() - empty;

    let mut cumulative = Vec::new();
    let mut seen = 0usize;
    let mut short = 0usize;
    for (&len, &count) in histogram.range(1..) {
        seen += count;
        if len < SHORT_ROW_THRESHOLD {
            short += count;
        }
        cumulative.push((len, seen as f64 / nonempty as f64));
    }

    let cells = m.rows() as f64 * m.cols() as f64;
    RowStats {
        rows: m.rows(),
        cols: m.cols(),
        nnz: m.nnz(),
        row_length_histogram: histogram,
        cumulative,
        mean_nnz_per_nonempty_row: (nonempty > 0).then(|| m.nnz() as f64 / nonempty as f64),
        frac_nonempty_below_32: (nonempty > 0).then(|| short as f64 / nonempty as f64),
        empty_row_fraction: if m.rows() == 0 {
            0.0
        } else {
            empty as f64 / m.rows() as f64
        },
        nnz_ratio: if cells == 0.0 {
            0.0
        } else {
            m.nnz() as f64 / cells
        },
    }
}
