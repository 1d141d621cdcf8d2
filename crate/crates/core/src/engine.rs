//! Sparse matrix-vector products with a fixed reduction order.
//!
//! Three algorithms are provided:
//!
//! * [`spmv_rowchunk`]: one lane group per row. Lane `l` of a group of
//!   `lane_width` lanes accumulates entries `start + l`, `start + l + lane_width`,
//!   ... of its row; the lane partials are then combined by a stride-halving
//!   binary tree (`p[l] += p[l + w]` for `w = lane_width / 2, ..., 1`).
//! * [`spmv_scatter_baseline`]: column-major scatter into per-chunk scratch
//!   vectors, merged in chunk order.
//! * [`spmv_oracle`]: sequential left-to-right accumulation per row.
//!
//! Products and sums are always `f64`, whatever the storage precision. The
//! output of each engine is a pure function of the matrix, the input vector
//! and the algorithm parameter (`lane_width` or `chunk_count`); the worker
//! count only changes how rows or chunks are spread over threads.

use std::thread;

use thiserror::Error;

use crate::half::HalfBits;
use crate::sparse::{ColIndices, CscMatrix, CsrMatrix, DenseVector, Values};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("input vector has length {actual}, matrix has {expected} columns")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
}

pub const MAX_LANE_WIDTH: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowChunkConfig {
    lane_width: usize,
    workers: usize,
}

impl RowChunkConfig {
    pub fn new(lane_width: usize, workers: usize) -> Result<Self, EngineError> {
        if !lane_width.is_power_of_two() || lane_width > MAX_LANE_WIDTH {
            return Err(EngineError::InvalidConfig(format!(
                "lane width {lane_width} must be a power of two in [1, {MAX_LANE_WIDTH}]"
            )));
        }
        if workers == 0 {
            return Err(EngineError::InvalidConfig(
                "worker count must be at least 1".into(),
            ));
        }
        Ok(RowChunkConfig {
            lane_width,
            workers,
        })
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Default for RowChunkConfig {
    fn default() -> Self {
        RowChunkConfig {
            lane_width: 32,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScatterConfig {
    chunk_count: usize,
    workers: usize,
}

impl ScatterConfig {
    pub fn new(chunk_count: usize, workers: usize) -> Result<Self, EngineError> {
        if chunk_count == 0 {
            return Err(EngineError::InvalidConfig(
                "chunk count must be at least 1".into(),
            ));
        }
        if workers == 0 {
            return Err(EngineError::InvalidConfig(
                "worker count must be at least 1".into(),
            ));
        }
        Ok(ScatterConfig {
            chunk_count,
            workers,
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.chunk_count
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

/// Contiguous column ranges: chunk `k` is `[bounds[k], bounds[k + 1])`.
///
/// Boundaries depend only on `cols` and `chunk_count`; sizes differ by at
/// most one.
pub fn chunk_bounds(cols: usize, chunk_count: usize) -> Vec<usize> {
    (0..=chunk_count)
        .map(|k| ((k as u128 * cols as u128) / chunk_count as u128) as usize)
        .collect()
}

trait Widen: Copy + Sync {
    fn widen(self) -> f64;
}

impl Widen for HalfBits {
    #[inline(always)]
    fn widen(self) -> f64 {
        self.to_f64()
    }
}

impl Widen for f32 {
    #[inline(always)]
    fn widen(self) -> f64 {
        self as f64
    }
}

impl Widen for f64 {
    #[inline(always)]
    fn widen(self) -> f64 {
        self
    }
}

trait Index: Copy + Sync {
    fn index(self) -> usize;
}

impl Index for u16 {
    #[inline(always)]
    fn index(self) -> usize {
        self as usize
    }
}

impl Index for u32 {
    #[inline(always)]
    fn index(self) -> usize {
        self as usize
    }
}

fn check_len(expected: usize, x: &DenseVector) -> Result<(), EngineError> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(EngineError::DimensionMismatch {
            expected,
            actual: x.len(),
        })
    }
}

/// Split `out` into at most `workers` contiguous blocks and run `f` on each
/// with the index of its first element.
fn for_each_block<F>(out: &mut [f64], workers: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let n = out.len();
    if workers <= 1 || n <= 1 {
        f(0, out);
        return;
    }
    let block = n.div_ceil(workers);
    thread::scope(|s| {
        for (k, chunk) in out.chunks_mut(block).enumerate() {
            let f = &f;
            s.spawn(move || f(k * block, chunk));
        }
    });
}

/// Lane-group-per-row product `y = A x`.
///
/// Empty rows are skipped and stay `0.0`. With `lane_width == 1` the result
/// is bit-identical to [`spmv_oracle`].
pub fn spmv_rowchunk(
    m: &CsrMatrix,
    x: &DenseVector,
    cfg: &RowChunkConfig,
) -> Result<DenseVector, EngineError> {
    check_len(m.cols(), x)?;
    let mut y = DenseVector::zeros(m.rows());
    let row_ptr = m.row_ptr();
    let x = x.as_slice();
    let lanes = cfg.lane_width;
    macro_rules! run {
        ($idx:expr, $vals:expr) => {
            for_each_block(y.as_mut_slice(), cfg.workers, |first, out| {
                rowchunk_rows(row_ptr, $idx, $vals, x, lanes, first, out)
            })
        };
    }
    match (m.col_indices(), m.values()) {
        (ColIndices::U16(c), Values::Half(v)) => run!(c, v),
        (ColIndices::U16(c), Values::Single(v)) => run!(c, v),
        (ColIndices::U16(c), Values::Double(v)) => run!(c, v),
        (ColIndices::U32(c), Values::Half(v)) => run!(c, v),
        (ColIndices::U32(c), Values::Single(v)) => run!(c, v),
        (ColIndices::U32(c), Values::Double(v)) => run!(c, v),
    }
    Ok(y)
}

fn rowchunk_rows<I: Index, V: Widen>(
    row_ptr: &[u64],
    cols: &[I],
    vals: &[V],
    x: &[f64],
    lanes: usize,
    first_row: usize,
    out: &mut [f64],
) {
    let mask = lanes - 1;
    let mut partial = vec![0.0f64; lanes];
    for (k, y) in out.iter_mut().enumerate() {
        let row = first_row + k;
        let (start, end) = (row_ptr[row] as usize, row_ptr[row + 1] as usize);
        if start == end {
            continue;
        }
        // Only lanes that receive at least one entry are live.
        let live = (end - start).min(lanes);
        partial[..live].fill(0.0);
        for (t, j) in (start..end).enumerate() {
            partial[t & mask] += vals[j].widen() * x[cols[j].index()];
        }
        *y = tree_reduce(&mut partial, lanes, live);
    }
}

/// Stride-halving tree over `lanes` partials, of which only the first `live`
/// are non-zero.
///
/// A live lane whose partner is dead still gets `+ 0.0`, matching the full
/// tree bit for bit, signed zeros included.
#[inline]
fn tree_reduce(partial: &mut [f64], lanes: usize, mut live: usize) -> f64 {
    let mut w = lanes / 2;
    while w >= 1 {
        for l in 0..live.min(w) {
            let partner = if l + w < live { partial[l + w] } else { 0.0 };
            partial[l] += partner;
        }
        live = live.min(w);
        w /= 2;
    }
    partial[0]
}

/// Column-major scatter product `y = A x` over private per-chunk scratch
/// vectors.
///
/// Chunk `k` owns columns `chunk_bounds(cols, chunk_count)[k..k + 2]`. With a
/// single chunk the result equals [`spmv_oracle_column_major`] bit for bit.
pub fn spmv_scatter_baseline(
    m: &CscMatrix,
    x: &DenseVector,
    cfg: &ScatterConfig,
) -> Result<DenseVector, EngineError> {
    check_len(m.cols(), x)?;
    let bounds = chunk_bounds(m.cols(), cfg.chunk_count);
    let x = x.as_slice();
    let rows = m.rows();
    let col_ptr = m.col_ptr();
    let row_idx = m.row_indices();

    let scratch_for = |k: usize| -> Vec<f64> {
        let range = bounds[k]..bounds[k + 1];
        match m.values() {
            Values::Half(v) => scatter_chunk(col_ptr, row_idx, v, x, range, rows),
            Values::Single(v) => scatter_chunk(col_ptr, row_idx, v, x, range, rows),
            Values::Double(v) => scatter_chunk(col_ptr, row_idx, v, x, range, rows),
        }
    };

    let mut scratch: Vec<Vec<f64>> = vec![Vec::new(); cfg.chunk_count];
    let workers = cfg.workers.min(cfg.chunk_count);
    if workers <= 1 {
        for (k, s) in scratch.iter_mut().enumerate() {
            *s = scratch_for(k);
        }
    } else {
        let per_worker = cfg.chunk_count.div_ceil(workers);
        thread::scope(|s| {
            for (w, group) in scratch.chunks_mut(per_worker).enumerate() {
                let scratch_for = &scratch_for;
                s.spawn(move || {
                    for (i, slot) in group.iter_mut().enumerate() {
                        *slot = scratch_for(w * per_worker + i);
                    }
                });
            }
        });
    }

    if scratch.len() == 1 {
        return Ok(DenseVector::from(scratch.pop().unwrap_or_default()));
    }
    let mut y = DenseVector::zeros(rows);
    for_each_block(y.as_mut_slice(), cfg.workers, |first, out| {
        for chunk in &scratch {
            for (yi, s) in out.iter_mut().zip(&chunk[first..]) {
                *yi += *s;
            }
        }
    });
    Ok(y)
}

fn scatter_chunk<V: Widen>(
    col_ptr: &[u64],
    row_idx: &[u32],
    vals: &[V],
    x: &[f64],
    cols: std::ops::Range<usize>,
    rows: usize,
) -> Vec<f64> {
    let mut scratch = vec![0.0f64; rows];
    for c in cols {
        let xc = x[c];
        for j in col_ptr[c] as usize..col_ptr[c + 1] as usize {
            scratch[row_idx[j] as usize] += vals[j].widen() * xc;
        }
    }
    scratch
}

/// Reference product: each row summed left to right from `0.0`.
pub fn spmv_oracle(m: &CsrMatrix, x: &DenseVector) -> Result<DenseVector, EngineError> {
    check_len(m.cols(), x)?;
    let x = x.as_slice();
    let values = m.values();
    let cols = m.col_indices();
    let y = (0..m.rows())
        .map(|r| {
            m.row_range(r)
                .fold(0.0f64, |acc, j| acc + values.get(j) * x[cols.get(j)])
        })
        .collect::<Vec<_>>();
    Ok(DenseVector::from(y))
}

/// Reference product in column-major order: `y[r] += a[r][c] * x[c]` for
/// columns in increasing order, rows in increasing order within a column.
pub fn spmv_oracle_column_major(
    m: &CscMatrix,
    x: &DenseVector,
) -> Result<DenseVector, EngineError> {
    check_len(m.cols(), x)?;
    let mut y = vec![0.0f64; m.rows()];
    for (r, c, v) in m.iter() {
        y[r] += v * x.as_slice()[c];
    }
    Ok(DenseVector::from(y))
}
