//! COO, CSR and CSC storage for dose deposition matrices.
//!
//! Values carry a precision tag (binary16, binary32 or binary64 storage);
//! every kernel widens them to `f64` at the point of use. Column indices of
//! a CSR matrix are stored as 16- or 32-bit integers. Row pointers are always
//! 64-bit so even the largest clinical matrices (nnz near 2e9) cannot wrap.
//!
//! Canonical CSR has strictly increasing column indices within each row.
//! Duplicate `(row, col)` entries are rejected, never summed.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::half::{encode_half, HalfBits};

/// Storage precision of matrix values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValuePrecision {
    Half,
    Single,
    Double,
}

impl ValuePrecision {
    pub const ALL: [ValuePrecision; 3] = [Self::Half, Self::Single, Self::Double];

    pub const fn byte_width(self) -> usize {
        match self {
            Self::Half => 2,
            Self::Single => 4,
            Self::Double => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Self::Half => "half",
            Self::Single => "single",
            Self::Double => "double",
        }
    }
}

impl fmt::Display for ValuePrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Integer width of stored column indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexWidth {
    U16,
    U32,
}

impl IndexWidth {
    pub const fn byte_width(self) -> usize {
        match self {
            Self::U16 => 2,
            Self::U32 => 4,
        }
    }

    /// Exclusive upper bound on the column count this width can address.
    pub const fn max_dim(self) -> u64 {
        match self {
            Self::U16 => 1 << 16,
            Self::U32 => 1 << 32,
        }
    }

    pub const fn fits(self, cols: usize) -> bool {
        (cols as u64) < self.max_dim()
    }

    /// Narrowest width able to index `cols` columns.
    pub const fn narrowest_for(cols: usize) -> IndexWidth {
        if Self::U16.fits(cols) {
            Self::U16
        } else {
            Self::U32
        }
    }
}

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("{cols} columns cannot be indexed with {width:?} column indices")]
    IndexOverflow { cols: usize, width: IndexWidth },
    #[error("value {value} at ({row}, {col}) overflows {precision} precision")]
    ValueOverflow {
        row: usize,
        col: usize,
        value: f64,
        precision: ValuePrecision,
    },
    #[error("non-finite value {value} at ({row}, {col})")]
    NonFiniteValue { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{rows} rows exceed the 32-bit row index range of CSC storage")]
    RowCountOverflow { rows: usize },
    #[error("invalid matrix: {0}")]
    Invalid(ValidationReport),
}

/// Typed value storage shared by CSR and CSC matrices.
#[derive(Debug, Clone)]
pub enum Values {
    Half(Vec<HalfBits>),
    Single(Vec<f32>),
    Double(Vec<f64>),
}

impl Values {
    pub fn precision(&self) -> ValuePrecision {
        match self {
            Values::Half(_) => ValuePrecision::Half,
            Values::Single(_) => ValuePrecision::Single,
            Values::Double(_) => ValuePrecision::Double,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Values::Half(v) => v.len(),
            Values::Single(v) => v.len(),
            Values::Double(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value `j` widened exactly to `f64`.
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        match self {
            Values::Half(v) => v[j].to_f64(),
            Values::Single(v) => v[j] as f64,
            Values::Double(v) => v[j],
        }
    }

    /// Raw IEEE bit pattern of value `j`, zero-extended.
    pub fn bits(&self, j: usize) -> u64 {
        match self {
            Values::Half(v) => v[j].0 as u64,
            Values::Single(v) => v[j].to_bits() as u64,
            Values::Double(v) => v[j].to_bits(),
        }
    }

    fn with_capacity(precision: ValuePrecision, n: usize) -> Values {
        match precision {
            ValuePrecision::Half => Values::Half(Vec::with_capacity(n)),
            ValuePrecision::Single => Values::Single(Vec::with_capacity(n)),
            ValuePrecision::Double => Values::Double(Vec::with_capacity(n)),
        }
    }

    /// Round `x` to this container's precision and append it.
    ///
    /// Fails with the target precision's infinity, or on NaN input; the
    /// caller attaches coordinates.
    fn push_rounded(&mut self, x: f64) -> Result<(), ConvertFailure> {
        if !x.is_finite() {
            return Err(ConvertFailure::NonFinite);
        }
        match self {
            Values::Half(v) => {
                let h = encode_half(x).map_err(|_| ConvertFailure::NonFinite)?;
                if !h.is_finite() {
                    return Err(ConvertFailure::Overflow);
                }
                v.push(h);
            }
            Values::Single(v) => {
                let s = x as f32;
                if s.is_infinite() {
                    return Err(ConvertFailure::Overflow);
                }
                v.push(s);
            }
            Values::Double(v) => v.push(x),
        }
        Ok(())
    }

    /// New container holding `self[order[k]]` at position `k`, bit for bit.
    fn gather(&self, order: &[usize]) -> Values {
        match self {
            Values::Half(v) => Values::Half(order.iter().map(|&j| v[j]).collect()),
            Values::Single(v) => Values::Single(order.iter().map(|&j| v[j]).collect()),
            Values::Double(v) => Values::Double(order.iter().map(|&j| v[j]).collect()),
        }
    }

    fn first_non_finite(&self) -> Option<usize> {
        (0..self.len()).find(|&j| !self.get(j).is_finite())
    }
}

/// Bitwise equality: `-0.0 != 0.0`, identical NaN payloads compare equal.
impl PartialEq for Values {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Values::Half(a), Values::Half(b)) => a == b,
            (Values::Single(a), Values::Single(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Values::Double(a), Values::Double(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            _ => false,
        }
    }
}

enum ConvertFailure {
    NonFinite,
    Overflow,
}

/// Column (CSR) or row (CSC) index storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColIndices {
    U16(Vec<u16>),
    U32(Vec<u32>),
}

impl ColIndices {
    pub fn width(&self) -> IndexWidth {
        match self {
            ColIndices::U16(_) => IndexWidth::U16,
            ColIndices::U32(_) => IndexWidth::U32,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColIndices::U16(v) => v.len(),
            ColIndices::U32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> usize {
        match self {
            ColIndices::U16(v) => v[j] as usize,
            ColIndices::U32(v) => v[j] as usize,
        }
    }

    /// Narrow or widen every index. Caller guarantees each index fits.
    fn from_usizes(width: IndexWidth, idx: impl Iterator<Item = usize>) -> ColIndices {
        match width {
            IndexWidth::U16 => ColIndices::U16(idx.map(|c| c as u16).collect()),
            IndexWidth::U32 => ColIndices::U32(idx.map(|c| c as u32).collect()),
        }
    }
}

/// One violated CSR invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RowPtrLength {
        expected: usize,
        actual: usize,
    },
    RowPtrStart {
        value: u64,
    },
    NonMonotoneRowPtr {
        row: usize,
        start: u64,
        end: u64,
    },
    RowPtrEnd {
        expected: u64,
        actual: u64,
    },
    LengthMismatch {
        col_indices: usize,
        values: usize,
    },
    IndexOutOfRange {
        position: usize,
        index: usize,
        bound: usize,
    },
    UnsortedIndices {
        major: usize,
        position: usize,
    },
    IndexWidthTooNarrow {
        width: IndexWidth,
        dim: usize,
    },
    NonFiniteValue {
        position: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowPtrLength { expected, actual } => {
                write!(f, "pointer array has length {actual}, expected {expected}")
            }
            Violation::RowPtrStart { value } => write!(f, "pointer array starts at {value}, not 0"),
            Violation::NonMonotoneRowPtr { row, start, end } => {
                write!(f, "non-monotone pointer at {row}: {start} > {end}")
            }
            Violation::RowPtrEnd { expected, actual } => {
                write!(
                    f,
                    "pointer array ends at {actual}, expected nnz = {expected}"
                )
            }
            Violation::LengthMismatch {
                col_indices,
                values,
            } => {
                write!(f, "{col_indices} indices but {values} values")
            }
            Violation::IndexOutOfRange {
                position,
                index,
                bound,
            } => {
                write!(
                    f,
                    "index {index} at position {position} out of range [0, {bound})"
                )
            }
            Violation::UnsortedIndices { major, position } => write!(
                f,
                "indices of {major} not strictly increasing at position {position}"
            ),
            Violation::IndexWidthTooNarrow { width, dim } => {
                write!(f, "{width:?} indices cannot address dimension {dim}")
            }
            Violation::NonFiniteValue { position } => {
                write!(f, "non-finite value at position {position}")
            }
        }
    }
}

/// Outcome of [`validate`]: empty means the matrix is canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Shared compressed-storage checks. `minor_of(j)` reads index `j`.
fn check_compressed(
    major_dim: usize,
    minor_dim: usize,
    ptr: &[u64],
    index_len: usize,
    minor_of: impl Fn(usize) -> usize,
    values: &Values,
) -> ValidationReport {
    let mut violations = Vec::new();
    let nnz = index_len;

    if index_len != values.len() {
        violations.push(Violation::LengthMismatch {
            col_indices: index_len,
            values: values.len(),
        });
    }
    if ptr.len() != major_dim + 1 {
        violations.push(Violation::RowPtrLength {
            expected: major_dim + 1,
            actual: ptr.len(),
        });
        return ValidationReport { violations };
    }
    if ptr[0] != 0 {
        violations.push(Violation::RowPtrStart { value: ptr[0] });
    }
    let mut structured = ptr[0] == 0;
    for (row, w) in ptr.windows(2).enumerate() {
        if w[0] > w[1] {
            violations.push(Violation::NonMonotoneRowPtr {
                row,
                start: w[0],
                end: w[1],
            });
            structured = false;
        }
    }
    if ptr[major_dim] != nnz as u64 {
        violations.push(Violation::RowPtrEnd {
            expected: nnz as u64,
            actual: ptr[major_dim],
        });
        structured = false;
    }

    for j in 0..nnz {
        let c = minor_of(j);
        if c >= minor_dim {
            violations.push(Violation::IndexOutOfRange {
                position: j,
                index: c,
                bound: minor_dim,
            });
        }
    }
    if structured {
        for major in 0..major_dim {
            let (s, e) = (ptr[major] as usize, ptr[major + 1] as usize);
            for j in s + 1..e {
                if minor_of(j) <= minor_of(j - 1) {
                    violations.push(Violation::UnsortedIndices { major, position: j });
                }
            }
        }
    }
    if let Some(position) = values.first_non_finite() {
        violations.push(Violation::NonFiniteValue { position });
    }
    ValidationReport { violations }
}

/// Compressed-sparse-row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<u64>,
    col_indices: ColIndices,
    values: Values,
}

impl CsrMatrix {
    /// Build from raw arrays, rejecting anything [`validate`] flags.
    pub fn new(
        rows: usize,
        cols: usize,
        row_ptr: Vec<u64>,
        col_indices: ColIndices,
        values: Values,
    ) -> Result<Self, SparseError> {
        let m = Self::from_parts_unchecked(rows, cols, row_ptr, col_indices, values);
        let report = m.validate();
        if report.is_valid() {
            Ok(m)
        } else {
            Err(SparseError::Invalid(report))
        }
    }

    /// Build without checking invariants. Kernels assume a valid matrix and
    /// may panic on one that is not; run [`validate`] first.
    pub fn from_parts_unchecked(
        rows: usize,
        cols: usize,
        row_ptr: Vec<u64>,
        col_indices: ColIndices,
        values: Values,
    ) -> Self {
        CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_indices,
            values,
        }
    }

    pub fn identity(
        n: usize,
        precision: ValuePrecision,
        width: IndexWidth,
    ) -> Result<Self, SparseError> {
        let entries = (0..n).map(|i| (i, i, 1.0)).collect();
        coo_to_csr(&CooMatrix::new(n, n, entries)?, precision, width)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_ptr(&self) -> &[u64] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &ColIndices {
        &self.col_indices
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn precision(&self) -> ValuePrecision {
        self.values.precision()
    }

    pub fn index_width(&self) -> IndexWidth {
        self.col_indices.width()
    }

    #[inline]
    pub fn row_range(&self, row: usize) -> Range<usize> {
        self.row_ptr[row] as usize..self.row_ptr[row + 1] as usize
    }

    pub fn row_len(&self, row: usize) -> usize {
        (self.row_ptr[row + 1] - self.row_ptr[row]) as usize
    }

    /// Entries in row-major order, values widened to `f64`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            self.row_range(r)
                .map(move |j| (r, self.col_indices.get(j), self.values.get(j)))
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = check_compressed(
            self.rows,
            self.cols,
            &self.row_ptr,
            self.col_indices.len(),
            |j| self.col_indices.get(j),
            &self.values,
        );
        let width = self.index_width();
        if !width.fits(self.cols) {
            report.violations.push(Violation::IndexWidthTooNarrow {
                width,
                dim: self.cols,
            });
        }
        report
    }

    /// Re-store with another precision and index width.
    ///
    /// Values are re-rounded from their exact `f64` widening, so widening
    /// conversions are lossless and narrowing rounds to nearest even.
    pub fn convert(
        &self,
        precision: ValuePrecision,
        width: IndexWidth,
    ) -> Result<Self, SparseError> {
        if !width.fits(self.cols) {
            return Err(SparseError::IndexOverflow {
                cols: self.cols,
                width,
            });
        }
        let values = if precision == self.precision() {
            self.values.clone()
        } else {
            let mut out = Values::with_capacity(precision, self.nnz());
            for (r, c, v) in self.iter() {
                push_checked(&mut out, r, c, v)?;
            }
            out
        };
        let col_indices = if width == self.index_width() {
            self.col_indices.clone()
        } else {
            ColIndices::from_usizes(width, (0..self.nnz()).map(|j| self.col_indices.get(j)))
        };
        Ok(CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_indices,
            values,
        })
    }

    /// Dense row-major copy, intended for small test instances.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.iter() {
            dense[r][c] = v;
        }
        dense
    }
}

/// Check every CSR invariant and report all violations found.
pub fn validate(m: &CsrMatrix) -> ValidationReport {
    m.validate()
}

fn push_checked(out: &mut Values, row: usize, col: usize, value: f64) -> Result<(), SparseError> {
    out.push_rounded(value).map_err(|failure| match failure {
        ConvertFailure::NonFinite => SparseError::NonFiniteValue { row, col, value },
        ConvertFailure::Overflow => SparseError::ValueOverflow {
            row,
            col,
            value,
            precision: out.precision(),
        },
    })
}

/// Coordinate-list matrix with `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        if let Some(&(row, col, _)) = entries.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(SparseError::IndexOutOfRange {
                row,
                col,
                rows,
                cols,
            });
        }
        Ok(CooMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, usize, f64)> {
        self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sort entries row-major. Duplicates are kept, adjacent.
    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
    }

    /// Entry list with values as raw `f64` bits, for bit-exact comparison.
    pub fn entry_bits(&self) -> Vec<(usize, usize, u64)> {
        self.entries
            .iter()
            .map(|&(r, c, v)| (r, c, v.to_bits()))
            .collect()
    }
}

/// Compress a coordinate list into canonical CSR.
pub fn coo_to_csr(
    m: &CooMatrix,
    precision: ValuePrecision,
    width: IndexWidth,
) -> Result<CsrMatrix, SparseError> {
    if !width.fits(m.cols) {
        return Err(SparseError::IndexOverflow {
            cols: m.cols,
            width,
        });
    }
    let mut order: Vec<usize> = (0..m.entries.len()).collect();
    order.sort_by_key(|&k| (m.entries[k].0, m.entries[k].1));

    let mut row_ptr = vec![0u64; m.rows + 1];
    let mut values = Values::with_capacity(precision, order.len());
    let mut prev: Option<(usize, usize)> = None;
    for &k in &order {
        let (r, c, v) = m.entries[k];
        if prev == Some((r, c)) {
            return Err(SparseError::DuplicateEntry { row: r, col: c });
        }
        prev = Some((r, c));
        push_checked(&mut values, r, c, v)?;
        row_ptr[r + 1] += 1;
    }
    for i in 0..m.rows {
        row_ptr[i + 1] += row_ptr[i];
    }
    let col_indices = ColIndices::from_usizes(width, order.iter().map(|&k| m.entries[k].1));
    Ok(CsrMatrix {
        rows: m.rows,
        cols: m.cols,
        row_ptr,
        col_indices,
        values,
    })
}

/// Expand CSR into a row-major coordinate list, widening values exactly.
pub fn csr_to_coo(m: &CsrMatrix) -> CooMatrix {
    CooMatrix {
        rows: m.rows,
        cols: m.cols,
        entries: m.iter().collect(),
    }
}

/// Compressed-sparse-column matrix; row indices are 32-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<u64>,
    row_indices: Vec<u32>,
    values: Values,
}

impl CscMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_indices.len()
    }

    pub fn col_ptr(&self) -> &[u64] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[u32] {
        &self.row_indices
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn precision(&self) -> ValuePrecision {
        self.values.precision()
    }

    #[inline]
    pub fn col_range(&self, col: usize) -> Range<usize> {
        self.col_ptr[col] as usize..self.col_ptr[col + 1] as usize
    }

    /// Entries in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |c| {
            self.col_range(c)
                .map(move |j| (self.row_indices[j] as usize, c, self.values.get(j)))
        })
    }

    pub fn validate(&self) -> ValidationReport {
        check_compressed(
            self.cols,
            self.rows,
            &self.col_ptr,
            self.row_indices.len(),
            |j| self.row_indices[j] as usize,
            &self.values,
        )
    }
}

/// Transpose the compression of `m`. Value bit patterns are copied as-is.
pub fn csr_to_csc(m: &CsrMatrix) -> Result<CscMatrix, SparseError> {
    if m.rows as u64 > u32::MAX as u64 + 1 {
        return Err(SparseError::RowCountOverflow { rows: m.rows });
    }
    let nnz = m.nnz();
    let mut col_ptr = vec![0u64; m.cols + 1];
    for j in 0..nnz {
        col_ptr[m.col_indices.get(j) + 1] += 1;
    }
    for c in 0..m.cols {
        col_ptr[c + 1] += col_ptr[c];
    }
    let mut next: Vec<u64> = col_ptr[..m.cols].to_vec();
    let mut row_indices = vec![0u32; nnz];
    let mut order = vec![0usize; nnz];
    for r in 0..m.rows {
        for j in m.row_range(r) {
            let c = m.col_indices.get(j);
            let slot = next[c] as usize;
            next[c] += 1;
            row_indices[slot] = r as u32;
            order[slot] = j;
        }
    }
    Ok(CscMatrix {
        rows: m.rows,
        cols: m.cols,
        col_ptr,
        row_indices,
        values: m.values.gather(&order),
    })
}

/// Double-precision dense vector: spot weights in, voxel doses out.
#[derive(Debug, Clone, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// 64-bit FNV-1a hash over the little-endian bytes of every element.
    pub fn checksum(&self) -> u64 {
        crate::checksum::fnv1a_f64(&self.0)
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        DenseVector(v)
    }
}

/// Bitwise equality, like [`Values`].
impl PartialEq for DenseVector {
    fn eq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coo(rows: usize, cols: usize, e: &[(usize, usize, f64)]) -> CooMatrix {
        CooMatrix::new(rows, cols, e.to_vec()).unwrap()
    }

    #[test]
    fn byte_widths() {
        assert_eq!(ValuePrecision::Half.byte_width(), 2);
        assert_eq!(ValuePrecision::Single.byte_width(), 4);
        assert_eq!(ValuePrecision::Double.byte_width(), 8);
        assert_eq!(IndexWidth::U16.byte_width(), 2);
        assert_eq!(IndexWidth::U32.byte_width(), 4);
        assert!(IndexWidth::U16.fits(65535));
        assert!(!IndexWidth::U16.fits(65536));
    }

    #[test]
    fn empty_coo_gives_zero_row_ptr() {
        let m = coo_to_csr(&coo(3, 3, &[]), ValuePrecision::Half, IndexWidth::U16).unwrap();
        assert_eq!(m.row_ptr(), &[0, 0, 0, 0]);
        assert_eq!(m.nnz(), 0);
        assert!(m.validate().is_valid());
        assert!(csr_to_coo(&m).entries().is_empty());
    }

    #[test]
    fn small_coo_to_csr() {
        let m = coo_to_csr(
            &coo(2, 3, &[(1, 2, 2.0), (0, 0, 1.0)]),
            ValuePrecision::Double,
            IndexWidth::U32,
        )
        .unwrap();
        assert_eq!(m.row_ptr(), &[0, 1, 2]);
        assert_eq!(m.col_indices(), &ColIndices::U32(vec![0, 2]));
        assert_eq!(m.values(), &Values::Double(vec![1.0, 2.0]));
        assert_eq!(csr_to_coo(&m).entries(), &[(0, 0, 1.0), (1, 2, 2.0)]);
    }

    #[test]
    fn identity_round_trip() {
        let m = CsrMatrix::identity(2, ValuePrecision::Half, IndexWidth::U16).unwrap();
        assert_eq!(csr_to_coo(&m).entries(), &[(0, 0, 1.0), (1, 1, 1.0)]);
    }

    #[test]
    fn conversion_errors() {
        let dup = coo(2, 2, &[(0, 1, 1.0), (0, 1, 2.0)]);
        assert!(matches!(
            coo_to_csr(&dup, ValuePrecision::Double, IndexWidth::U32),
            Err(SparseError::DuplicateEntry { row: 0, col: 1 })
        ));
        let wide = coo(1, 65536, &[(0, 3, 1.0)]);
        assert!(matches!(
            coo_to_csr(&wide, ValuePrecision::Half, IndexWidth::U16),
            Err(SparseError::IndexOverflow { cols: 65536, .. })
        ));
        assert!(coo_to_csr(&wide, ValuePrecision::Half, IndexWidth::U32).is_ok());
        let big = coo(1, 1, &[(0, 0, 70000.0)]);
        assert!(matches!(
            coo_to_csr(&big, ValuePrecision::Half, IndexWidth::U16),
            Err(SparseError::ValueOverflow { .. })
        ));
        assert!(coo_to_csr(&big, ValuePrecision::Single, IndexWidth::U16).is_ok());
        let huge = coo(1, 1, &[(0, 0, 1e300)]);
        assert!(matches!(
            coo_to_csr(&huge, ValuePrecision::Single, IndexWidth::U16),
            Err(SparseError::ValueOverflow { .. })
        ));
        let nan = coo(1, 1, &[(0, 0, f64::NAN)]);
        assert!(matches!(
            coo_to_csr(&nan, ValuePrecision::Double, IndexWidth::U16),
            Err(SparseError::NonFiniteValue { .. })
        ));
        assert!(matches!(
            CooMatrix::new(2, 2, vec![(2, 0, 1.0)]),
            Err(SparseError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn half_storage_rounds_each_value() {
        let m = coo_to_csr(
            &coo(1, 2, &[(0, 0, 0.1), (0, 1, 1.0 / 3.0)]),
            ValuePrecision::Half,
            IndexWidth::U16,
        )
        .unwrap();
        assert_eq!(
            m.values(),
            &Values::Half(vec![HalfBits(0x2E66), HalfBits(0x3555)])
        );
    }

    #[test]
    fn csc_of_identity_and_row() {
        let id = CsrMatrix::identity(3, ValuePrecision::Half, IndexWidth::U16).unwrap();
        let csc = csr_to_csc(&id).unwrap();
        assert_eq!(csc.col_ptr(), &[0, 1, 2, 3]);
        assert_eq!(csc.row_indices(), &[0, 1, 2]);
        assert!(csc.validate().is_valid());

        let row = coo_to_csr(
            &coo(1, 4, &[(0, 0, 1.0), (0, 1, 2.0), (0, 2, 3.0), (0, 3, 4.0)]),
            ValuePrecision::Single,
            IndexWidth::U16,
        )
        .unwrap();
        let csc = csr_to_csc(&row).unwrap();
        assert_eq!(csc.col_ptr(), &[0, 1, 2, 3, 4]);
        assert_eq!(csc.values(), &Values::Single(vec![1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn validate_flags_non_monotone_row_ptr() {
        let m = CsrMatrix::from_parts_unchecked(
            2,
            3,
            vec![0, 2, 1],
            ColIndices::U32(vec![0]),
            Values::Double(vec![1.0]),
        );
        let report = validate(&m);
        assert!(!report.is_valid());
        assert!(report.violations.contains(&Violation::NonMonotoneRowPtr {
            row: 1,
            start: 2,
            end: 1
        }));
    }

    #[test]
    fn validate_flags_column_out_of_range() {
        let m = CsrMatrix::from_parts_unchecked(
            1,
            3,
            vec![0, 1],
            ColIndices::U16(vec![3]),
            Values::Double(vec![1.0]),
        );
        let report = validate(&m);
        assert_eq!(
            report.violations,
            vec![Violation::IndexOutOfRange {
                position: 0,
                index: 3,
                bound: 3
            }]
        );
    }

    #[test]
    fn validate_flags_unsorted_duplicates_and_lengths() {
        let m = CsrMatrix::from_parts_unchecked(
            1,
            4,
            vec![0, 3],
            ColIndices::U32(vec![1, 1, 0]),
            Values::Double(vec![1.0, 2.0]),
        );
        let v = validate(&m).violations;
        assert!(v.contains(&Violation::LengthMismatch {
            col_indices: 3,
            values: 2
        }));
        assert!(v.contains(&Violation::UnsortedIndices {
            major: 0,
            position: 1
        }));
        assert!(v.contains(&Violation::UnsortedIndices {
            major: 0,
            position: 2
        }));

        let m = CsrMatrix::from_parts_unchecked(
            1,
            1,
            vec![0, 1],
            ColIndices::U16(vec![0]),
            Values::Double(vec![f64::NAN]),
        );
        assert_eq!(
            validate(&m).violations,
            vec![Violation::NonFiniteValue { position: 0 }]
        );

        let m = CsrMatrix::from_parts_unchecked(
            1,
            70000,
            vec![0, 0],
            ColIndices::U16(vec![]),
            Values::Half(vec![]),
        );
        assert!(matches!(
            validate(&m).violations[..],
            [Violation::IndexWidthTooNarrow { .. }]
        ));
        assert!(CsrMatrix::new(
            1,
            70000,
            vec![0, 0],
            ColIndices::U16(vec![]),
            Values::Half(vec![])
        )
        .is_err());
    }

    #[test]
    fn convert_half_double_half_is_lossless() {
        let m = coo_to_csr(
            &coo(2, 2, &[(0, 0, 0.1), (1, 1, 3.3)]),
            ValuePrecision::Half,
            IndexWidth::U16,
        )
        .unwrap();
        let d = m.convert(ValuePrecision::Double, IndexWidth::U32).unwrap();
        assert_eq!(d.convert(ValuePrecision::Half, IndexWidth::U16).unwrap(), m);
    }

    #[test]
    fn dense_vector_equality_is_bitwise() {
        assert_ne!(DenseVector::from(vec![0.0]), DenseVector::from(vec![-0.0]));
        assert_eq!(DenseVector::from(vec![1.5]), DenseVector::from(vec![1.5]));
    }
}
