//! Mixed-precision sparse matrix-vector products for radiotherapy dose
//! deposition matrices.
//!
//! Matrices are stored in CSR with binary16, binary32 or binary64 values and
//! 16- or 32-bit column indices; input and output vectors are always `f64`.
//! Every engine has a fixed reduction order, so results are bitwise
//! reproducible regardless of thread count.
//!
//! Next to the engines the crate carries an analytic traffic and roofline
//! model, a seeded generator for matrices with clinical row-length
//! statistics, and the DDM / Matrix Market file formats.

pub mod bench;
pub mod checksum;
pub mod engine;
pub mod half;
pub mod io;
pub mod matgen;
pub mod perf;
pub mod sparse;
pub mod stats;

pub use engine::{
    spmv_oracle, spmv_oracle_column_major, spmv_rowchunk, spmv_scatter_baseline, EngineError,
    RowChunkConfig, ScatterConfig,
};
pub use half::{decode_half, encode_half, HalfBits, HalfError};
pub use matgen::{generate, seeded_uniform_vector, GenError, MatrixProfile};
pub use perf::{
    achieved_metrics, operational_intensity, roofline_bound, roofline_row, storage_size, traffic,
    LayoutBytes, MachineSpec, MatrixDims, PerfError, Regime, RooflineRow, TrafficModel,
};
pub use sparse::{
    coo_to_csr, csr_to_coo, csr_to_csc, validate, ColIndices, CooMatrix, CscMatrix, CsrMatrix,
    DenseVector, IndexWidth, SparseError, ValidationReport, ValuePrecision, Values,
};
pub use stats::{compute_stats, RowStats};
