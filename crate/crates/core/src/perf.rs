//! Analytic memory-traffic model, operational intensity and roofline bound
//! for one CSR SpMV.
//!
//! The model assumes an infinite cache: every matrix byte, every input
//! element and every row pointer is read from main memory exactly once and
//! every output element is written exactly once. That makes the traffic a
//! lower bound and the operational intensity an upper bound.
//!
//! With 2-byte values, 4-byte column indices, 4-byte row pointers and
//! double-precision vectors, the traffic is `6 nnz + 12 nr + 8 nc` bytes for
//! `2 nnz` floating point operations.

use thiserror::Error;

use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerfError {
    #[error("invalid dimensions: nnz {nnz} exceeds {nr} x {nc}")]
    InvalidDims { nr: u64, nc: u64, nnz: u64 },
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid machine spec: {0}")]
    InvalidMachine(String),
    #[error("operational intensity is undefined for zero traffic")]
    ZeroTraffic,
    #[error("operational intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
    #[error("elapsed time must be positive, got {0} s")]
    ZeroDuration(f64),
}

/// Row count, column count and non-zero count of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixDims {
    pub nr: u64,
    pub nc: u64,
    pub nnz: u64,
}

impl MatrixDims {
    pub fn new(nr: u64, nc: u64, nnz: u64) -> Result<Self, PerfError> {
        if nnz as u128 > nr as u128 * nc as u128 {
            return Err(PerfError::InvalidDims { nr, nc, nnz });
        }
        Ok(MatrixDims { nr, nc, nnz })
    }

    pub fn of(m: &CsrMatrix) -> Self {
        MatrixDims {
            nr: m.rows() as u64,
            nc: m.cols() as u64,
            nnz: m.nnz() as u64,
        }
    }
}

/// Bytes moved per non-zero, per row and per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutBytes {
    pub value_bytes: u32,
    pub col_index_bytes: u32,
    pub row_ptr_bytes: u32,
    pub out_bytes: u32,
    pub in_bytes: u32,
}

impl LayoutBytes {
    /// Binary16 values, 32-bit indices and row pointers, double vectors.
    pub const HALF_DOUBLE: LayoutBytes = LayoutBytes {
        value_bytes: 2,
        col_index_bytes: 4,
        row_ptr_bytes: 4,
        out_bytes: 8,
        in_bytes: 8,
    };

    /// Everything 4 bytes: single values and single vectors.
    pub const SINGLE: LayoutBytes = LayoutBytes {
        value_bytes: 4,
        col_index_bytes: 4,
        row_ptr_bytes: 4,
        out_bytes: 4,
        in_bytes: 4,
    };

    pub fn new(
        value_bytes: u32,
        col_index_bytes: u32,
        row_ptr_bytes: u32,
        out_bytes: u32,
        in_bytes: u32,
    ) -> Result<Self, PerfError> {
        let layout = LayoutBytes {
            value_bytes,
            col_index_bytes,
            row_ptr_bytes,
            out_bytes,
            in_bytes,
        };
        layout.check()?;
        Ok(layout)
    }

    fn check(&self) -> Result<(), PerfError> {
        let bad = |what: &str, v: u32, allowed: &[u32]| {
            if allowed.contains(&v) {
                Ok(())
            } else {
                Err(PerfError::InvalidLayout(format!(
                    "{what} = {v}, expected one of {allowed:?}"
                )))
            }
        };
        bad("value bytes", self.value_bytes, &[2, 4, 8])?;
        bad("column index bytes", self.col_index_bytes, &[2, 4])?;
        bad("row pointer bytes", self.row_ptr_bytes, &[4, 8])?;
        bad("output bytes", self.out_bytes, &[4, 8])?;
        bad("input bytes", self.in_bytes, &[4, 8])
    }

    /// Layout of a stored matrix with double-precision vectors.
    pub fn for_matrix(m: &CsrMatrix, row_ptr_bytes: u32) -> Result<Self, PerfError> {
        LayoutBytes::new(
            m.precision().byte_width() as u32,
            m.index_width().byte_width() as u32,
            row_ptr_bytes,
            8,
            8,
        )
    }

    /// Parse `"half-double"`, `"single"` or five widths
    /// `value,col_index,row_ptr,out,in` separated by `,` or `/`.
    pub fn parse(s: &str) -> Result<Self, PerfError> {
        match s.trim() {
            "half-double" | "half" => return Ok(Self::HALF_DOUBLE),
            "single" => return Ok(Self::SINGLE),
            _ => {}
        }
        let parts: Vec<u32> = s
            .split([',', '/'])
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| PerfError::InvalidLayout(format!("{s:?}: {e}")))?;
        match parts[..] {
            [v, c, r, o, i] => LayoutBytes::new(v, c, r, o, i),
            _ => Err(PerfError::InvalidLayout(format!(
                "{s:?}: expected five widths"
            ))),
        }
    }

    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}/{}/{}",
            self.value_bytes,
            self.col_index_bytes,
            self.row_ptr_bytes,
            self.out_bytes,
            self.in_bytes
        )
    }
}

/// Byte traffic of one SpMV, split by what it scales with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficModel {
    pub bytes_nnz_term: u128,
    pub bytes_row_term: u128,
    pub bytes_col_term: u128,
    pub flops: u128,
}

impl TrafficModel {
    pub fn total_bytes(&self) -> u128 {
        self.bytes_nnz_term + self.bytes_row_term + self.bytes_col_term
    }
}

pub fn traffic(dims: MatrixDims, layout: LayoutBytes) -> TrafficModel {
    let nnz = dims.nnz as u128;
    TrafficModel {
        bytes_nnz_term: (layout.value_bytes + layout.col_index_bytes) as u128 * nnz,
        bytes_row_term: (layout.row_ptr_bytes + layout.out_bytes) as u128 * dims.nr as u128,
        bytes_col_term: layout.in_bytes as u128 * dims.nc as u128,
        flops: 2 * nnz,
    }
}

/// FLOPs per byte of main-memory traffic.
pub fn operational_intensity(t: &TrafficModel) -> Result<f64, PerfError> {
    let bytes = t.total_bytes();
    if bytes == 0 {
        return Err(PerfError::ZeroTraffic);
    }
    Ok(t.flops as f64 / bytes as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub name: String,
    /// FLOP/s.
    pub peak_flops: f64,
    /// Bytes/s.
    pub peak_bandwidth: f64,
}

impl MachineSpec {
    pub fn new(
        name: impl Into<String>,
        peak_flops: f64,
        peak_bandwidth: f64,
    ) -> Result<Self, PerfError> {
        if !(peak_flops > 0.0 && peak_flops.is_finite()) {
            return Err(PerfError::InvalidMachine(format!(
                "peak FLOP/s must be positive, got {peak_flops}"
            )));
        }
        if !(peak_bandwidth > 0.0 && peak_bandwidth.is_finite()) {
            return Err(PerfError::InvalidMachine(format!(
                "peak bandwidth must be positive, got {peak_bandwidth}"
            )));
        }
        Ok(MachineSpec {
            name: name.into(),
            peak_flops,
            peak_bandwidth,
        })
    }

    /// Nvidia A100 40 GB: 9.4 TFLOP/s double precision, 1555 GB/s HBM2.
    pub fn a100() -> Self {
        MachineSpec {
            name: "A100".into(),
            peak_flops: 9.4e12,
            peak_bandwidth: 1555e9,
        }
    }
}

/// Attainable FLOP/s: `min(peak_flops, oi * peak_bandwidth)`.
pub fn roofline_bound(oi: f64, machine: &MachineSpec) -> Result<f64, PerfError> {
    if oi.is_nan() || oi <= 0.0 {
        return Err(PerfError::NonPositiveIntensity(oi));
    }
    Ok(machine.peak_flops.min(oi * machine.peak_bandwidth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    MemoryBound,
    ComputeBound,
}

impl Regime {
    pub fn of(oi: f64, machine: &MachineSpec) -> Regime {
        if oi * machine.peak_bandwidth < machine.peak_flops {
            Regime::MemoryBound
        } else {
            Regime::ComputeBound
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::MemoryBound => "memory-bound",
            Regime::ComputeBound => "compute-bound",
        }
    }
}

/// Resident bytes of the CSR arrays: values, column indices and `nr + 1`
/// row pointers.
pub fn storage_size(dims: MatrixDims, layout: LayoutBytes) -> u128 {
    (layout.value_bytes + layout.col_index_bytes) as u128 * dims.nnz as u128
        + layout.row_ptr_bytes as u128 * (dims.nr as u128 + 1)
}

/// Throughput derived from a measured duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievedMetrics {
    pub gflops: f64,
    /// Modelled bytes over elapsed time, GB/s (10^9 bytes).
    pub effective_gbs: f64,
    pub operational_intensity: f64,
}

/// GFLOP/s and effective GB/s for one SpMV that took `elapsed_seconds`.
///
/// Bandwidth comes from the traffic model, not from counters. GFLOP/s is
/// formed as `oi * GB/s`, which equals `2 nnz / elapsed` up to rounding and
/// makes `gflops == operational_intensity * effective_gbs` hold exactly.
pub fn achieved_metrics(
    dims: MatrixDims,
    layout: LayoutBytes,
    elapsed_seconds: f64,
) -> Result<AchievedMetrics, PerfError> {
    if elapsed_seconds.is_nan() || elapsed_seconds <= 0.0 {
        return Err(PerfError::ZeroDuration(elapsed_seconds));
    }
    let t = traffic(dims, layout);
    let oi = operational_intensity(&t)?;
    let effective_gbs = t.total_bytes() as f64 / elapsed_seconds / 1e9;
    Ok(AchievedMetrics {
        gflops: oi * effective_gbs,
        effective_gbs,
        operational_intensity: oi,
    })
}

/// One line of a roofline report.
#[derive(Debug, Clone, PartialEq)]
pub struct RooflineRow {
    pub machine: String,
    pub layout: LayoutBytes,
    pub dims: MatrixDims,
    pub total_bytes: u128,
    pub flops: u128,
    pub operational_intensity: f64,
    /// `oi * peak_bandwidth`, FLOP/s.
    pub memory_ceiling: f64,
    /// `peak_flops`, FLOP/s.
    pub compute_ceiling: f64,
    pub bound: f64,
    pub regime: Regime,
}

pub fn roofline_row(
    dims: MatrixDims,
    layout: LayoutBytes,
    machine: &MachineSpec,
) -> Result<RooflineRow, PerfError> {
    let t = traffic(dims, layout);
    let oi = operational_intensity(&t)?;
    Ok(RooflineRow {
        machine: machine.name.clone(),
        layout,
        dims,
        total_bytes: t.total_bytes(),
        flops: t.flops,
        operational_intensity: oi,
        memory_ceiling: oi * machine.peak_bandwidth,
        compute_ceiling: machine.peak_flops,
        bound: roofline_bound(oi, machine)?,
        regime: Regime::of(oi, machine),
    })
}

pub const ROOFLINE_CSV_HEADER: &str =
    "machine,layout,nr,nc,nnz,bytes,flops,oi,memory_ceiling_gflops,compute_ceiling_gflops,bound_gflops,regime";

impl RooflineRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.machine,
            self.layout.label(),
            self.dims.nr,
            self.dims.nc,
            self.dims.nnz,
            self.total_bytes,
            self.flops,
            self.operational_intensity,
            self.memory_ceiling / 1e9,
            self.compute_ceiling / 1e9,
            self.bound / 1e9,
            self.regime.name()
        )
    }
}
