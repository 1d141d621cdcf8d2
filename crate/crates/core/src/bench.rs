//! Timing harness over the SpMV engines.
//!
//! Each sweep point runs `warmup` untimed products and then `reps` timed ones
//! on a monotonic clock. Throughput comes from the traffic model (see
//! [`crate::perf::achieved_metrics`]) evaluated at the mean time. Every report
//! carries the checksum of the output bits so reproducibility across the
//! sweep can be read straight off the table.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::engine::{
    spmv_oracle, spmv_rowchunk, spmv_scatter_baseline, EngineError, RowChunkConfig, ScatterConfig,
};
use crate::perf::{achieved_metrics, LayoutBytes, MatrixDims, PerfError};
use crate::sparse::{csr_to_csc, CsrMatrix, DenseVector, SparseError, ValuePrecision};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("empty configuration sweep")]
    EmptySweep,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Perf(#[from] PerfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    RowChunk,
    Scatter,
    Oracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RowChunk => "rowchunk",
            Algorithm::Scatter => "scatter",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rowchunk" => Ok(Algorithm::RowChunk),
            "scatter" => Ok(Algorithm::Scatter),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(format!(
                "unknown algorithm {other:?} (rowchunk, scatter, oracle)"
            )),
        }
    }
}

/// One configuration: `param` is the lane width (rowchunk), the chunk
/// count (scatter) or ignored (oracle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub param: usize,
    pub workers: usize,
}

/// `1, 2, 4, ...` up to and including `max` (and `max` itself if it is not
/// a power of two).
pub fn powers_of_two_up_to(max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |&w| w.checked_mul(2))
        .take_while(|&w| w <= max.max(1))
        .collect();
    if v.last() != Some(&max.max(1)) {
        v.push(max.max(1));
    }
    v
}

/// Lane widths 32..=1024 for rowchunk, chunk counts {1, 8, 64} for scatter,
/// each crossed with worker counts 1, 2, 4, ... up to `max_workers`.
pub fn default_sweep(algorithm: Algorithm, max_workers: usize) -> Vec<SweepPoint> {
    let workers = powers_of_two_up_to(max_workers);
    let params: Vec<usize> = match algorithm {
        Algorithm::RowChunk => (5..=10).map(|p| 1usize << p).collect(),
        Algorithm::Scatter => vec![1, 8, 64],
        Algorithm::Oracle => {
            return vec![SweepPoint {
                param: 1,
                workers: 1,
            }]
        }
    };
    params
        .iter()
        .flat_map(|&param| {
            workers
                .iter()
                .map(move |&workers| SweepPoint { param, workers })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub reps: usize,
    pub warmup: usize,
    /// Row pointer width used by the traffic model. Stored row pointers are
    /// 8 bytes.
    pub row_ptr_bytes: u32,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            reps: 100,
            warmup: 3,
            row_ptr_bytes: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub label: String,
    pub algorithm: Algorithm,
    pub precision_mode: String,
    pub param: usize,
    pub workers: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub gflops: f64,
    pub effective_gbs: f64,
    pub operational_intensity: f64,
    pub checksum: u64,
    /// Every timed repetition produced the same checksum.
    pub stable: bool,
}

pub fn precision_mode(p: ValuePrecision) -> &'static str {
    match p {
        ValuePrecision::Half => "half/double",
        ValuePrecision::Single => "single/double",
        ValuePrecision::Double => "double/double",
    }
}

/// Time `algorithm` on `m` at every point of `sweep`.
pub fn run_bench(
    m: &CsrMatrix,
    x: &DenseVector,
    label: &str,
    algorithm: Algorithm,
    sweep: &[SweepPoint],
    opts: &BenchOptions,
) -> Result<Vec<BenchReport>, BenchError> {
    if opts.reps == 0 {
        return Err(BenchError::NoRepetitions);
    }
    if sweep.is_empty() {
        return Err(BenchError::EmptySweep);
    }
    let dims = MatrixDims::of(m);
    let layout = LayoutBytes::for_matrix(m, opts.row_ptr_bytes)?;
    let csc = match algorithm {
        Algorithm::Scatter => Some(csr_to_csc(m)?),
        _ => None,
    };

    let mut reports = Vec::with_capacity(sweep.len());
    for point in sweep {
        let run: Box<dyn Fn() -> Result<DenseVector, EngineError>> = match algorithm {
            Algorithm::RowChunk => {
                let cfg = RowChunkConfig::new(point.param, point.workers)?;
                Box::new(move || spmv_rowchunk(m, x, &cfg))
            }
            Algorithm::Scatter => {
                let cfg = ScatterConfig::new(point.param, point.workers)?;
                let csc = csc.as_ref().expect("built above");
                Box::new(move || spmv_scatter_baseline(csc, x, &cfg))
            }
            Algorithm::Oracle => Box::new(move || spmv_oracle(m, x)),
        };

        for _ in 0..opts.warmup {
            run()?;
        }
        let mut total = 0.0f64;
        let mut min = f64::INFINITY;
        let mut checksum = None;
        let mut stable = true;
        for _ in 0..opts.reps {
            let t0 = Instant::now();
            let y = run()?;
            let dt = t0.elapsed().as_secs_f64();
            total += dt;
            min = min.min(dt);
            let c = y.checksum();
            stable &= checksum.is_none_or(|prev| prev == c);
            checksum = Some(c);
        }
        // Guard against a zero reading from a coarse clock.
        let mean = (total / opts.reps as f64).max(1e-9);
        let metrics = achieved_metrics(dims, layout, mean)?;
        reports.push(BenchReport {
            label: label.to_string(),
            algorithm,
            precision_mode: precision_mode(m.precision()).to_string(),
            param: point.param,
            workers: point.workers,
            repetitions: opts.reps,
            mean_seconds: mean,
            min_seconds: min,
            gflops: metrics.gflops,
            effective_gbs: metrics.effective_gbs,
            operational_intensity: metrics.operational_intensity,
            checksum: checksum.unwrap_or_default(),
            stable,
        });
    }
    Ok(reports)
}

pub const CSV_HEADER: &str =
    "label,algorithm,precision,param,workers,reps,mean_s,min_s,gflops,gbs,oi,checksum,stable";

impl BenchReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:e},{:e},{},{},{},{:016x},{}",
            self.label,
            self.algorithm,
            self.precision_mode,
            self.param,
            self.workers,
            self.repetitions,
            self.mean_seconds,
            self.min_seconds,
            self.gflops,
            self.effective_gbs,
            self.operational_intensity,
            self.checksum,
            self.stable
        )
    }
}

/// Human-readable table of `reports`.
pub fn format_table(reports: &[BenchReport]) -> String {
    let mut out = format!(
        "{:<16} {:<9} {:<14} {:>6} {:>7} {:>6} {:>12} {:>12} {:>9} {:>9} {:>8} {:>16}\n",
        "matrix",
        "algorithm",
        "precision",
        "param",
        "workers",
        "reps",
        "mean [ms]",
        "min [ms]",
        "GFLOP/s",
        "GB/s",
        "OI",
        "checksum"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<16} {:<9} {:<14} {:>6} {:>7} {:>6} {:>12.4} {:>12.4} {:>9.3} {:>9.3} {:>8.4} {:016x}{}\n",
            r.label,
            r.algorithm.name(),
            r.precision_mode,
            r.param,
            r.workers,
            r.repetitions,
            r.mean_seconds * 1e3,
            r.min_seconds * 1e3,
            r.gflops,
            r.effective_gbs,
            r.operational_intensity,
            r.checksum,
            if r.stable { "" } else { " UNSTABLE" }
        ));
    }
    out
}
