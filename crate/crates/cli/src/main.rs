//! `ddm`: generate, inspect, convert, multiply and benchmark dose deposition
//! matrices.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ddm_spmv::bench::{self, Algorithm, BenchOptions, SweepPoint};
use ddm_spmv::io::{parse_matrix_market, read_ddm, read_vector, write_ddm, write_vector};
use ddm_spmv::perf::ROOFLINE_CSV_HEADER;
use ddm_spmv::{
    compute_stats, coo_to_csr, csr_to_csc, generate, roofline_row, seeded_uniform_vector,
    spmv_oracle, spmv_rowchunk, spmv_scatter_baseline, CsrMatrix, IndexWidth, LayoutBytes,
    MachineSpec, MatrixDims, MatrixProfile, RowChunkConfig, ScatterConfig, ValuePrecision,
};

#[derive(Parser)]
#[command(
    name = "ddm",
    version,
    about = "Reproducible mixed-precision SpMV for dose deposition matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic matrix from a profile.
    Gen(GenArgs),
    /// Print row-length statistics.
    Stats(StatsArgs),
    /// Convert between formats, precisions and index widths.
    Convert(ConvertArgs),
    /// Multiply a matrix by a vector.
    Spmv(SpmvArgs),
    /// Time the engines over a configuration sweep.
    Bench(BenchArgs),
    /// Operational intensity and roofline ceilings.
    Roofline(RooflineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Half,
    Single,
    Double,
}

impl From<PrecisionArg> for ValuePrecision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Half => ValuePrecision::Half,
            PrecisionArg::Single => ValuePrecision::Single,
            PrecisionArg::Double => ValuePrecision::Double,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ddm,
    Mtx,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Rowchunk,
    Scatter,
    Oracle,
}

impl From<EngineArg> for Algorithm {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Rowchunk => Algorithm::RowChunk,
            EngineArg::Scatter => Algorithm::Scatter,
            EngineArg::Oracle => Algorithm::Oracle,
        }
    }
}

fn parse_index_width(s: &str) -> Result<IndexWidth, String> {
    match s {
        "16" => Ok(IndexWidth::U16),
        "32" => Ok(IndexWidth::U32),
        other => Err(format!("index width must be 16 or 32, got {other:?}")),
    }
}

/// How to read a matrix file.
#[derive(Args)]
struct MatrixInput {
    /// Input matrix (DDM, or Matrix Market with `.mtx` extension or --format mtx).
    matrix: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Value precision used when importing Matrix Market files.
    #[arg(long = "mtx-precision", value_enum, default_value = "half")]
    mtx_precision: PrecisionArg,
    /// Column index width used when importing Matrix Market files (default: narrowest that fits).
    #[arg(long = "mtx-index-width", value_parser = parse_index_width)]
    mtx_index_width: Option<IndexWidth>,
}

impl MatrixInput {
    fn load(&self) -> Result<CsrMatrix> {
        load_matrix(
            &self.matrix,
            self.format,
            self.mtx_precision.into(),
            self.mtx_index_width,
        )
    }

    fn label(&self) -> String {
        self.matrix
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "matrix".into())
    }
}

fn load_matrix(
    path: &Path,
    format: Option<FormatArg>,
    precision: ValuePrecision,
    width: Option<IndexWidth>,
) -> Result<CsrMatrix> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => FormatArg::Mtx,
        _ => FormatArg::Ddm,
    });
    match format {
        FormatArg::Ddm => read_ddm(path).with_context(|| format!("reading {}", path.display())),
        FormatArg::Mtx => {
            let coo = parse_matrix_market(
                std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?,
            )
            .with_context(|| format!("parsing {}", path.display()))?;
            let width = width.unwrap_or_else(|| IndexWidth::narrowest_for(coo.cols()));
            Ok(coo_to_csr(&coo, precision, width)
                .with_context(|| format!("compressing {}", path.display()))?)
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Built-in profile: liver-desk or prostate-desk.
    #[arg(long, default_value = "liver-desk", conflicts_with = "profile_file")]
    profile: String,
    /// key=value profile file, applied on top of liver-desk.
    #[arg(long)]
    profile_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "half")]
    precision: PrecisionArg,
    /// 16 or 32 (default: narrowest that fits).
    #[arg(long, value_parser = parse_index_width)]
    index_width: Option<IndexWidth>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: MatrixInput,
    /// Emit the cumulative table as CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: MatrixInput,
    /// Output DDM file.
    output: PathBuf,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long, value_parser = parse_index_width)]
    index_width: Option<IndexWidth>,
}

#[derive(Args)]
struct SpmvArgs {
    #[command(flatten)]
    input: MatrixInput,
    /// Input vector, one number per line. Without it a seeded uniform [0, 1) vector is used.
    #[arg(long)]
    vector: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "rowchunk")]
    engine: EngineArg,
    #[arg(long, default_value_t = 32)]
    lane_width: usize,
    #[arg(long, default_value_t = 8)]
    chunk_count: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output vector file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    input: MatrixInput,
    #[arg(long, value_enum, default_value = "rowchunk")]
    algorithm: EngineArg,
    /// Comma-separated lane widths (default 32,64,...,1024).
    #[arg(long, value_delimiter = ',')]
    lane_width: Vec<usize>,
    /// Comma-separated chunk counts for the scatter baseline (default 1,8,64).
    #[arg(long, value_delimiter = ',')]
    chunk_count: Vec<usize>,
    /// Comma-separated worker counts (default 1,2,4,... up to the core count).
    #[arg(long, value_delimiter = ',')]
    workers: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    /// Seed of the uniform [0, 1) input vector.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Row pointer width assumed by the traffic model.
    #[arg(long, default_value_t = 8)]
    row_ptr_bytes: u32,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct RooflineArgs {
    /// Take dimensions from this matrix instead of --nr/--nc/--nnz.
    #[arg(long, conflicts_with_all = ["nr", "nc", "nnz"])]
    matrix: Option<PathBuf>,
    #[arg(long, requires_all = ["nc", "nnz"])]
    nr: Option<u64>,
    #[arg(long, requires_all = ["nr", "nnz"])]
    nc: Option<u64>,
    #[arg(long, requires_all = ["nr", "nc"])]
    nnz: Option<u64>,
    /// Layouts: half-double, single, or value,col,rowptr,out,in byte widths. Repeatable.
    #[arg(long = "layout")]
    layouts: Vec<String>,
    #[arg(long, default_value = "A100")]
    machine: String,
    /// Peak compute, GFLOP/s.
    #[arg(long, default_value_t = 9400.0)]
    peak_gflops: f64,
    /// Peak memory bandwidth, GB/s.
    #[arg(long, default_value_t = 1555.0)]
    peak_bw: f64,
    #[arg(long)]
    csv: bool,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => cmd_gen(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Spmv(a) => cmd_spmv(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Roofline(a) => cmd_roofline(a),
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let mut profile = match &a.profile_file {
        Some(path) => MatrixProfile::load(path, MatrixProfile::liver_desk())?,
        None => MatrixProfile::builtin(&a.profile)?,
    };
    if let Some(seed) = a.seed {
        profile.seed = seed;
    }
    let m = generate(&profile)?;
    let width = a.index_width.unwrap_or(m.index_width());
    let m = m.convert(a.precision.into(), width)?;
    write_ddm(&m, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "wrote {}: {} x {}, nnz {}, seed {}",
        a.output.display(),
        m.rows(),
        m.cols(),
        m.nnz(),
        profile.seed
    );
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let m = a.input.load()?;
    let s = compute_stats(&m);
    if a.csv {
        println!("length,fraction");
        for (len, frac) in &s.cumulative {
            println!("{len},{frac}");
        }
        return Ok(());
    }
    println!(
        "rows {}  cols {}  nnz {}  nnz ratio {:.4}%",
        s.rows,
        s.cols,
        s.nnz,
        100.0 * s.nnz_ratio
    );
    println!("empty row fraction           {:.4}", s.empty_row_fraction);
    match (s.mean_nnz_per_nonempty_row, s.frac_nonempty_below_32) {
        (Some(mean), Some(short)) => {
            println!("mean nnz per non-empty row   {mean:.4}");
            println!("non-empty rows below 32 nnz  {short:.4}");
            println!();
            println!("{:>10} {:>10}", "length", "cum. frac");
            for (len, frac) in &s.cumulative {
                println!("{len:>10} {frac:>10.6}");
            }
        }
        _ => println!("no non-empty rows; cumulative distribution is empty"),
    }
    Ok(())
}

fn cmd_convert(a: ConvertArgs) -> Result<()> {
    let m = a.input.load()?;
    let precision = a.precision.map(Into::into).unwrap_or(m.precision());
    let width = a.index_width.unwrap_or(m.index_width());
    let out = m.convert(precision, width)?;
    write_ddm(&out, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "wrote {}: {} values, {:?} indices",
        a.output.display(),
        precision,
        width
    );
    Ok(())
}

fn cmd_spmv(a: SpmvArgs) -> Result<()> {
    let m = a.input.load()?;
    let x = match &a.vector {
        Some(path) => read_vector(path).with_context(|| format!("reading {}", path.display()))?,
        None => seeded_uniform_vector(m.cols(), a.seed),
    };
    let y = match a.engine {
        EngineArg::Rowchunk => {
            spmv_rowchunk(&m, &x, &RowChunkConfig::new(a.lane_width, a.workers)?)?
        }
        EngineArg::Scatter => spmv_scatter_baseline(
            &csr_to_csc(&m)?,
            &x,
            &ScatterConfig::new(a.chunk_count, a.workers)?,
        )?,
        EngineArg::Oracle => spmv_oracle(&m, &x)?,
    };
    if let Some(path) = &a.output {
        write_vector(&y, path).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("checksum {:016x}", y.checksum());
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    if a.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let m = a.input.load()?;
    let algorithm: Algorithm = a.algorithm.into();
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let workers = if a.workers.is_empty() {
        bench::powers_of_two_up_to(hw)
    } else {
        a.workers.clone()
    };
    let params = match algorithm {
        Algorithm::RowChunk if !a.lane_width.is_empty() => a.lane_width.clone(),
        Algorithm::Scatter if !a.chunk_count.is_empty() => a.chunk_count.clone(),
        Algorithm::Oracle => vec![1],
        _ => {
            let mut p: Vec<usize> = bench::default_sweep(algorithm, 1)
                .iter()
                .map(|s| s.param)
                .collect();
            p.dedup();
            p
        }
    };
    let workers = if algorithm == Algorithm::Oracle {
        vec![1]
    } else {
        workers
    };
    let sweep: Vec<SweepPoint> = params
        .iter()
        .flat_map(|&param| {
            workers
                .iter()
                .map(move |&workers| SweepPoint { param, workers })
        })
        .collect();

    let x = seeded_uniform_vector(m.cols(), a.seed);
    let opts = BenchOptions {
        reps: a.reps,
        warmup: a.warmup,
        row_ptr_bytes: a.row_ptr_bytes,
    };
    let label = a.label.clone().unwrap_or_else(|| a.input.label());
    let reports = bench::run_bench(&m, &x, &label, algorithm, &sweep, &opts)?;
    if a.csv {
        println!("{}", bench::CSV_HEADER);
        for r in &reports {
            println!("{}", r.csv_row());
        }
    } else {
        print!("{}", bench::format_table(&reports));
    }
    Ok(())
}

fn cmd_roofline(a: RooflineArgs) -> Result<()> {
    let dims = match (&a.matrix, a.nr, a.nc, a.nnz) {
        (Some(path), ..) => MatrixDims::of(&load_matrix(path, None, ValuePrecision::Half, None)?),
        (None, Some(nr), Some(nc), Some(nnz)) => MatrixDims::new(nr, nc, nnz)?,
        _ => bail!("give either --matrix or all of --nr, --nc, --nnz"),
    };
    let machine = MachineSpec::new(a.machine.clone(), a.peak_gflops * 1e9, a.peak_bw * 1e9)?;
    let layouts = if a.layouts.is_empty() {
        vec![LayoutBytes::HALF_DOUBLE, LayoutBytes::SINGLE]
    } else {
        a.layouts
            .iter()
            .map(|s| LayoutBytes::parse(s))
            .collect::<Result<_, _>>()?
    };
    let rows = layouts
        .into_iter()
        .map(|l| roofline_row(dims, l, &machine))
        .collect::<Result<Vec<_>, _>>()?;

    if a.csv {
        println!("{ROOFLINE_CSV_HEADER}");
        for r in &rows {
            println!("{}", r.csv_row());
        }
        return Ok(());
    }
    println!(
        "{} (peak {:.1} GFLOP/s, {:.1} GB/s); nr {} nc {} nnz {}",
        machine.name, a.peak_gflops, a.peak_bw, dims.nr, dims.nc, dims.nnz
    );
    println!(
        "{:<12} {:>16} {:>8} {:>14} {:>14} {:>14}  regime",
        "layout", "bytes", "OI", "memory GF/s", "compute GF/s", "bound GF/s"
    );
    for r in &rows {
        println!(
            "{:<12} {:>16} {:>8.4} {:>14.1} {:>14.1} {:>14.1}  {}",
            r.layout.label(),
            r.total_bytes,
            r.operational_intensity,
            r.memory_ceiling / 1e9,
            r.compute_ceiling / 1e9,
            r.bound / 1e9,
            r.regime.name()
        );
    }
    Ok(())
}
