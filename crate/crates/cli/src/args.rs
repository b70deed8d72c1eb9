use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::defaults as d;

#[derive(Debug, Parser)]
#[command(
    name = "fdeconv",
    version,
    about = "Functional deconvolution with hyperbolic wavelets",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    /// Worker threads for parallel stages [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Replay a run from a manifest written by an earlier run [default: none]
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deconvolve an observation grid
    Deconvolve(DeconvolveArgs),
    /// Monte-Carlo MISE for one design, or a sweep over M
    Simulate(SimulateArgs),
    /// Run the 6 x 2 x 2 benchmark table
    Table1(Table1Args),
    /// Minimax rate exponents for a Besov ball
    Rates(RatesArgs),
    /// Joint versus per-profile verdict for given sample sizes
    Compare(CompareArgs),
    /// Estimate the degree of ill-posedness of a kernel
    NuEstimate(NuEstimateArgs),
}

/// Estimator settings shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Degree of ill-posedness, or "auto" to estimate it from the kernel
    #[arg(long, default_value = d::NU)]
    pub nu: String,
    /// Frequency range "lo:hi" for estimating nu, or "auto" for [N/16, N/4]
    #[arg(long, default_value = d::NU_RANGE)]
    pub nu_range: String,
    /// Threshold constant, or "auto" for 4 (2 pi/3)^nu / sqrt(c1); 0 keeps every coefficient
    #[arg(long, default_value = d::CBETA)]
    pub cbeta: String,
    /// Resolution cutoff J along t, or "auto"
    #[arg(long = "j", default_value = d::J)]
    pub j_cutoff: String,
    /// Resolution cutoff J' along each spatial axis, or "auto"
    #[arg(long = "j-spatial", default_value = d::J)]
    pub j_spatial: String,
    /// Coarsest Meyer level along t
    #[arg(long, default_value = d::M0)]
    pub m0: u32,
    /// Coarsest Daubechies level along u
    #[arg(long, default_value = d::M0_SPATIAL)]
    pub m0_spatial: u32,
    /// Vanishing moments of the spatial Daubechies wavelet (1..=10)
    #[arg(long, default_value = d::MOMENTS)]
    pub moments: usize,
    /// parallel or sequential
    #[arg(long, default_value = d::EXECUTION)]
    pub execution: String,
}

#[derive(Debug, Args)]
pub struct DeconvolveArgs {
    /// Observation grid (FDG1 or CSV)
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Kernel grid file (one row is reused for every profile), or a built-in shape: circular, one-sided
    #[arg(long, default_value = d::KERNEL_SHAPE)]
    pub kernel: String,
    /// Noise level; "file" uses the value stored in the input grid
    #[arg(long, default_value = "file")]
    pub sigma: String,
    /// Spatial shape "d1xd2x..." whose product is M; "flat" means one axis
    #[arg(long, default_value = "flat")]
    pub dims: String,
    /// Convolution scaling of kernel samples: sum or riemann
    #[arg(long, default_value = d::SCALE)]
    pub scale: String,
    /// Estimator: functional (joint) or separate (per profile)
    #[arg(long, default_value = d::MODE)]
    pub mode: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Reconstruction output (.csv for CSV, FDG1 otherwise)
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Coefficient CSV; "auto" writes <out>.coeffs.csv
    #[arg(long, default_value = "auto")]
    pub coeffs: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Profiles M (power of two)
    #[arg(long, default_value = d::M)]
    pub m: usize,
    /// Samples per profile N (power of two)
    #[arg(long, default_value = d::N)]
    pub n: usize,
    /// Noise level
    #[arg(long, default_value = d::SIGMA)]
    pub sigma: f64,
    /// Test function along u: blip, bumps, quadratic
    #[arg(long, default_value = d::F1)]
    pub f1: String,
    /// Test function along t: blip, bumps, quadratic
    #[arg(long, default_value = d::F2)]
    pub f2: String,
    /// Monte-Carlo replicates
    #[arg(long, default_value = d::RUNS)]
    pub runs: usize,
    /// Random seed; replicate r uses stream r
    #[arg(long, default_value = d::SEED)]
    pub seed: u64,
    /// Built-in kernel shape (circular, one-sided) or a kernel grid file
    #[arg(long, default_value = d::KERNEL_SHAPE)]
    pub kernel: String,
    /// Convolution scaling: sum or riemann
    #[arg(long, default_value = d::SCALE)]
    pub scale: String,
    /// Modes to score: functional, separate or both
    #[arg(long, default_value = "both")]
    pub modes: String,
    /// Comma-separated M values for a functional-mode MISE sweep; "none" runs a single design
    #[arg(long, default_value = "none")]
    pub sweep_m: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Summary output (CSV, or two-column MN/MISE text for a sweep); "none" prints only
    #[arg(long, default_value = "none")]
    pub out: String,
    /// Per-replicate MISE CSV; "none" skips it
    #[arg(long, default_value = "none")]
    pub per_run: String,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Monte-Carlo replicates
    #[arg(long, default_value = d::RUNS)]
    pub runs: usize,
    /// Random seed; replicate r uses stream r
    #[arg(long, default_value = d::SEED)]
    pub seed: u64,
    /// Built-in kernel shape: circular or one-sided
    #[arg(long, default_value = d::KERNEL_SHAPE)]
    pub kernel: String,
    /// Convolution scaling: sum or riemann
    #[arg(long, default_value = d::SCALE)]
    pub scale: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Table CSV
    #[arg(long, default_value = "table1.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// Smoothness along t (decimal or p/q)
    #[arg(long)]
    pub s1: String,
    /// Spatial smoothness, comma-separated for several axes
    #[arg(long)]
    pub s2: String,
    /// Degree of ill-posedness (decimal or p/q)
    #[arg(long)]
    pub nu: String,
    /// Summability p (>= 1 or inf)
    #[arg(long)]
    pub p: String,
    /// Summability q (>= 1 or inf)
    #[arg(long, default_value = d::Q)]
    pub q: String,
    /// Ball radius A
    #[arg(long, default_value = d::RADIUS)]
    pub radius: f64,
    /// Profiles M for the comparison verdict; "none" skips it
    #[arg(long, default_value = "none")]
    pub m: String,
    /// Samples per profile N for the comparison verdict; "none" skips it
    #[arg(long, default_value = "none")]
    pub n: String,
    /// Print a JSON object instead of text [default: off]
    #[arg(long)]
    pub json: bool,
    /// Also write the report here; "none" prints only
    #[arg(long, default_value = "none")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Smoothness along t
    #[arg(long)]
    pub s1: f64,
    /// Spatial smoothness
    #[arg(long)]
    pub s2: f64,
    /// Degree of ill-posedness
    #[arg(long)]
    pub nu: f64,
    /// Number of profiles M
    #[arg(long)]
    pub m: f64,
    /// Samples per profile N
    #[arg(long)]
    pub n: f64,
    /// Print a JSON object instead of text [default: off]
    #[arg(long)]
    pub json: bool,
    /// Also write the report here; "none" prints only
    #[arg(long, default_value = "none")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct NuEstimateArgs {
    /// Kernel grid file, or a built-in shape: circular, one-sided
    #[arg(long, default_value = d::KERNEL_SHAPE)]
    pub kernel: String,
    /// Profiles M for a built-in kernel
    #[arg(long, default_value = d::M)]
    pub m: usize,
    /// Samples per profile N for a built-in kernel
    #[arg(long, default_value = d::N)]
    pub n: usize,
    /// Convolution scaling: sum or riemann
    #[arg(long, default_value = d::SCALE)]
    pub scale: String,
    /// Frequency range "lo:hi", or "auto" for [N/16, N/4]
    #[arg(long, default_value = d::NU_RANGE)]
    pub range: String,
    /// Also write the report here; "none" prints only
    #[arg(long, default_value = "none")]
    pub out: String,
}
