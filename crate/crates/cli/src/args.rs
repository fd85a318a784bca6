use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use psub_core::fock::DEFAULT_TAIL_EPSILON;
use psub_core::Scheme;

/// Entanglement concentration of a two-mode squeezed vacuum by photon
/// subtraction: single runs, (N, T) sweeps, maximum-efficiency loci, oracle
/// checks and Monte Carlo validation.
#[derive(Debug, Parser)]
#[command(name = "psub", version)]
pub struct Cli {
    /// Directory for CSV output when --out is not given. Without either,
    /// CSV goes to stdout.
    #[arg(long, global = true, env = "PSUB_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one configuration: per-outcome table and efficiency.
    Run(RunArgs),
    /// Efficiency on an (N, T) grid for one squeezing value.
    Sweep(SweepArgs),
    /// Maximum-efficiency transmittance for each (lambda, N).
    Loci(LociArgs),
    /// Compare closed forms against the fast engine and the dense oracle.
    Verify(ProtocolArgs),
    /// Sample detector records and test them against the outcome probabilities.
    Mc(McArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Sweep(_) => "sweep",
            Command::Loci(_) => "loci",
            Command::Verify(_) => "verify",
            Command::Mc(_) => "mc",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// Squeezing parameter, 0 <= lambda < 1.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub lambda: f64,

    /// Beam splitters per arm.
    #[arg(long, default_value_t = 1)]
    pub n: u32,

    /// Beam-splitter transmittance, 0 <= T <= 1.
    #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
    pub t: f64,

    /// `standard` (every splitter always inserted) or `adaptive` (an arm stops
    /// after its first click).
    #[arg(long, default_value_t = Scheme::Standard)]
    pub scheme: Scheme,

    /// Tolerance on the discarded Fock tail when choosing the cutoff.
    #[arg(long, default_value_t = DEFAULT_TAIL_EPSILON)]
    pub tail_epsilon: f64,

    /// Fixed Fock cutoff, overriding the one derived from --tail-epsilon.
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Most photons one arm's detectors may report in an enumerated outcome.
    #[arg(long, default_value_t = 1)]
    pub k_max: u32,

    /// Write the efficiency row as CSV to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NRange {
    /// Smallest number of splitters per arm.
    #[arg(long, default_value_t = 1)]
    pub n_from: u32,

    /// Largest number of splitters per arm.
    #[arg(long, default_value_t = 10)]
    pub n_to: u32,
}

#[derive(Debug, Clone, Args)]
pub struct CsvOutput {
    /// CSV output file (default: <out-dir>/<command>.csv, else stdout).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Also write a matplotlib script that plots the CSV. Nothing is run.
    #[arg(long, value_name = "FILE")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Squeezing parameter, 0 <= lambda < 1.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub lambda: f64,

    /// `standard` (every splitter always inserted) or `adaptive` (an arm stops
    /// after its first click).
    #[arg(long, default_value_t = Scheme::Standard)]
    pub scheme: Scheme,

    #[command(flatten)]
    pub n_range: NRange,

    /// First transmittance of the grid.
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub t_min: f64,

    /// Last transmittance of the grid (included when on a step).
    #[arg(long, default_value_t = 0.999, allow_negative_numbers = true)]
    pub t_max: f64,

    /// Grid spacing in T.
    #[arg(long, default_value_t = 0.001, allow_negative_numbers = true)]
    pub t_step: f64,

    #[command(flatten)]
    pub output: CsvOutput,
}

#[derive(Debug, Clone, Args)]
pub struct LociArgs {
    /// Squeezing values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.15,0.32", allow_negative_numbers = true)]
    pub lambdas: Vec<f64>,

    /// `standard` (every splitter always inserted) or `adaptive` (an arm stops
    /// after its first click).
    #[arg(long, default_value_t = Scheme::Standard)]
    pub scheme: Scheme,

    #[command(flatten)]
    pub n_range: NRange,

    #[command(flatten)]
    pub output: CsvOutput,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,

    /// Number of simulated trials.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    /// RNG seed; equal seeds give identical tables.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
