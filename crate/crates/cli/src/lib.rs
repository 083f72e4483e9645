//! Command-line front end: sampling, measures, adversary bounds, algorithm
//! runs, claim verification, bound calculators and the desk-scale table.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{Format, Provenance, Rows, SCHEMA};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "ONSETQLAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "onsetqlab",
    version,
    about = "Query-complexity experiments for Boolean functions with a fixed on-set size"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Size {
    /// Number of variables N.
    #[arg(long)]
    pub n: usize,
    /// On-set size M.
    #[arg(long, conflicts_with = "m_exp")]
    pub m: Option<u64>,
    /// On-set size as M = round(2^(alpha N)), clamped to [1, 2^(N-1)].
    #[arg(long = "m-exp")]
    pub m_exp: Option<f64>,
}

impl Size {
    pub fn m(&self) -> Result<u64> {
        m_from(self.n, self.m, self.m_exp)
    }
}

pub(crate) fn m_from(n: usize, m: Option<u64>, m_exp: Option<f64>) -> Result<u64> {
    match (m, m_exp) {
        (Some(m), _) => Ok(m),
        (None, Some(a)) => {
            if !(1..=64).contains(&n) {
                bail!("N must be in 1..=64");
            }
            let max = 1u64 << (n - 1);
            Ok(((a * n as f64).exp2().round() as u64).clamp(1, max))
        }
        (None, None) => bail!("one of --m or --m-exp is required"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Uniform member of F_{N,M}.
    Uniform,
    /// Prefix subcube, padded with marker strings.
    Subcube,
    /// Hamming ball padded away from the next weight level.
    Threshold,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw or construct a function in F_{N,M}.
    Sample {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "uniform")]
        kind: Kind,
        /// Print the truth-table file format instead of rows.
        #[arg(long)]
        table: bool,
    },
    /// Sensitivity, edge boundary and isoperimetric bound of one function.
    Measure {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long = "m-exp")]
        m_exp: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "uniform")]
        kind: Kind,
        /// Truth-table file to measure instead of a generated function.
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Adversary quantities.
    #[command(subcommand)]
    Adversary(AdversaryCmd),
    /// Run an evaluation algorithm.
    Alg {
        #[arg(value_enum)]
        algorithm: Algorithm,
        #[command(flatten)]
        args: AlgArgs,
    },
    /// Check a claim numerically.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Closed-form bound quantities at (N, M).
    Bounds {
        #[command(flatten)]
        size: Size,
    },
    /// Measured query counts beside the formula values over an (N, M) grid.
    Table1 {
        /// Comma-separated list of N.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Comma-separated list of alpha in M = 2^(alpha N).
        #[arg(long = "m-exp", value_delimiter = ',', required = true)]
        m_exp: Vec<f64>,
        #[arg(long)]
        seed: u64,
        /// Sampled inputs per cell and algorithm.
        #[arg(long, default_value_t = 20)]
        trials: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum AdversaryCmd {
    /// Weight-(k+1) versus weight-k strings at distance 1.
    HammingSlice {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Evaluate a relation stored as JSON.
    Eval {
        #[arg(long)]
        relation: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Subcube,
    WorstCase,
    AverageCase,
}

#[derive(Args, Debug, Clone)]
pub struct AlgArgs {
    #[command(flatten)]
    pub size: Size,
    #[arg(long)]
    pub seed: u64,
    /// Sampled inputs (ignored with --exhaustive).
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Exact success probability on every input.
    #[arg(long)]
    pub exhaustive: bool,
    /// Function family for the worst-case algorithm.
    #[arg(long, value_enum, default_value = "uniform")]
    pub kind: Kind,
    /// Fail instead of clamping when beta' >= 1.
    #[arg(long)]
    pub strict_beta: bool,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Minimum pairwise distance of a random on-set against r*.
    MinDistance {
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value_t = onsetqlab::verify::DEFAULT_EPS)]
        eps: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Largest pairwise state overlap of a random on-set.
    Overlap {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// (eN/d(z))^d(z) <= z and monotonicity of d.
    DProperty {
        /// Comma-separated N values.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 24, 32, 40, 48, 56, 64])]
        n: Vec<usize>,
        /// Grid points in log2 z over (0, max N].
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// N D <= M' and log2 T <= N D - N at z = M'/(N+1)^2.
    CountingChain {
        #[command(flatten)]
        size: Size,
    },
    /// s(f) >= |boundary|/M >= N - log2 M.
    SensitivityChain {
        #[arg(long = "n-max", default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
}

fn configure_threads() {
    if let Some(t) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    match commands::dispatch(cli)? {
        commands::Output::Rows(rows) => rows.write(cli.format, cli.out.as_deref()),
        commands::Output::Text(text) => output::write_bytes(text.as_bytes(), cli.out.as_deref()),
    }
}
