use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Corner densities of unitary orbits, Gelfand-Tsetlin counts and their
/// Monte Carlo verification.
///
/// JSON arguments are given inline or as `@path` to read them from a file.
#[derive(Debug, Parser)]
#[command(name = "gtcorners", version, about)]
pub struct Cli {
    /// Worker threads for sampling and verification.
    #[arg(long, global = true, env = "GTCORNERS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fundamental splines M(a; Y).
    #[command(subcommand)]
    Spline(SplineCommand),
    /// Density of the K x K corner of a uniformly rotated diag(X).
    #[command(subcommand)]
    Density(DensityCommand),
    /// Volume of the Gelfand-Tsetlin polytope with top row X.
    Volume {
        /// Top row as a JSON array of strictly increasing reals.
        #[arg(long)]
        x: String,
    },
    /// HCIZ integral of exp(Tr(Z H)) over the orbit of diag(X).
    Hciz {
        /// Spectrum X as a JSON array.
        #[arg(long)]
        x: String,
        /// Eigenvalues of Z: JSON array of numbers or [re, im] pairs.
        #[arg(long)]
        z: String,
    },
    /// Monte Carlo samples of corner spectra or full patterns.
    Sample(SampleArgs),
    /// Integer Gelfand-Tsetlin schemes.
    #[command(subcommand)]
    Discrete(DiscreteCommand),
    /// Run a verification suite and print its JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum SplineCommand {
    /// Evaluate M(a; Y).
    Eval {
        /// Strictly increasing knots as a JSON array.
        #[arg(long)]
        knots: String,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
    },
    /// Integrate M(a; Y) over [from, to]; bounds accept inf and -inf.
    Integrate {
        #[arg(long)]
        knots: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum DensityCommand {
    /// Evaluate the density at one point.
    Eval {
        #[arg(long)]
        x: String,
        #[arg(long)]
        k: usize,
        /// Point as a JSON array of length K.
        #[arg(long)]
        at: String,
    },
    /// Tabulate the density on a grid (zero off the chamber).
    Grid {
        #[arg(long)]
        x: String,
        #[arg(long)]
        k: usize,
        /// `min:max:steps` per coordinate, comma-separated; one spec is
        /// reused for every coordinate.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Output file (standard output when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct SampleArgs {
    #[command(subcommand)]
    pub pattern: Option<SampleCommand>,

    #[command(flatten)]
    pub common: SampleCommon,

    /// Corner size.
    #[arg(long, required = true)]
    pub k: Option<usize>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum SampleCommand {
    /// Full Gelfand-Tsetlin patterns, one JSON array of rows per line.
    Pattern(SampleCommon),
}

#[derive(Debug, Args)]
pub struct SampleCommon {
    /// Spectrum X as a JSON array.
    #[arg(long, required = true)]
    pub x: Option<String>,
    /// Number of samples.
    #[arg(long = "n", required = true)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single-threaded run (output is identical for any thread count).
    #[arg(long)]
    pub deterministic: bool,
    /// Output file (standard output when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DiscreteCommand {
    /// Number of integer schemes with top row X.
    Dim {
        /// Weakly increasing integers as a JSON array.
        #[arg(long)]
        x: String,
    },
    /// Exact fraction of schemes with top row X passing through row Y.
    Reldim {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Rescaled discrete law against the continuous density.
    Limit {
        /// Real spectrum X as a JSON array.
        #[arg(long)]
        x: String,
        #[arg(long)]
        k: usize,
        /// Lattice scale L.
        #[arg(long)]
        l: u64,
        /// Points as a JSON array of K-tuples.
        #[arg(long)]
        points: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Splines,
    Kernel,
    Theorem,
    Volume,
    Hciz,
    Recurrence,
    Discrete,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteName,
    /// Largest N used by the checks.
    #[arg(long = "n", default_value_t = 8)]
    pub max_n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Monte Carlo sample count override.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}
