use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hyperhaar", version, about = "Exact experiments on hyperbolic Haar sums and discrepancy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower-bound forms and the duality certificate for one coefficient field.
    Verify(VerifyArgs),
    /// Statistics of the Riesz product and its decomposition.
    Riesz(RieszArgs),
    /// Log-log slopes of coincidence pair sums against the free count.
    Beckgain(BeckArgs),
    /// Discrepancy certificate and Roth bound for a point set.
    Discrepancy(DiscrepancyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffArg {
    Ones,
    Random,
    File,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlocksArg {
    Partition,
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Walsh,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointsArg {
    Vdc,
    Hammersley,
    Random,
    Grid,
    File,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Parameters of the Riesz product.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: u32,
    /// Number of blocks; derived from `a` and `eps` when absent.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, default_value = "1/2")]
    pub a: String,
    /// Defaults to `1/d²`.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, value_enum, default_value = "partition")]
    pub blocks: BlocksArg,
    /// Exact stand-in for `ρ̃` in exact mode; a 32-bit dyadic approximation when absent.
    #[arg(long)]
    pub rho: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value = "ones")]
    pub coeff: CoeffArg,
    /// Coefficient CSV for `--coeff file`.
    #[arg(long)]
    pub coeff_file: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct RieszArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Source of the signs `ε_R`.
    #[arg(long, value_enum, default_value = "random")]
    pub coeff: CoeffArg,
    #[arg(long)]
    pub coeff_file: Option<PathBuf>,
    /// Corrupts one cell of the non-distinct part so that the identity checks must fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BeckArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Largest `n`; the run covers even `n` from 4 up to it unless `--ns` is given.
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub ps: Vec<u32>,
    #[arg(long, value_enum, default_value = "walsh")]
    pub engine: EngineArg,
    /// Also measure the pinned-parameter family.
    #[arg(long)]
    pub pinned: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DiscrepancyArgs {
    #[arg(long, value_enum, default_value = "vdc")]
    pub points: PointsArg,
    /// Number of points for generated sets.
    #[arg(long = "n-points")]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub points_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long)]
    pub rho: Option<String>,
    /// Random evaluation points for the sampled sup; 0 skips it.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Writes the point set as CSV.
    #[arg(long)]
    pub emit_points: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
